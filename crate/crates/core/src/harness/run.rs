use std::f64::consts::TAU;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{ConfigError, DistillMode, ProjectorChoice, RunConfig, StateModel};
use crate::chip::{biphoton_state, classical_fringe, fit_fringe_frequency, fringe_visibility, phase_grid, rhom_fringe_noisy};
use crate::distillation::{distillation_table, mean_gain, mle_sweep, MleSweepPoint, MleSweepStatus, SampledShots};
use crate::error::Error;
use crate::quantum::{average_entropy, entanglement_entropy, fidelity_pure, single_qubit_bipartitions, DensityMatrix, StateVector};
use crate::states::{mix_with_white_noise, white_noise_weight_for_fidelity, MODE_SIGNAL, PATH_SIGNAL, TWO_PHOTON_DIM};
use crate::tomography::{
    bootstrap_estimate, complete_pauli_set, default_restricted_set, measurement_rank, mle_reconstruct, read_count_csv,
    read_projector_set, simulate_counts, write_count_csv, write_projector_set, xz_pauli_set, BootstrapOptions, CountRecord,
    MeasurementSetting, MleOptions,
};

/// Bootstrap resample `k` of a tomography run uses seed `seed + BOOTSTRAP_SEED_OFFSET + k`,
/// keeping its stream apart from the count simulation's.
const BOOTSTRAP_SEED_OFFSET: u64 = 0x5eed_0000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Simulated counts for the configured state and projector set.
    Simulate,
    /// MLE reconstruction with a bootstrap error bar on the fidelity.
    Tomo,
    /// Coincidence and classical fringes.
    Rhom,
    /// Fidelity sweep over bit-flip probability.
    Distill,
    /// Entanglement entropy of the configured state.
    Entropy,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Tomo => "tomo",
            Command::Rhom => "rhom",
            Command::Distill => "distill",
            Command::Entropy => "entropy",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Invocation {
    pub config: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum HarnessError {
    Config(ConfigError),
    Runtime(Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Config(e) => write!(f, "config error: {e}"),
            HarnessError::Runtime(e) => write!(f, "error: {e}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<Error> for HarnessError {
    fn from(e: Error) -> Self {
        HarnessError::Runtime(e)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    /// One line per experiment.
    pub summary: Vec<String>,
    pub outputs: Vec<PathBuf>,
}

/// Loads the configuration, applies command-line overrides and runs `command`.
pub fn run(command: Command, inv: &Invocation) -> Result<RunReport, HarnessError> {
    let mut config = RunConfig::load(inv.config.as_deref(), &inv.overrides).map_err(HarnessError::Config)?;
    if inv.seed.is_some() {
        config.seed = inv.seed;
    }
    if inv.out.is_some() {
        config.output.dir = inv.out.clone();
    }
    execute(command, &config)
}

/// Runs `command` with an already validated configuration.
pub fn execute(command: Command, config: &RunConfig) -> Result<RunReport, HarnessError> {
    let ctx = Context::new(command, config)?;
    match command {
        Command::Simulate => simulate(&ctx),
        Command::Tomo => tomo(&ctx),
        Command::Rhom => rhom(&ctx),
        Command::Distill => distill(&ctx),
        Command::Entropy => entropy(&ctx),
    }
}

struct Context<'a> {
    command: Command,
    config: &'a RunConfig,
    out_dir: PathBuf,
    hash: String,
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config_sha256: &'a str,
    seed: Option<u64>,
}

impl<'a> Context<'a> {
    fn new(command: Command, config: &'a RunConfig) -> Result<Self, HarnessError> {
        let out_dir = config.output.dir.clone().unwrap_or_else(|| PathBuf::from("out"));
        Ok(Self { command, config, out_dir, hash: config.hash() })
    }

    /// The seed, or a config error naming what needed it.
    fn seed(&self, purpose: &str) -> Result<u64, HarnessError> {
        self.config.seed.ok_or_else(|| {
            HarnessError::Config(ConfigError {
                source: self.command.name().into(),
                line: None,
                message: format!("{purpose} is stochastic; pass --seed or set \"seed\" in the config"),
            })
        })
    }

    fn metadata(&self) -> Metadata<'_> {
        Metadata {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command.name(),
            config_sha256: &self.hash,
            seed: self.config.seed,
        }
    }

    fn csv_header(&self) -> String {
        let seed = self.config.seed.map_or("none".to_string(), |s| s.to_string());
        format!(
            "# {} {}\n# command: {}\n# config_sha256: {}\n# seed: {}\n",
            env!("CARGO_PKG_NAME"),
            env!("CARGO_PKG_VERSION"),
            self.command.name(),
            self.hash,
            seed
        )
    }

    fn path(&self, name: &str) -> Result<PathBuf, HarnessError> {
        fs::create_dir_all(&self.out_dir).map_err(Error::from)?;
        Ok(self.out_dir.join(name))
    }

    /// Writes a CSV body below the metadata header.
    fn write_csv(&self, name: &str, body: &[u8]) -> Result<PathBuf, HarnessError> {
        let path = self.path(name)?;
        let mut bytes = self.csv_header().into_bytes();
        bytes.extend_from_slice(body);
        fs::write(&path, bytes).map_err(Error::from)?;
        Ok(path)
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, HarnessError> {
        let path = self.path(name)?;
        let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
        text.push('\n');
        fs::write(&path, text).map_err(Error::from)?;
        Ok(path)
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, HarnessError> {
    w.into_inner().map_err(|e| HarnessError::Runtime(Error::Io(e.into_error())))
}

/// Prepared state and the ideal target it is compared against.
fn prepared_state(cfg: &RunConfig) -> Result<(DensityMatrix, StateVector), HarnessError> {
    let named = cfg.named_state();
    let target = named.state_vector();
    let rho = match cfg.state.model {
        StateModel::Ideal => target.to_density(),
        StateModel::Chip => {
            let pump = cfg.pump().map_err(|m| HarnessError::Runtime(Error::InvalidInput(m)))?;
            let src = cfg.source_model().map_err(|m| HarnessError::Runtime(Error::InvalidInput(m)))?;
            biphoton_state(&pump, &src)?
        }
    };
    let lambda = match cfg.state.fidelity {
        Some(f) => white_noise_weight_for_fidelity(f, rho.dim())?,
        None => cfg.state.lambda,
    };
    Ok((mix_with_white_noise(&rho, lambda)?, target))
}

fn measurement_settings(cfg: &RunConfig, n_qubits: usize) -> Result<Vec<MeasurementSetting>, HarnessError> {
    Ok(match &cfg.tomography.projectors {
        ProjectorChoice::Named(n) if n == "restricted" => default_restricted_set(),
        ProjectorChoice::Named(n) if n == "xz" => xz_pauli_set(n_qubits)?,
        ProjectorChoice::Named(_) => complete_pauli_set(n_qubits)?,
        ProjectorChoice::File { file } => read_projector_set(file)?,
    })
}

#[derive(Serialize)]
struct DensityFile<'a, S: Serialize> {
    metadata: Metadata<'a>,
    summary: S,
    dim: usize,
    /// Row-major `[re, im]` entries.
    rho: Vec<Vec<[f64; 2]>>,
}

fn density_entries(rho: &DensityMatrix) -> Vec<Vec<[f64; 2]>> {
    let m = rho.entries();
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn simulate(ctx: &Context) -> Result<RunReport, HarnessError> {
    let cfg = ctx.config;
    let seed = ctx.seed("simulate")?;
    let (rho, target) = prepared_state(cfg)?;
    let settings = measurement_settings(cfg, cfg.named_state().subsystem_dims().len())?;
    let records = simulate_counts(&rho, &settings, cfg.shots, seed)?;

    let counts_path = ctx.path("counts.csv")?;
    let mut buf = Vec::new();
    write_count_csv(&mut buf, &records)?;
    fs::write(&counts_path, buf).map_err(Error::from)?;
    let proj_path = ctx.path("projectors.json")?;
    write_projector_set(&proj_path, &settings)?;

    #[derive(Serialize)]
    struct Summary {
        state: String,
        fidelity_with_target: f64,
    }
    let fidelity = fidelity_pure(&rho, &target)?;
    let state_path = ctx.write_json(
        "state.json",
        &DensityFile {
            metadata: ctx.metadata(),
            summary: Summary { state: cfg.state.name.clone(), fidelity_with_target: fidelity },
            dim: rho.dim(),
            rho: density_entries(&rho),
        },
    )?;
    Ok(RunReport {
        summary: vec![format!(
            "simulate: {} records over {} settings at {} shots ({} fidelity {:.6}) -> {}",
            records.len(),
            settings.len(),
            cfg.shots,
            cfg.state.name,
            fidelity,
            counts_path.display()
        )],
        outputs: vec![counts_path, proj_path, state_path],
    })
}

fn tomo(ctx: &Context) -> Result<RunReport, HarnessError> {
    let cfg = ctx.config;
    let t = &cfg.tomography;
    let (rho, target) = prepared_state(cfg)?;
    let settings = measurement_settings(cfg, cfg.named_state().subsystem_dims().len())?;
    let records: Vec<CountRecord> = match &t.counts {
        Some(path) => read_count_csv(
            fs::File::open(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?,
        )?,
        None => simulate_counts(&rho, &settings, cfg.shots, ctx.seed("simulating tomography counts")?)?,
    };
    let mle = MleOptions {
        max_iterations: t.max_iterations,
        convergence_threshold: t.convergence_threshold,
        ..MleOptions::default()
    };
    let rec = mle_reconstruct(&records, &settings, &mle)?;
    if !rec.converged {
        log::warn!("MLE stopped at the iteration limit ({})", rec.iterations);
    }
    let fidelity = fidelity_pure(&rec.state, &target)?;
    let rank = measurement_rank(&settings)?;

    let stderr = if t.bootstrap >= 2 {
        let seed = ctx.seed("the bootstrap")?.wrapping_add(BOOTSTRAP_SEED_OFFSET);
        let est = bootstrap_estimate(
            &records,
            |recs| fidelity_pure(&mle_reconstruct(recs, &settings, &mle)?.state, &target),
            &BootstrapOptions::new(t.bootstrap, seed),
        )?;
        Some(est.standard_error)
    } else {
        None
    };

    #[derive(Serialize)]
    struct Summary {
        state: String,
        fidelity: f64,
        bootstrap_stderr: Option<f64>,
        measurement_rank: usize,
        settings: usize,
        iterations: usize,
        converged: bool,
        log_likelihood: f64,
    }
    let path = ctx.write_json(
        "rho.json",
        &DensityFile {
            metadata: ctx.metadata(),
            summary: Summary {
                state: cfg.state.name.clone(),
                fidelity,
                bootstrap_stderr: stderr,
                measurement_rank: rank,
                settings: settings.len(),
                iterations: rec.iterations,
                converged: rec.converged,
                log_likelihood: rec.log_likelihood,
            },
            dim: rec.state.dim(),
            rho: density_entries(&rec.state),
        },
    )?;
    let err = stderr.map_or(String::new(), |s| format!(" ± {s:.6}"));
    Ok(RunReport {
        summary: vec![format!(
            "tomo: fidelity {fidelity:.6}{err} with {} ({} settings, rank {rank}, {} iterations) -> {}",
            cfg.state.name,
            settings.len(),
            rec.iterations,
            path.display()
        )],
        outputs: vec![path],
    })
}

fn rhom(ctx: &Context) -> Result<RunReport, HarnessError> {
    let cfg = ctx.config;
    let r = &cfg.rhom;
    let grid = phase_grid(0.0, TAU, r.points);
    let coincidence: Vec<f64> = grid.iter().map(|&p| rhom_fringe_noisy(p, r.visibility)).collect::<Result<_, _>>()?;
    let classical: Vec<f64> = grid.iter().map(|&p| classical_fringe(p)).collect();
    let sampled = if r.sample {
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed("fringe sampling")?);
        let mut draw = |v: &f64| crate::tomography::poisson_draw(cfg.shots as f64 * v, &mut rng);
        let a: Vec<u64> = coincidence.iter().map(&mut draw).collect();
        let b: Vec<u64> = classical.iter().map(&mut draw).collect();
        Some((a, b))
    } else {
        None
    };

    let (vis, ratio) = match &sampled {
        Some((a, b)) => {
            let a: Vec<f64> = a.iter().map(|&n| n as f64).collect();
            let b: Vec<f64> = b.iter().map(|&n| n as f64).collect();
            (fringe_visibility(&a)?, fit_fringe_frequency(&grid, &a)? / fit_fringe_frequency(&grid, &b)?)
        }
        None => (
            fringe_visibility(&coincidence)?,
            fit_fringe_frequency(&grid, &coincidence)? / fit_fringe_frequency(&grid, &classical)?,
        ),
    };

    let mut w = csv_writer();
    match &sampled {
        Some(_) => w.write_record(["phase", "coincidence", "classical", "coincidence_counts", "classical_counts"]),
        None => w.write_record(["phase", "coincidence", "classical"]),
    }
    .map_err(Error::from)?;
    for i in 0..grid.len() {
        let mut row = vec![grid[i].to_string(), coincidence[i].to_string(), classical[i].to_string()];
        if let Some((a, b)) = &sampled {
            row.push(a[i].to_string());
            row.push(b[i].to_string());
        }
        w.write_record(&row).map_err(Error::from)?;
    }
    let path = ctx.write_csv("rhom.csv", &finish(w)?)?;
    Ok(RunReport {
        summary: vec![format!(
            "rhom: visibility {vis:.6}, coincidence/classical frequency ratio {ratio:.6} -> {}",
            path.display()
        )],
        outputs: vec![path],
    })
}

fn distill(ctx: &Context) -> Result<RunReport, HarnessError> {
    let cfg = ctx.config;
    let d = &cfg.distill;
    let (resource, _) = prepared_state(cfg)?;
    if resource.dim() != TWO_PHOTON_DIM {
        return Err(Error::InvalidInput(format!("distillation needs a two-photon state, {} is not one", cfg.state.name)).into());
    }
    let grid = phase_grid(d.p_grid.start, d.p_grid.stop, d.p_grid.count);
    let opts = d.options();

    let (body, gain) = match d.mode {
        DistillMode::Stabilizer => {
            let rows = distillation_table(&resource, &grid, &opts)?;
            let mut w = csv_writer();
            for r in &rows {
                w.serialize(r).map_err(Error::from)?;
            }
            let low: Vec<_> = rows.iter().copied().filter(|r| r.p <= 0.5).collect();
            (finish(w)?, mean_gain(&low))
        }
        DistillMode::Mle => {
            let sampling = if d.sample {
                Some(SampledShots { shots: cfg.shots, seed: ctx.seed("sampled MLE sweep")? })
            } else {
                None
            };
            let mle = MleOptions {
                max_iterations: cfg.tomography.max_iterations,
                convergence_threshold: cfg.tomography.convergence_threshold,
                ..MleOptions::default()
            };
            let plain = mle_sweep(&resource, &grid, false, sampling, &opts, &mle)?;
            let distilled = mle_sweep(&resource, &grid, true, sampling, &opts, &mle)?;
            let mut w = csv_writer();
            w.write_record(["p", "fidelity_no_distill", "fidelity_distill", "success_probability", "status"])
                .map_err(Error::from)?;
            let fmt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
            let mut gains = Vec::new();
            for (a, b) in plain.iter().zip(&distilled) {
                let status = mle_status(a, b);
                w.write_record([
                    a.p.to_string(),
                    fmt(a.fidelity),
                    fmt(b.fidelity),
                    fmt(b.fidelity.map(|_| b.success_probability)),
                    status.to_string(),
                ])
                .map_err(Error::from)?;
                if let (Some(x), Some(y)) = (a.fidelity, b.fidelity) {
                    gains.push(y - x);
                }
            }
            (finish(w)?, gains.iter().sum::<f64>() / gains.len().max(1) as f64)
        }
    };
    let path = ctx.write_csv("distill.csv", &body)?;
    Ok(RunReport {
        summary: vec![format!(
            "distill: {} points, mean fidelity gain over p ≤ 0.5 {gain:.6} -> {}",
            grid.len(),
            path.display()
        )],
        outputs: vec![path],
    })
}

fn mle_status(a: &MleSweepPoint, b: &MleSweepPoint) -> &'static str {
    match (&a.status, &b.status) {
        (MleSweepStatus::TargetNotDominant, _) | (_, MleSweepStatus::TargetNotDominant) => "not_converged_target_not_dominant",
        (MleSweepStatus::Converged, MleSweepStatus::Converged) => "converged",
        _ => "not_converged",
    }
}

fn entropy(ctx: &Context) -> Result<RunReport, HarnessError> {
    let cfg = ctx.config;
    let (rho, _) = prepared_state(cfg)?;
    let dims = cfg.named_state().subsystem_dims();
    let parts = cfg.entropy.bipartitions.clone().unwrap_or_else(|| single_qubit_bipartitions(dims.len()));
    let base = cfg.entropy.base;

    let mut w = csv_writer();
    w.write_record(["partition", "entropy"]).map_err(Error::from)?;
    for part in &parts {
        let label: Vec<String> = part.iter().map(usize::to_string).collect();
        let s = entanglement_entropy(&rho, &dims, part, base)?;
        w.write_record([label.join("+"), s.to_string()]).map_err(Error::from)?;
    }
    let avg = average_entropy(&rho, &dims, &parts, base)?;
    w.write_record(["average".to_string(), avg.to_string()]).map_err(Error::from)?;
    let mut line = format!("entropy: average {avg:.6} over {} bipartitions (base {base})", parts.len());
    if dims.len() == 4 {
        let photon = entanglement_entropy(&rho, &dims, &[MODE_SIGNAL, PATH_SIGNAL], base)?;
        w.write_record(["photon".to_string(), photon.to_string()]).map_err(Error::from)?;
        line.push_str(&format!(", signal|idler photon {photon:.6}"));
    }
    let path = ctx.write_csv("entropy.csv", &finish(w)?)?;
    line.push_str(&format!(" -> {}", path.display()));
    Ok(RunReport { summary: vec![line], outputs: vec![path] })
}

/// Contents of a harness CSV without its `#` metadata lines.
pub fn read_body(path: &Path) -> std::io::Result<String> {
    let text = fs::read_to_string(path)?;
    Ok(text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n"))
}
