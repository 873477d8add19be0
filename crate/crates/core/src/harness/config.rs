//! Run configuration: one JSON document plus `--set key=value` overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::chip::{PumpConfig, SourceModel, SOURCE_MODES};
use crate::distillation::{DistillOptions, PostSelection};
use crate::quantum::Complex64;
use crate::states::{NamedState, Photon};

/// A configuration problem, reported with the line it was found on when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.source, line, self.message),
            None => write!(f, "{}: {}", self.source, self.message),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub state: StateConfig,
    pub shots: u64,
    pub seed: Option<u64>,
    pub tomography: TomographyConfig,
    pub rhom: RhomConfig,
    pub distill: DistillConfig,
    pub entropy: EntropyConfig,
    /// Not part of the configuration hash, so the same run written to two
    /// places produces identical files.
    #[serde(skip_serializing)]
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            state: StateConfig::default(),
            shots: 100_000,
            seed: None,
            tomography: TomographyConfig::default(),
            rhom: RhomConfig::default(),
            distill: DistillConfig::default(),
            entropy: EntropyConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum StateModel {
    /// The target state vector itself.
    #[default]
    Ideal,
    /// Post-selected biphoton generation from the pumped sources.
    Chip,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct StateConfig {
    /// `ghz4`, `hyper` or `bell-{phi,psi}-{plus,minus}`.
    pub name: String,
    pub model: StateModel,
    /// Pump amplitudes `[re, im]` for the four source-modes (chip model).
    pub pump: Option<Vec<[f64; 2]>>,
    /// Uniform pairwise source visibility (chip model).
    pub visibility: Option<f64>,
    /// Full 4×4 visibility matrix (chip model); overrides `visibility`.
    pub visibilities: Option<Vec<Vec<f64>>>,
    pub efficiency: Option<Vec<f64>>,
    /// White-noise weight λ in `λ ρ + (1 − λ) I/d`.
    pub lambda: f64,
    /// Target fidelity; sets λ when given.
    pub fidelity: Option<f64>,
}

impl Default for StateConfig {
    fn default() -> Self {
        Self {
            name: "hyper".into(),
            model: StateModel::Ideal,
            pump: None,
            visibility: None,
            visibilities: None,
            efficiency: None,
            lambda: 1.0,
            fidelity: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ProjectorChoice {
    /// `complete`, `restricted` or `xz`.
    Named(String),
    File { file: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TomographyConfig {
    pub projectors: ProjectorChoice,
    /// Count-record CSV to reconstruct from instead of simulating.
    pub counts: Option<PathBuf>,
    /// Bootstrap resamples for the fidelity error bar; 0 disables it.
    pub bootstrap: usize,
    pub max_iterations: usize,
    pub convergence_threshold: f64,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self {
            projectors: ProjectorChoice::Named("complete".into()),
            counts: None,
            bootstrap: 100,
            max_iterations: 100_000,
            convergence_threshold: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RhomConfig {
    /// Phase points over `[0, 2π]`; `4k + 1` points sample both extrema exactly.
    pub points: usize,
    pub visibility: f64,
    /// Poisson-sample both fringes with `shots` events at full transmission.
    pub sample: bool,
}

impl Default for RhomConfig {
    fn default() -> Self {
        Self { points: 1001, visibility: 1.0, sample: false }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { start: 0.0, stop: 1.0, count: 101 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum DistillMode {
    /// Stabilizer fidelity from mixed detection frequencies.
    #[default]
    Stabilizer,
    /// Path-pair MLE tomography at every grid point.
    Mle,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum PostSelectionRule {
    #[default]
    Correlated,
    Anticorrelated,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DistillConfig {
    pub p_grid: GridConfig,
    pub flipped_photon: Photon,
    pub post_selection: PostSelectionRule,
    pub mode: DistillMode,
    /// MLE mode only: Poisson-sample `shots` events per setting instead of
    /// using exact frequencies.
    pub sample: bool,
}

impl Default for DistillConfig {
    fn default() -> Self {
        Self {
            p_grid: GridConfig::default(),
            flipped_photon: Photon::Idler,
            post_selection: PostSelectionRule::Correlated,
            mode: DistillMode::Stabilizer,
            sample: false,
        }
    }
}

impl DistillConfig {
    pub fn options(&self) -> DistillOptions {
        DistillOptions {
            flipped_photon: self.flipped_photon,
            post_selection: match self.post_selection {
                PostSelectionRule::Correlated => PostSelection::ModeCorrelated,
                PostSelectionRule::Anticorrelated => PostSelection::ModeAnticorrelated,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct EntropyConfig {
    pub base: f64,
    /// Qubit subsets to trace down to; default every single qubit.
    pub bipartitions: Option<Vec<Vec<usize>>>,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        Self { base: 2.0, bipartitions: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

impl RunConfig {
    /// Parses `text`, applies `overrides` and validates. `source` names the
    /// document in diagnostics.
    pub fn parse(text: &str, source: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let err = |line: Option<usize>, message: String| ConfigError { source: source.to_string(), line, message };
        // parse straight into the struct first so serde reports line numbers
        let mut config: RunConfig = serde_json::from_str(text).map_err(|e| err(Some(e.line()), strip_position(&e)))?;
        if !overrides.is_empty() {
            let mut value = serde_json::from_str::<Value>(text).map_err(|e| err(Some(e.line()), e.to_string()))?;
            for o in overrides {
                apply_override(&mut value, o).map_err(|m| ConfigError { source: format!("--set {o}"), line: None, message: m })?;
            }
            config = serde_json::from_value(value)
                .map_err(|e| ConfigError { source: format!("--set {}", overrides.join(" ")), line: None, message: e.to_string() })?;
        }
        config.validate().map_err(|(key, message)| err(locate_key(text, key), message))?;
        Ok(config)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| ConfigError {
                    source: p.display().to_string(),
                    line: None,
                    message: format!("cannot read config: {e}"),
                })?;
                Self::parse(&text, &p.display().to_string(), overrides)
            }
            None => Self::parse("{}", "<defaults>", overrides),
        }
    }

    /// Checks every numeric field against the preconditions of the operation
    /// that consumes it. Errors carry the offending key.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        let s = &self.state;
        let name: NamedState = s.name.parse().map_err(|_| ("name", format!("unknown state {:?}", s.name)))?;
        if !(0.0..=1.0).contains(&s.lambda) {
            return Err(("lambda", format!("lambda {} is outside [0, 1]", s.lambda)));
        }
        if let Some(f) = s.fidelity {
            if !(0.0..=1.0).contains(&f) {
                return Err(("fidelity", format!("fidelity {f} is outside [0, 1]")));
            }
        }
        if s.model == StateModel::Chip {
            if matches!(name, NamedState::Bell(_)) {
                return Err(("model", "the chip model prepares only ghz4 and hyper".into()));
            }
            self.pump().map_err(|m| ("pump", m))?;
            self.source_model().map_err(|m| ("visibility", m))?;
        } else if s.pump.is_some() || s.visibility.is_some() || s.visibilities.is_some() || s.efficiency.is_some() {
            return Err(("model", "pump, visibility and efficiency need \"model\": \"chip\"".into()));
        }
        if self.shots == 0 {
            return Err(("shots", "shots must be positive".into()));
        }
        let t = &self.tomography;
        if let ProjectorChoice::Named(n) = &t.projectors {
            if !["complete", "restricted", "xz"].contains(&n.as_str()) {
                return Err(("projectors", format!("unknown projector set {n:?}")));
            }
            if n != "complete" && name.subsystem_dims().len() != 4 {
                return Err(("projectors", format!("the {n} set is defined for four qubits")));
            }
        }
        if t.bootstrap == 1 {
            return Err(("bootstrap", "bootstrap needs 0 (off) or at least 2 resamples".into()));
        }
        if t.max_iterations == 0 {
            return Err(("max_iterations", "max_iterations must be positive".into()));
        }
        if !(t.convergence_threshold >= 0.0 && t.convergence_threshold.is_finite()) {
            return Err(("convergence_threshold", "convergence_threshold must be non-negative".into()));
        }
        if self.rhom.points < 8 {
            return Err(("points", "rhom needs at least 8 phase points".into()));
        }
        if !(0.0..=1.0).contains(&self.rhom.visibility) {
            return Err(("visibility", format!("visibility {} is outside [0, 1]", self.rhom.visibility)));
        }
        let g = &self.distill.p_grid;
        if g.count == 0 || !(0.0..=1.0).contains(&g.start) || !(0.0..=1.0).contains(&g.stop) || g.start > g.stop {
            return Err(("p_grid", "p_grid needs 0 ≤ start ≤ stop ≤ 1 and count ≥ 1".into()));
        }
        if !(self.entropy.base > 1.0 && self.entropy.base.is_finite()) {
            return Err(("base", format!("entropy base {} must exceed 1", self.entropy.base)));
        }
        Ok(())
    }

    pub fn named_state(&self) -> NamedState {
        self.state.name.parse().expect("validated")
    }

    pub fn pump(&self) -> Result<PumpConfig, String> {
        match &self.state.pump {
            None => Ok(match self.state.name.as_str() {
                "ghz4" => PumpConfig::ghz4(),
                _ => PumpConfig::hyperentangled(),
            }),
            Some(v) => {
                let amps: [Complex64; SOURCE_MODES] = v
                    .iter()
                    .map(|a| Complex64::new(a[0], a[1]))
                    .collect::<Vec<_>>()
                    .try_into()
                    .map_err(|_| "pump needs four [re, im] amplitudes".to_string())?;
                PumpConfig::normalized(amps).map_err(|e| e.to_string())
            }
        }
    }

    pub fn source_model(&self) -> Result<SourceModel, String> {
        let s = &self.state;
        let mut model = match (&s.visibilities, s.visibility) {
            (Some(rows), _) => {
                let m: [[f64; SOURCE_MODES]; SOURCE_MODES] = rows
                    .iter()
                    .map(|r| <[f64; SOURCE_MODES]>::try_from(r.as_slice()).map_err(|_| "visibilities must be 4×4".to_string()))
                    .collect::<Result<Vec<_>, _>>()?
                    .try_into()
                    .map_err(|_| "visibilities must be 4×4".to_string())?;
                SourceModel::new(m).map_err(|e| e.to_string())?
            }
            (None, Some(v)) => SourceModel::uniform(v).map_err(|e| e.to_string())?,
            (None, None) => SourceModel::ideal(),
        };
        if let Some(eff) = &s.efficiency {
            let eff: [f64; SOURCE_MODES] = eff.as_slice().try_into().map_err(|_| "efficiency needs four entries".to_string())?;
            model = model.with_efficiency(eff).map_err(|e| e.to_string())?;
        }
        Ok(model)
    }

    /// SHA-256 of the canonical JSON form (seed included, output paths excluded).
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let canonical = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn strip_position(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_string(),
        None => s,
    }
}

/// First line on which `"key"` appears as an object key.
fn locate_key(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

/// `a.b.c=value`; the value is read as JSON and falls back to a plain string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), String> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| format!("override {assignment:?} is not of the form key=value"))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(format!("override {assignment:?} has an empty key"));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    let mut node = root;
    for key in &keys[..keys.len() - 1] {
        let obj = node.as_object_mut().ok_or_else(|| format!("cannot set {path:?}: {key:?} is not inside an object"))?;
        node = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    node.as_object_mut()
        .ok_or_else(|| format!("cannot set {path:?}: parent is not an object"))?
        .insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}
