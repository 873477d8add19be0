//! Single-copy entanglement distillation between the path and TE-mode
//! qubits of one photon pair.
//!
//! Each photon applies a CNOT with its path qubit as control and its mode
//! qubit as target. Bit flips on the path pair then show up as an
//! anti-correlated mode pair, and keeping only mode-correlated detection
//! events filters them out. A flip on both qubits of the same photon passes
//! undetected.
//!
//! Bit-flip scenarios are combined at the level of normalized detection
//! frequencies: with independent flips of probability `p` per qubit the
//! scenario weights are `(1−p)²`, `p(1−p)`, `p(1−p)`, `p²` for no flip, path
//! flip, mode flip and both. Path-pair fidelity to `Φ⁺` is then estimated from
//! the stabilizers `{XX, −YY, ZZ}`.
//!
//! On hardware where the CNOT and the simulated mode flip share one MZI, the
//! recorded "path flip" and "both flips" data sets come out exchanged; use
//! [`ScenarioCounts::with_chip_ordering_swapped`] before mixing such data.
//! The simulator itself composes operations in protocol order.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::{
    c, fidelity_pure, partial_trace, CMatrix, DensityMatrix, Pauli, Projector, StateVector,
};
use crate::states::{
    apply_bit_flip, basis_index, bell_state, BellKind, Dof, DofAddress, Photon, MODE_IDLER, MODE_SIGNAL,
    PATH_IDLER, PATH_SIGNAL, QUBIT_DIMS, TWO_PHOTON_DIM,
};
use crate::tomography::{
    complete_pauli_set, mle_reconstruct, outcome_signs, pauli_projector, simulate_counts, CountRecord,
    MleOptions,
};

/// Per-photon CNOT, control = path qubit, target = mode qubit, on both photons.
pub fn local_cnot() -> CMatrix {
    let mut u = CMatrix::zeros(TWO_PHOTON_DIM, TWO_PHOTON_DIM);
    for ms in 0..2 {
        for mi in 0..2 {
            for ps in 0..2 {
                for pi in 0..2 {
                    let from = basis_index(ms, mi, ps, pi);
                    let to = basis_index(ms ^ ps, mi ^ pi, ps, pi);
                    u[(to, from)] = c(1.0, 0.0);
                }
            }
        }
    }
    u
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlipScenario {
    pub path_flip: bool,
    pub mode_flip: bool,
}

impl FlipScenario {
    pub const NONE: FlipScenario = FlipScenario { path_flip: false, mode_flip: false };
    pub const PATH: FlipScenario = FlipScenario { path_flip: true, mode_flip: false };
    pub const MODE: FlipScenario = FlipScenario { path_flip: false, mode_flip: true };
    pub const BOTH: FlipScenario = FlipScenario { path_flip: true, mode_flip: true };
    pub const ALL: [FlipScenario; 4] = [Self::NONE, Self::PATH, Self::MODE, Self::BOTH];

    /// Probability of this scenario when each qubit flips independently with `p`.
    pub fn weight(self, weights: &FlipWeights) -> f64 {
        match (self.path_flip, self.mode_flip) {
            (false, false) => weights.none,
            (true, true) => weights.both,
            _ => weights.one,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipWeights {
    pub none: f64,
    pub one: f64,
    pub both: f64,
}

/// `((1−p)², p(1−p), p²)`.
pub fn flip_weights(p: f64) -> Result<FlipWeights> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input(format!("bit-flip probability {p} is outside [0, 1]")));
    }
    Ok(FlipWeights { none: (1.0 - p).powi(2), one: p * (1.0 - p), both: p * p })
}

/// Normalized detection frequencies per measurement setting for each of the
/// four flip scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioCounts {
    data: BTreeMap<FlipScenario, Vec<Vec<f64>>>,
}

impl ScenarioCounts {
    /// Every vector must be non-negative and sum to one; every scenario must
    /// have the same number of settings and outcomes.
    pub fn new(data: BTreeMap<FlipScenario, Vec<Vec<f64>>>) -> Result<Self> {
        let shape: Option<Vec<usize>> = data.values().next().map(|v| v.iter().map(Vec::len).collect());
        for (scenario, per_setting) in &data {
            if Some(per_setting.iter().map(Vec::len).collect::<Vec<_>>()) != shape {
                return Err(Error::input(format!("scenario {scenario:?} has a different shape")));
            }
            for v in per_setting {
                if v.iter().any(|x| !(*x >= 0.0)) {
                    return Err(Error::input(format!("scenario {scenario:?} has negative frequencies")));
                }
                let total: f64 = v.iter().sum();
                if (total - 1.0).abs() > 1e-10 {
                    return Err(Error::input(format!("scenario {scenario:?} frequencies sum to {total}")));
                }
            }
        }
        Ok(Self { data })
    }

    pub fn get(&self, scenario: FlipScenario) -> Option<&Vec<Vec<f64>>> {
        self.data.get(&scenario)
    }

    /// Exchanges the path-flip and both-flip data sets.
    pub fn with_chip_ordering_swapped(mut self) -> Self {
        let path = self.data.remove(&FlipScenario::PATH);
        let both = self.data.remove(&FlipScenario::BOTH);
        if let Some(v) = path {
            self.data.insert(FlipScenario::BOTH, v);
        }
        if let Some(v) = both {
            self.data.insert(FlipScenario::PATH, v);
        }
        self
    }
}

/// `C = P_none C_none + P_one C_path + P_one C_mode + P_both C_both`.
pub fn scale_counts(sc: &ScenarioCounts, p: f64) -> Result<Vec<Vec<f64>>> {
    let w = flip_weights(p)?;
    let mut out: Option<Vec<Vec<f64>>> = None;
    for scenario in FlipScenario::ALL {
        let data = sc
            .get(scenario)
            .ok_or_else(|| Error::input(format!("scenario {scenario:?} is missing")))?;
        let weight = scenario.weight(&w);
        let acc = out.get_or_insert_with(|| data.iter().map(|v| vec![0.0; v.len()]).collect());
        for (a, d) in acc.iter_mut().zip(data) {
            for (x, y) in a.iter_mut().zip(d) {
                *x += weight * y;
            }
        }
    }
    Ok(out.expect("four scenarios"))
}

/// `(1 + ⟨XX⟩ − ⟨YY⟩ + ⟨ZZ⟩)/4`, clamped to `[0, 1]`.
pub fn stabilizer_fidelity(xx: f64, yy: f64, zz: f64) -> Result<f64> {
    for (name, v) in [("XX", xx), ("YY", yy), ("ZZ", zz)] {
        if !(-1.0..=1.0).contains(&v) {
            return Err(Error::input(format!("⟨{name}⟩ = {v} is outside [−1, 1]")));
        }
    }
    Ok(((1.0 + xx - yy + zz) / 4.0).clamp(0.0, 1.0))
}

/// Which mode-pair outcomes are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PostSelection {
    /// Both photons in the same TE mode.
    #[default]
    ModeCorrelated,
    /// Photons in different TE modes.
    ModeAnticorrelated,
}

impl PostSelection {
    fn keeps(self, mode_signal: usize, mode_idler: usize) -> bool {
        match self {
            PostSelection::ModeCorrelated => mode_signal == mode_idler,
            PostSelection::ModeAnticorrelated => mode_signal != mode_idler,
        }
    }
}

/// Projects onto the kept mode subspace, traces out the modes and
/// renormalizes. Returns the path-pair state and the success probability.
pub fn postselect_mode(rho: &DensityMatrix, rule: PostSelection) -> Result<(DensityMatrix, f64)> {
    if rho.dim() != TWO_PHOTON_DIM {
        return Err(Error::input(format!("expected a 16-dimensional two-photon state, got {}", rho.dim())));
    }
    let mut reduced = CMatrix::zeros(4, 4);
    for ms in 0..2 {
        for mi in 0..2 {
            if !rule.keeps(ms, mi) {
                continue;
            }
            for a in 0..4 {
                for b in 0..4 {
                    reduced[(a, b)] += rho.entries()[(basis_index(ms, mi, a >> 1, a & 1), basis_index(ms, mi, b >> 1, b & 1))];
                }
            }
        }
    }
    let success = reduced.trace().re;
    if success < 1e-12 {
        return Err(Error::DegeneratePostSelection(success));
    }
    Ok((DensityMatrix::from_numerical(reduced)?, success.min(1.0)))
}

pub fn postselect_mode_correlated(rho: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
    postselect_mode(rho, PostSelection::ModeCorrelated)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistillOptions {
    /// Photon whose qubits the simulated bit flips act on.
    pub flipped_photon: Photon,
    pub post_selection: PostSelection,
}

impl Default for DistillOptions {
    fn default() -> Self {
        Self { flipped_photon: Photon::Idler, post_selection: PostSelection::ModeCorrelated }
    }
}

/// Resource after the scenario's bit flips and, when distilling, the CNOT.
pub fn scenario_state(
    resource: &DensityMatrix,
    scenario: FlipScenario,
    with_distillation: bool,
    opts: &DistillOptions,
) -> Result<DensityMatrix> {
    let mut rho = resource.clone();
    if scenario.path_flip {
        rho = apply_bit_flip(&rho, DofAddress::new(opts.flipped_photon, Dof::Path))?;
    }
    if scenario.mode_flip {
        rho = apply_bit_flip(&rho, DofAddress::new(opts.flipped_photon, Dof::Mode))?;
    }
    if with_distillation {
        rho = rho.conjugate_by(&local_cnot())?;
    }
    Ok(rho)
}

/// Path-pair Pauli settings whose expectations give the `Φ⁺` stabilizer fidelity.
pub const STABILIZER_SETTINGS: [&str; 3] = ["XX", "YY", "ZZ"];

/// Outcome projectors of a joint measurement: the path pair in the local
/// Pauli basis `path_basis` and both mode qubits in Z. Outcome index is
/// `4 · (2·mode_signal + mode_idler) + path_outcome`, with path outcomes
/// ordered as in [`outcome_signs`].
pub fn joint_outcome_projectors(path_basis: &str) -> Result<Vec<Projector>> {
    let bases = Pauli::parse_string(path_basis)?;
    if bases.len() != 2 {
        return Err(Error::input("path basis must name two qubits"));
    }
    let mut out = Vec::with_capacity(16);
    for mode in 0..4 {
        let mode_state = StateVector::basis(4, mode)?;
        for path in 0..4 {
            let path_proj = pauli_projector(&bases, &outcome_signs(path, 2))?;
            out.push(Projector::from_state(&mode_state).tensor(&path_proj));
        }
    }
    Ok(out)
}

/// Born-rule probabilities of the 16 joint outcomes for each basis.
pub fn joint_outcome_probabilities(rho: &DensityMatrix, path_bases: &[&str]) -> Result<Vec<Vec<f64>>> {
    path_bases
        .iter()
        .map(|basis| {
            joint_outcome_projectors(basis)?
                .iter()
                .map(|proj| crate::quantum::born_probability(rho, proj))
                .collect::<Result<Vec<f64>>>()
                .map(|v| {
                    let total: f64 = v.iter().sum();
                    v.into_iter().map(|x| x / total).collect()
                })
        })
        .collect()
}

/// Scenario frequencies for the stabilizer settings.
pub fn stabilizer_scenario_counts(
    resource: &DensityMatrix,
    with_distillation: bool,
    opts: &DistillOptions,
) -> Result<ScenarioCounts> {
    scenario_counts_for(resource, &STABILIZER_SETTINGS, with_distillation, opts)
}

fn scenario_counts_for(
    resource: &DensityMatrix,
    bases: &[&str],
    with_distillation: bool,
    opts: &DistillOptions,
) -> Result<ScenarioCounts> {
    let mut data = BTreeMap::new();
    for scenario in FlipScenario::ALL {
        let rho = scenario_state(resource, scenario, with_distillation, opts)?;
        data.insert(scenario, joint_outcome_probabilities(&rho, bases)?);
    }
    ScenarioCounts::new(data)
}

/// Path-outcome distribution from a 16-outcome joint distribution: either
/// post-selected on the mode rule or marginalized over the modes. Returns the
/// renormalized four path frequencies and the kept fraction.
pub fn path_distribution(joint: &[f64], post_selection: Option<PostSelection>) -> Result<(Vec<f64>, f64)> {
    if joint.len() != 16 {
        return Err(Error::input("joint distribution must have 16 outcomes"));
    }
    let mut path = vec![0.0; 4];
    for mode in 0..4 {
        if let Some(rule) = post_selection {
            if !rule.keeps(mode >> 1, mode & 1) {
                continue;
            }
        }
        for (k, slot) in path.iter_mut().enumerate() {
            *slot += joint[4 * mode + k];
        }
    }
    let kept: f64 = path.iter().sum();
    if kept < 1e-12 {
        return Err(Error::DegeneratePostSelection(kept));
    }
    Ok((path.into_iter().map(|x| x / kept).collect(), kept))
}

/// `Σ sign · frequency` for a two-qubit Pauli-product outcome distribution.
fn parity_expectation(path_freqs: &[f64]) -> f64 {
    path_freqs
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let sign: f64 = outcome_signs(k, 2).iter().map(|&s| if s { 1.0 } else { -1.0 }).product();
            sign * f
        })
        .sum()
}

/// Stabilizer fidelity from mixed joint frequencies of the three stabilizer
/// settings. Returns `(fidelity, kept fraction)`.
pub fn fidelity_from_joint_counts(
    per_setting: &[Vec<f64>],
    post_selection: Option<PostSelection>,
) -> Result<(f64, f64)> {
    if per_setting.len() != STABILIZER_SETTINGS.len() {
        return Err(Error::input("expected XX, YY and ZZ data"));
    }
    let mut expectations = [0.0; 3];
    let mut kept = 0.0;
    for (slot, joint) in expectations.iter_mut().zip(per_setting) {
        let (path, k) = path_distribution(joint, post_selection)?;
        *slot = parity_expectation(&path).clamp(-1.0, 1.0);
        kept = k;
    }
    Ok((stabilizer_fidelity(expectations[0], expectations[1], expectations[2])?, kept))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub p: f64,
    pub fidelity: f64,
    /// Fraction of events kept by post-selection (1 without distillation).
    pub success_probability: f64,
}

/// Stabilizer-fidelity sweep over bit-flip probability, mixing the four
/// scenarios at the level of normalized detection frequencies.
pub fn distill_sweep(resource: &DensityMatrix, p_grid: &[f64], with_distillation: bool) -> Result<Vec<SweepPoint>> {
    distill_sweep_with(resource, p_grid, with_distillation, &DistillOptions::default())
}

pub fn distill_sweep_with(
    resource: &DensityMatrix,
    p_grid: &[f64],
    with_distillation: bool,
    opts: &DistillOptions,
) -> Result<Vec<SweepPoint>> {
    if let Some(bad) = p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::input(format!("bit-flip probability {bad} is outside [0, 1]")));
    }
    let counts = stabilizer_scenario_counts(resource, with_distillation, opts)?;
    let rule = with_distillation.then_some(opts.post_selection);
    p_grid
        .iter()
        .map(|&p| {
            let mixed = scale_counts(&counts, p)?;
            let (fidelity, kept) = fidelity_from_joint_counts(&mixed, rule)?;
            Ok(SweepPoint { p, fidelity, success_probability: kept })
        })
        .collect()
}

/// Density-matrix route to the same quantity: mix the scenario states with
/// the flip weights, then post-select (or trace out the modes) and take the
/// fidelity of the path pair with `Φ⁺`. Returns `(fidelity, success)`.
pub fn density_level_fidelity(
    resource: &DensityMatrix,
    p: f64,
    with_distillation: bool,
    opts: &DistillOptions,
) -> Result<(f64, f64)> {
    let path = density_level_path_state(resource, p, with_distillation, opts)?;
    Ok((fidelity_pure(&path.0, &bell_state(BellKind::PhiPlus))?, path.1))
}

fn density_level_path_state(
    resource: &DensityMatrix,
    p: f64,
    with_distillation: bool,
    opts: &DistillOptions,
) -> Result<(DensityMatrix, f64)> {
    let w = flip_weights(p)?;
    let states = FlipScenario::ALL
        .iter()
        .map(|&s| Ok((s.weight(&w), scenario_state(resource, s, with_distillation, opts)?)))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<(f64, &DensityMatrix)> = states.iter().map(|(w, r)| (*w, r)).collect();
    let mixed = DensityMatrix::mixture(&refs)?;
    if with_distillation {
        postselect_mode(&mixed, opts.post_selection)
    } else {
        Ok((partial_trace(&mixed, &QUBIT_DIMS, &[PATH_SIGNAL, PATH_IDLER])?, 1.0))
    }
}

/// One row of the distillation table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistillationRow {
    pub p: f64,
    pub fidelity_no_distill: f64,
    pub fidelity_distill: f64,
    pub success_probability: f64,
}

pub fn distillation_table(resource: &DensityMatrix, p_grid: &[f64], opts: &DistillOptions) -> Result<Vec<DistillationRow>> {
    let plain = distill_sweep_with(resource, p_grid, false, opts)?;
    let distilled = distill_sweep_with(resource, p_grid, true, opts)?;
    Ok(plain
        .iter()
        .zip(&distilled)
        .map(|(a, b)| DistillationRow {
            p: a.p,
            fidelity_no_distill: a.fidelity,
            fidelity_distill: b.fidelity,
            success_probability: b.success_probability,
        })
        .collect())
}

pub const SWEEP_CSV_HEADER: &str = "p,fidelity_no_distill,fidelity_distill,success_probability";

/// Writes `p,fidelity_no_distill,fidelity_distill,success_probability` rows.
pub fn write_sweep_csv<W: Write>(writer: W, rows: &[DistillationRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Average of `fidelity_distill − fidelity_no_distill` over the span of `p`
/// covered by `rows` (sorted by `p`): the trapezoidal integral of the gain
/// divided by the span length. A single row gives its own gain.
pub fn mean_gain(rows: &[DistillationRow]) -> f64 {
    let gain = |r: &DistillationRow| r.fidelity_distill - r.fidelity_no_distill;
    match rows {
        [] => 0.0,
        [only] => gain(only),
        [first, .., last] => {
            let area: f64 = rows.windows(2).map(|w| 0.5 * (w[1].p - w[0].p) * (gain(&w[0]) + gain(&w[1]))).sum();
            area / (last.p - first.p)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MleSweepStatus {
    Converged,
    /// The iteration limit was hit.
    NotConverged,
    /// `p > 0.5`: the target Bell state no longer dominates, reported as a
    /// non-convergent point rather than reconstructed.
    TargetNotDominant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleSweepPoint {
    pub p: f64,
    pub fidelity: Option<f64>,
    pub success_probability: f64,
    pub status: MleSweepStatus,
}

/// Finite-statistics variant of the tomography sweep: Poisson counts with
/// `shots` events per setting, seeded per grid point as `seed + index`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledShots {
    pub shots: u64,
    pub seed: u64,
}

/// Path-pair state tomography on the mixed data, reconstructed by MLE from
/// the nine two-qubit Pauli settings. Points with `p > 0.5` are not
/// reconstructed.
pub fn mle_sweep(
    resource: &DensityMatrix,
    p_grid: &[f64],
    with_distillation: bool,
    sampling: Option<SampledShots>,
    opts: &DistillOptions,
    mle: &MleOptions,
) -> Result<Vec<MleSweepPoint>> {
    let path_settings = complete_pauli_set(2)?;
    let labels: Vec<String> = path_settings.iter().map(|s| s.id().to_string()).collect();
    let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    let counts = scenario_counts_for(resource, &label_refs, with_distillation, opts)?;
    let rule = with_distillation.then_some(opts.post_selection);
    let target = bell_state(BellKind::PhiPlus);
    let mut out = Vec::with_capacity(p_grid.len());
    for (index, &p) in p_grid.iter().enumerate() {
        let mixed = scale_counts(&counts, p)?;
        if p > 0.5 {
            out.push(MleSweepPoint { p, fidelity: None, success_probability: f64::NAN, status: MleSweepStatus::TargetNotDominant });
            continue;
        }
        let mut dists = Vec::with_capacity(mixed.len());
        let mut kept = 1.0;
        for joint in &mixed {
            let (dist, k) = path_distribution(joint, rule)?;
            dists.push(dist);
            kept = k;
        }
        let records = match sampling {
            None => {
                const EXACT_SHOTS: u64 = 10_000_000;
                path_settings
                    .iter()
                    .zip(&dists)
                    .flat_map(|(s, dist)| {
                        dist.iter().enumerate().map(move |(k, f)| CountRecord {
                            setting_id: s.id().to_string(),
                            outcome_index: k,
                            counts: (f * EXACT_SHOTS as f64).round() as u64,
                            shots: EXACT_SHOTS,
                        })
                    })
                    .collect::<Vec<_>>()
            }
            Some(SampledShots { shots, seed }) => {
                // the mixed path distributions define a state only through their
                // frequencies; sample each setting's outcomes directly
                let mut recs = Vec::new();
                for (si, (s, dist)) in path_settings.iter().zip(&dists).enumerate() {
                    let single = crate::tomography::MeasurementSetting::new(
                        s.id(),
                        (0..4).map(|k| Projector::from_state(&StateVector::basis(4, k).expect("k < 4"))).collect(),
                        None,
                    )?;
                    let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(4, dist.iter().map(|&f| c(f, 0.0))));
                    let rho = DensityMatrix::from_numerical(diag)?;
                    let point_seed = seed.wrapping_add((index * path_settings.len() + si) as u64);
                    recs.extend(simulate_counts(&rho, &[single], shots, point_seed)?);
                }
                recs
            }
        };
        let rec = mle_reconstruct(&records, &path_settings, mle)?;
        let status = if rec.converged { MleSweepStatus::Converged } else { MleSweepStatus::NotConverged };
        out.push(MleSweepPoint {
            p,
            fidelity: Some(fidelity_pure(&rec.state, &target)?),
            success_probability: kept,
            status,
        });
    }
    Ok(out)
}

/// Reduced path-pair and mode-pair states of a two-photon state.
pub fn dof_pairs(rho: &DensityMatrix) -> Result<(DensityMatrix, DensityMatrix)> {
    Ok((
        partial_trace(rho, &QUBIT_DIMS, &[PATH_SIGNAL, PATH_IDLER])?,
        partial_trace(rho, &QUBIT_DIMS, &[MODE_SIGNAL, MODE_IDLER])?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{hyperentangled_state, mix_with_white_noise, mode_path_product};

    fn he() -> DensityMatrix {
        hyperentangled_state().to_density()
    }

    #[test]
    fn cnot_is_a_unitary_involution() {
        let u = local_cnot();
        assert!((&u * u.adjoint() - CMatrix::identity(16, 16)).camax() < 1e-12);
        assert!((&u * &u - CMatrix::identity(16, 16)).camax() < 1e-12);
    }

    #[test]
    fn flip_weight_values() {
        let w = flip_weights(0.0).unwrap();
        assert_eq!((w.none, w.one, w.both), (1.0, 0.0, 0.0));
        let w = flip_weights(0.5).unwrap();
        assert_eq!((w.none, w.one, w.both), (0.25, 0.25, 0.25));
        let w = flip_weights(0.2).unwrap();
        assert!((w.none - 0.64).abs() < 1e-15 && (w.one - 0.16).abs() < 1e-15 && (w.both - 0.04).abs() < 1e-15);
        assert!(flip_weights(-0.1).is_err() && flip_weights(1.1).is_err());
    }

    fn counts_from(vals: [[f64; 2]; 4]) -> ScenarioCounts {
        let mut data = BTreeMap::new();
        for (s, v) in FlipScenario::ALL.iter().zip(vals) {
            data.insert(*s, vec![v.to_vec()]);
        }
        ScenarioCounts::new(data).unwrap()
    }

    #[test]
    fn scale_counts_limits() {
        let sc = counts_from([[1.0, 0.0], [0.7, 0.3], [0.4, 0.6], [0.0, 1.0]]);
        assert_eq!(scale_counts(&sc, 0.0).unwrap(), vec![vec![1.0, 0.0]]);
        assert_eq!(scale_counts(&sc, 1.0).unwrap(), vec![vec![0.0, 1.0]]);
        let same = counts_from([[0.3, 0.7]; 4]);
        for p in [0.0, 0.13, 0.5, 0.9] {
            let out = scale_counts(&same, p).unwrap();
            assert!((out[0][0] - 0.3).abs() < 1e-15 && (out[0][1] - 0.7).abs() < 1e-15);
        }
        let mid = scale_counts(&sc, 0.37).unwrap();
        assert!((mid[0].iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn scale_counts_requires_all_scenarios() {
        let mut data = BTreeMap::new();
        data.insert(FlipScenario::NONE, vec![vec![1.0]]);
        let sc = ScenarioCounts::new(data).unwrap();
        assert!(scale_counts(&sc, 0.1).is_err());
    }

    #[test]
    fn scenario_counts_validation() {
        let mut data = BTreeMap::new();
        data.insert(FlipScenario::NONE, vec![vec![0.5, 0.6]]);
        assert!(ScenarioCounts::new(data).is_err());
    }

    #[test]
    fn chip_ordering_swap_exchanges_path_and_both() {
        let sc = counts_from([[1.0, 0.0], [0.7, 0.3], [0.4, 0.6], [0.0, 1.0]]).with_chip_ordering_swapped();
        assert_eq!(sc.get(FlipScenario::PATH).unwrap()[0], vec![0.0, 1.0]);
        assert_eq!(sc.get(FlipScenario::BOTH).unwrap()[0], vec![0.7, 0.3]);
    }

    #[test]
    fn stabilizer_fidelity_values() {
        assert_eq!(stabilizer_fidelity(1.0, -1.0, 1.0).unwrap(), 1.0);
        assert_eq!(stabilizer_fidelity(0.0, 0.0, 0.0).unwrap(), 0.25);
        assert_eq!(stabilizer_fidelity(1.0, 1.0, -1.0).unwrap(), 0.0);
        assert!(stabilizer_fidelity(1.2, 0.0, 0.0).is_err());
    }

    #[test]
    fn postselection_cases() {
        let cnot = local_cnot();
        let phi = bell_state(BellKind::PhiPlus);
        let psi = bell_state(BellKind::PsiPlus);

        let (path, success) = postselect_mode_correlated(&he().conjugate_by(&cnot).unwrap()).unwrap();
        assert!((success - 1.0).abs() < 1e-12);
        assert!((fidelity_pure(&path, &phi).unwrap() - 1.0).abs() < 1e-12);

        let mode_flipped = apply_bit_flip(&he(), DofAddress::new(Photon::Idler, Dof::Mode)).unwrap();
        assert!(matches!(
            postselect_mode_correlated(&mode_flipped.conjugate_by(&cnot).unwrap()),
            Err(Error::DegeneratePostSelection(_))
        ));

        let both = scenario_state(&he(), FlipScenario::BOTH, true, &DistillOptions::default()).unwrap();
        let (path, success) = postselect_mode_correlated(&both).unwrap();
        assert!((success - 1.0).abs() < 1e-12);
        assert!((fidelity_pure(&path, &psi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complementary_postselections_sum_to_one() {
        let rho = mix_with_white_noise(&he(), 0.4).unwrap();
        let rho = apply_bit_flip(&rho, DofAddress::new(Photon::Signal, Dof::Path)).unwrap();
        let (_, a) = postselect_mode(&rho, PostSelection::ModeCorrelated).unwrap();
        let (_, b) = postselect_mode(&rho, PostSelection::ModeAnticorrelated).unwrap();
        assert!((a + b - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mode_flip_row_of_truth_table() {
        let flipped = apply_bit_flip(&he(), DofAddress::new(Photon::Idler, Dof::Mode)).unwrap();
        let out = flipped.conjugate_by(&local_cnot()).unwrap();
        let (path, mode) = dof_pairs(&out).unwrap();
        assert!((fidelity_pure(&path, &bell_state(BellKind::PhiPlus)).unwrap() - 1.0).abs() < 1e-12);
        assert!((fidelity_pure(&mode, &bell_state(BellKind::PsiPlus)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_special_points() {
        let rows = distillation_table(&he(), &[0.0, 0.2, 0.5], &DistillOptions::default()).unwrap();
        assert!((rows[0].fidelity_no_distill - 1.0).abs() < 1e-12 && (rows[0].fidelity_distill - 1.0).abs() < 1e-12);
        assert!((rows[1].fidelity_no_distill - 0.8).abs() < 1e-12);
        assert!((rows[1].fidelity_distill - 0.64 / 0.68).abs() < 1e-12);
        assert!((rows[1].success_probability - 0.68).abs() < 1e-12);
        assert!((rows[2].fidelity_no_distill - 0.5).abs() < 1e-12 && (rows[2].fidelity_distill - 0.5).abs() < 1e-12);
    }

    #[test]
    fn counts_route_matches_density_route() {
        let noisy = mix_with_white_noise(&he(), 0.8).unwrap();
        for with in [false, true] {
            let sweep = distill_sweep(&noisy, &[0.0, 0.1, 0.3, 0.45, 0.8], with).unwrap();
            for pt in sweep {
                let (f, s) = density_level_fidelity(&noisy, pt.p, with, &DistillOptions::default()).unwrap();
                assert!((pt.fidelity - f).abs() < 1e-9 && (pt.success_probability - s).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sweep_rejects_out_of_range_probability() {
        assert!(distill_sweep(&he(), &[0.1, 1.5], true).is_err());
    }

    #[test]
    fn mle_sweep_tracks_stabilizer_sweep_and_flags_high_p() {
        let grid = [0.0, 0.2, 0.5, 0.7];
        let points = mle_sweep(&he(), &grid, true, None, &DistillOptions::default(), &MleOptions::default()).unwrap();
        assert!((points[0].fidelity.unwrap() - 1.0).abs() < 1e-3);
        assert!((points[1].fidelity.unwrap() - 0.64 / 0.68).abs() < 1e-3);
        assert_eq!(points[3].status, MleSweepStatus::TargetNotDominant);
        assert!(points[3].fidelity.is_none());
        let sampled = mle_sweep(
            &he(),
            &[0.2],
            false,
            Some(SampledShots { shots: 100_000, seed: 4 }),
            &DistillOptions::default(),
            &MleOptions::default(),
        )
        .unwrap();
        assert!((sampled[0].fidelity.unwrap() - 0.8).abs() < 0.02);
    }

    #[test]
    fn signal_photon_flips_give_the_same_curves() {
        let opts = DistillOptions { flipped_photon: Photon::Signal, ..DistillOptions::default() };
        let a = distillation_table(&he(), &[0.3], &opts).unwrap();
        let b = distillation_table(&he(), &[0.3], &DistillOptions::default()).unwrap();
        assert!((a[0].fidelity_distill - b[0].fidelity_distill).abs() < 1e-12);
    }

    #[test]
    fn table_rows_serialize_with_expected_header() {
        let rows = distillation_table(&he(), &[0.0], &DistillOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with(SWEEP_CSV_HEADER));
    }

    #[test]
    fn path_and_mode_product_helper() {
        let phi = bell_state(BellKind::PhiPlus);
        assert!(mode_path_product(&phi, &phi).is_ok());
    }
}
