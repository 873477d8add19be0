//! Phenomenological model of the chip: how the pump is shared between the
//! four effective sources, the post-selected biphoton state they emit, MZI
//! building blocks, and time-reversed HOM (RHOM) fringes.
//!
//! A source-mode is one spiral pumped in one TE mode. Its index is
//! `2·spiral + te_mode`, so `0 = (spiral 0, TE0)`, `1 = (spiral 0, TE1)`,
//! `2 = (spiral 1, TE0)`, `3 = (spiral 1, TE1)`.
//!
//! The MZI convention is `U(θ, φ) = B · P(θ) · B · P(φ)` with the balanced
//! splitter `B = [[1, i], [i, 1]]/√2` and `P(x) = diag(e^{ix}, 1)`: the
//! internal phase `θ` sits between the splitters on arm 0 and the external
//! phase `φ` precedes the first splitter on arm 0. With this choice `θ = 0`
//! swaps the arms, `θ = π` routes each arm back to itself (arm phases `−1, 1`)
//! and `θ = π/2` is a balanced splitter; `|U₀₀|² = sin²(θ/2)`.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::quantum::{c, hermitian_eigenvalues, CMatrix, Complex64, DensityMatrix, TOLERANCE};
use crate::states::{basis_index, TWO_PHOTON_DIM};

pub const SOURCE_MODES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TeMode {
    Te0,
    Te1,
}

impl TeMode {
    pub fn bit(self) -> usize {
        match self {
            TeMode::Te0 => 0,
            TeMode::Te1 => 1,
        }
    }
}

/// One spiral source pumped in one TE mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SourceMode {
    pub spiral: usize,
    pub mode: TeMode,
}

impl SourceMode {
    pub fn index(self) -> usize {
        2 * self.spiral + self.mode.bit()
    }

    pub fn from_index(index: usize) -> Self {
        let mode = if index % 2 == 0 { TeMode::Te0 } else { TeMode::Te1 };
        Self { spiral: index / 2, mode }
    }
}

/// Pump amplitudes over the four source-modes, normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpConfig {
    amplitudes: [Complex64; SOURCE_MODES],
}

impl PumpConfig {
    pub fn new(amplitudes: [Complex64; SOURCE_MODES]) -> Result<Self> {
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::input("pump amplitudes must be finite"));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > TOLERANCE {
            return Err(Error::input(format!("pump amplitudes have norm {norm}, expected 1")));
        }
        Ok(Self { amplitudes })
    }

    pub fn normalized(amplitudes: [Complex64; SOURCE_MODES]) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::input("pump amplitudes are all zero"));
        }
        Self::new(amplitudes.map(|a| a / norm))
    }

    /// Spiral 0 in TE0 and spiral 1 in TE1, equal weight: prepares the GHZ₄-style state.
    pub fn ghz4() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self { amplitudes: [c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)] }
    }

    /// Both spirals in an equal TE0/TE1 superposition: prepares the hyperentangled state.
    pub fn hyperentangled() -> Self {
        Self { amplitudes: [c(0.5, 0.0); SOURCE_MODES] }
    }

    pub fn amplitudes(&self) -> &[Complex64; SOURCE_MODES] {
        &self.amplitudes
    }

    pub fn amplitude(&self, source: SourceMode) -> Complex64 {
        self.amplitudes[source.index()]
    }

    pub fn with_global_phase(&self, theta: f64) -> Self {
        let phase = Complex64::from_polar(1.0, theta);
        Self { amplitudes: self.amplitudes.map(|a| a * phase) }
    }
}

/// Pairwise indistinguishability of the four source-modes plus optional
/// per-source efficiencies and spurious intermodal generation.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    visibility: [[f64; SOURCE_MODES]; SOURCE_MODES],
    efficiency: [f64; SOURCE_MODES],
    intermodal_weight: f64,
}

impl SourceModel {
    /// Validates `V`: symmetric, unit diagonal, entries in `[0, 1]`, and
    /// positive-semidefinite (otherwise the coherence-scaled biphoton state
    /// could acquire negative eigenvalues).
    pub fn new(visibility: [[f64; SOURCE_MODES]; SOURCE_MODES]) -> Result<Self> {
        for j in 0..SOURCE_MODES {
            if (visibility[j][j] - 1.0).abs() > TOLERANCE {
                return Err(Error::input(format!("visibility diagonal entry {j} is {}, expected 1", visibility[j][j])));
            }
            for k in 0..SOURCE_MODES {
                let v = visibility[j][k];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::input(format!("visibility V[{j}][{k}] = {v} is outside [0, 1]")));
                }
                if (v - visibility[k][j]).abs() > TOLERANCE {
                    return Err(Error::input(format!("visibility matrix is not symmetric at ({j}, {k})")));
                }
            }
        }
        let m = CMatrix::from_fn(SOURCE_MODES, SOURCE_MODES, |j, k| c(visibility[j][k], 0.0));
        let min_eig = hermitian_eigenvalues(&m)[0];
        if min_eig < -TOLERANCE {
            return Err(Error::input(format!(
                "visibility matrix is not positive-semidefinite (eigenvalue {min_eig:e})"
            )));
        }
        Ok(Self { visibility, efficiency: [1.0; SOURCE_MODES], intermodal_weight: 0.0 })
    }

    /// Perfectly indistinguishable sources.
    pub fn ideal() -> Self {
        Self::uniform(1.0).expect("unit visibility is valid")
    }

    /// Every off-diagonal pair shares visibility `v`.
    pub fn uniform(v: f64) -> Result<Self> {
        let mut vis = [[v; SOURCE_MODES]; SOURCE_MODES];
        for (j, row) in vis.iter_mut().enumerate() {
            row[j] = 1.0;
        }
        Self::new(vis)
    }

    /// Relative pair-generation efficiency per source-mode (e.g. extra TE1
    /// loss). Scales pair amplitudes by `√η`.
    pub fn with_efficiency(mut self, efficiency: [f64; SOURCE_MODES]) -> Result<Self> {
        if efficiency.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(Error::input("source efficiencies must lie in [0, 1]"));
        }
        self.efficiency = efficiency;
        Ok(self)
    }

    /// Weight of spurious `|TE0 TE1⟩` / `|TE1 TE0⟩` pairs from a spiral pumped
    /// in both modes, added incoherently. Zero by default.
    pub fn with_intermodal_weight(mut self, weight: f64) -> Result<Self> {
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(Error::input("intermodal weight must be non-negative"));
        }
        self.intermodal_weight = weight;
        Ok(self)
    }

    pub fn visibility(&self, j: usize, k: usize) -> f64 {
        self.visibility[j][k]
    }

    pub fn visibilities(&self) -> &[[f64; SOURCE_MODES]; SOURCE_MODES] {
        &self.visibility
    }

    pub fn efficiency(&self) -> &[f64; SOURCE_MODES] {
        &self.efficiency
    }

    pub fn intermodal_weight(&self) -> f64 {
        self.intermodal_weight
    }
}

/// Post-selected single-pair state emitted by the sources.
///
/// Source-mode `k` with pump amplitude `a_k` emits `a_k² |m m⟩_mode |s s⟩_path`
/// (both photons inherit the spiral as path and the TE mode as mode). The
/// coherence between contributions `j ≠ k` is scaled by `V_jk`.
pub fn biphoton_state(pump: &PumpConfig, src: &SourceModel) -> Result<DensityMatrix> {
    let mut pair_amp = [c(0.0, 0.0); SOURCE_MODES];
    let mut index = [0usize; SOURCE_MODES];
    for k in 0..SOURCE_MODES {
        let sm = SourceMode::from_index(k);
        let a = pump.amplitudes[k];
        pair_amp[k] = a * a * src.efficiency[k].sqrt();
        let m = sm.mode.bit();
        index[k] = basis_index(m, m, sm.spiral, sm.spiral);
    }

    let mut rho = CMatrix::zeros(TWO_PHOTON_DIM, TWO_PHOTON_DIM);
    for j in 0..SOURCE_MODES {
        for k in 0..SOURCE_MODES {
            rho[(index[j], index[k])] += pair_amp[j] * pair_amp[k].conj() * src.visibility[j][k];
        }
    }
    if src.intermodal_weight > 0.0 {
        for spiral in 0..2 {
            let a0 = pump.amplitudes[2 * spiral];
            let a1 = pump.amplitudes[2 * spiral + 1];
            let w = src.intermodal_weight * a0.norm_sqr() * a1.norm_sqr();
            rho[(basis_index(0, 1, spiral, spiral), basis_index(0, 1, spiral, spiral))] += c(w, 0.0);
            rho[(basis_index(1, 0, spiral, spiral), basis_index(1, 0, spiral, spiral))] += c(w, 0.0);
        }
    }

    let total = rho.trace().re;
    if total < 1e-300 {
        return Err(Error::DegenerateState("no source-mode is pumped; no pairs are generated".into()));
    }
    DensityMatrix::from_numerical(rho / c(total, 0.0))
}

/// Transfer matrix of a balanced MZI; see the module docs for the convention.
pub fn mzi_transfer(internal_phase: f64, external_phase: f64) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let splitter = CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(0.0, s), c(0.0, s), c(s, 0.0)]);
    let phase = |x: f64| {
        CMatrix::from_row_slice(2, 2, &[Complex64::from_polar(1.0, x), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
    };
    &splitter * phase(internal_phase) * &splitter * phase(external_phase)
}

/// Phases of a chain of MZIs on one waveguide pair, stored modulo 2π.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferometerSetting {
    phases: Vec<f64>,
}

impl InterferometerSetting {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if let Some(bad) = phases.iter().find(|p| !p.is_finite()) {
            return Err(Error::input(format!("phase {bad} is not finite")));
        }
        Ok(Self { phases: phases.into_iter().map(|p| p.rem_euclid(TAU)).collect() })
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Product of MZIs for consecutive `(internal, external)` phase pairs,
    /// first pair applied first. Requires an even number of phases.
    pub fn transfer(&self) -> Result<CMatrix> {
        if self.phases.len() % 2 != 0 {
            return Err(Error::input("an MZI chain needs (internal, external) phase pairs"));
        }
        Ok(self
            .phases
            .chunks(2)
            .fold(CMatrix::identity(2, 2), |acc, pair| mzi_transfer(pair[0], pair[1]) * acc))
    }
}

/// Ideal two-photon RHOM coincidence probability `cos²φ`.
pub fn rhom_coincidence(phi: f64) -> f64 {
    phi.cos().powi(2)
}

/// Classical output power fraction `cos²(φ/2)` of the same interferometer.
pub fn classical_fringe(phi: f64) -> f64 {
    (phi / 2.0).cos().powi(2)
}

/// RHOM coincidence fringe with reduced visibility: `(1 + V cos 2φ)/2`.
pub fn rhom_fringe_noisy(phi: f64, visibility: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::input(format!("visibility {visibility} is outside [0, 1]")));
    }
    Ok((1.0 + visibility * (2.0 * phi).cos()) / 2.0)
}

/// Fringe contrast `(max − min)/(max + min)`.
pub fn fringe_visibility(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::input("fringe visibility needs at least two samples"));
    }
    if samples.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
        return Err(Error::input("fringe samples must be finite and non-negative"));
    }
    let max = samples.iter().copied().fold(f64::MIN, f64::max);
    let min = samples.iter().copied().fold(f64::MAX, f64::min);
    if max == 0.0 {
        return Err(Error::UndefinedVisibility);
    }
    Ok((max - min) / (max + min))
}

/// Uniform grid of `count` phases over `[start, stop]` inclusive.
pub fn phase_grid(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![start],
        _ => (0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect(),
    }
}

/// Residual sum of squares of the best fit `a + b cos ωx + c sin ωx`.
fn sinusoid_residual(x: &[f64], y: &[f64], omega: f64) -> f64 {
    let mut normal = Matrix3::<f64>::zeros();
    let mut rhs = Vector3::<f64>::zeros();
    for (&xi, &yi) in x.iter().zip(y) {
        let basis = Vector3::new(1.0, (omega * xi).cos(), (omega * xi).sin());
        normal += basis * basis.transpose();
        rhs += basis * yi;
    }
    let coef = match normal.cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => return f64::INFINITY,
    };
    x.iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let model = coef[0] + coef[1] * (omega * xi).cos() + coef[2] * (omega * xi).sin();
            (yi - model).powi(2)
        })
        .sum()
}

/// Angular frequency (radians of fringe phase per radian of applied phase)
/// of the dominant sinusoid in `values(phases)`, by least-squares fitting.
///
/// A coarse scan over `ω` is followed by golden-section refinement of the
/// fit residual. `cos²φ` yields 2 and `cos²(φ/2)` yields 1.
pub fn fit_fringe_frequency(phases: &[f64], values: &[f64]) -> Result<f64> {
    if phases.len() != values.len() || phases.len() < 4 {
        return Err(Error::input("frequency fit needs at least four (phase, value) samples"));
    }
    let span = phases.iter().copied().fold(f64::MIN, f64::max) - phases.iter().copied().fold(f64::MAX, f64::min);
    if !(span > 0.0) {
        return Err(Error::input("phase samples span no range"));
    }
    let nyquist = PI * (phases.len() - 1) as f64 / span;
    let lo = PI / (4.0 * span);
    let hi = nyquist.min(64.0);
    let step = (PI / span) / 50.0;

    let mut best = (f64::INFINITY, lo);
    let mut omega = lo;
    while omega <= hi {
        let r = sinusoid_residual(phases, values, omega);
        if r < best.0 {
            best = (r, omega);
        }
        omega += step;
    }

    let (mut a, mut b) = ((best.1 - step).max(lo * 0.5), best.1 + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = sinusoid_residual(phases, values, x1);
    let mut f2 = sinusoid_residual(phases, values, x2);
    while b - a > 1e-12 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = sinusoid_residual(phases, values, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = sinusoid_residual(phases, values, x2);
        }
    }
    Ok(0.5 * (a + b))
}
