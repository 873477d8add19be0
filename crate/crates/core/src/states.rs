//! Canonical target states and the error channels applied to them.
//!
//! Two-photon states are 16-dimensional in the crate-wide ordering
//! `8·mode_signal + 4·mode_idler + 2·path_signal + path_idler`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{c, identity, kron, pauli_matrix, CMatrix, DensityMatrix, Pauli, StateVector};

/// Dimension of the two-photon, four-qubit space.
pub const TWO_PHOTON_DIM: usize = 16;

/// Qubit dimensions in the crate-wide ordering.
pub const QUBIT_DIMS: [usize; 4] = [2, 2, 2, 2];

pub const MODE_SIGNAL: usize = 0;
pub const MODE_IDLER: usize = 1;
pub const PATH_SIGNAL: usize = 2;
pub const PATH_IDLER: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Photon {
    Signal,
    Idler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dof {
    Path,
    Mode,
}

/// One qubit of the pair: a photon and one of its degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DofAddress {
    pub photon: Photon,
    pub dof: Dof,
}

impl DofAddress {
    pub fn new(photon: Photon, dof: Dof) -> Self {
        Self { photon, dof }
    }

    /// Position of this qubit in the crate-wide ordering (0 = most significant).
    pub fn qubit(self) -> usize {
        match (self.dof, self.photon) {
            (Dof::Mode, Photon::Signal) => MODE_SIGNAL,
            (Dof::Mode, Photon::Idler) => MODE_IDLER,
            (Dof::Path, Photon::Signal) => PATH_SIGNAL,
            (Dof::Path, Photon::Idler) => PATH_IDLER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus, BellKind::PsiMinus];
}

/// Two-qubit Bell state.
pub fn bell_state(kind: BellKind) -> StateVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amps = match kind {
        BellKind::PhiPlus => [s, 0.0, 0.0, s],
        BellKind::PhiMinus => [s, 0.0, 0.0, -s],
        BellKind::PsiPlus => [0.0, s, s, 0.0],
        BellKind::PsiMinus => [0.0, s, -s, 0.0],
    };
    StateVector::new(amps.iter().map(|&a| c(a, 0.0)).collect()).expect("Bell states are normalized")
}

/// Basis index of `|mode_s mode_i⟩|path_s path_i⟩`.
pub fn basis_index(mode_signal: usize, mode_idler: usize, path_signal: usize, path_idler: usize) -> usize {
    8 * mode_signal + 4 * mode_idler + 2 * path_signal + path_idler
}

/// `(|TE0 TE0⟩|00⟩ + |TE1 TE1⟩|11⟩)/√2`; the relative phase between the
/// branches is fixed at zero.
pub fn ghz4_state() -> StateVector {
    let mut amps = vec![c(0.0, 0.0); TWO_PHOTON_DIM];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    amps[basis_index(0, 0, 0, 0)] = c(s, 0.0);
    amps[basis_index(1, 1, 1, 1)] = c(s, 0.0);
    StateVector::new(amps).expect("normalized by construction")
}

/// `(|TE0 TE0⟩ + |TE1 TE1⟩) ⊗ (|00⟩ + |11⟩) / 2`.
pub fn hyperentangled_state() -> StateVector {
    let mut amps = vec![c(0.0, 0.0); TWO_PHOTON_DIM];
    for m in 0..2 {
        for p in 0..2 {
            amps[basis_index(m, m, p, p)] = c(0.5, 0.0);
        }
    }
    StateVector::new(amps).expect("normalized by construction")
}

/// Joins a mode-pair state and a path-pair state into the two-photon space.
pub fn mode_path_product(mode_pair: &StateVector, path_pair: &StateVector) -> Result<StateVector> {
    if mode_pair.dim() != 4 || path_pair.dim() != 4 {
        return Err(Error::input("mode and path pair states must both be two-qubit states"));
    }
    Ok(mode_pair.tensor(path_pair))
}

/// Pauli `p` acting on one qubit of the four, identity elsewhere.
pub fn single_qubit_operator(p: Pauli, qubit: usize) -> CMatrix {
    let mut m = CMatrix::identity(1, 1);
    for q in 0..QUBIT_DIMS.len() {
        let factor = if q == qubit { pauli_matrix(p) } else { identity(2) };
        m = kron(&m, &factor);
    }
    m
}

fn require_two_photon(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != TWO_PHOTON_DIM {
        return Err(Error::input(format!("expected a 16-dimensional two-photon state, got dimension {}", rho.dim())));
    }
    Ok(())
}

/// Conjugates `rho` by Pauli X on the addressed qubit.
pub fn apply_bit_flip(rho: &DensityMatrix, target: DofAddress) -> Result<DensityMatrix> {
    require_two_photon(rho)?;
    rho.conjugate_by(&single_qubit_operator(Pauli::X, target.qubit()))
}

/// `λ ρ + (1 − λ) I/d`.
pub fn mix_with_white_noise(rho: &DensityMatrix, lambda: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::input(format!("noise weight λ = {lambda} is outside [0, 1]")));
    }
    let d = rho.dim();
    let m = rho.entries() * c(lambda, 0.0) + identity(d) * c((1.0 - lambda) / d as f64, 0.0);
    DensityMatrix::from_numerical(m)
}

/// The λ for which `mix_with_white_noise(|ψ⟩⟨ψ|, λ)` has fidelity `target`
/// with `|ψ⟩` in dimension `dim`: `λ = (F − 1/d)/(1 − 1/d)`.
pub fn white_noise_weight_for_fidelity(target: f64, dim: usize) -> Result<f64> {
    let floor = 1.0 / dim as f64;
    if !(floor..=1.0).contains(&target) {
        return Err(Error::input(format!("fidelity {target} is unreachable with white noise in dimension {dim}")));
    }
    Ok((target - floor) / (1.0 - floor))
}

/// Named states addressable from configuration files and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedState {
    Ghz4,
    Hyper,
    Bell(BellKind),
}

impl NamedState {
    pub fn state_vector(self) -> StateVector {
        match self {
            NamedState::Ghz4 => ghz4_state(),
            NamedState::Hyper => hyperentangled_state(),
            NamedState::Bell(kind) => bell_state(kind),
        }
    }

    /// Qubit dimensions of the named state.
    pub fn subsystem_dims(self) -> Vec<usize> {
        match self {
            NamedState::Bell(_) => vec![2, 2],
            _ => QUBIT_DIMS.to_vec(),
        }
    }
}

impl FromStr for NamedState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ghz4" => NamedState::Ghz4,
            "hyper" => NamedState::Hyper,
            "bell-phi-plus" => NamedState::Bell(BellKind::PhiPlus),
            "bell-phi-minus" => NamedState::Bell(BellKind::PhiMinus),
            "bell-psi-plus" => NamedState::Bell(BellKind::PsiPlus),
            "bell-psi-minus" => NamedState::Bell(BellKind::PsiMinus),
            other => return Err(Error::input(format!("unknown state name {other:?}"))),
        })
    }
}

impl fmt::Display for NamedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            NamedState::Ghz4 => "ghz4",
            NamedState::Hyper => "hyper",
            NamedState::Bell(BellKind::PhiPlus) => "bell-phi-plus",
            NamedState::Bell(BellKind::PhiMinus) => "bell-phi-minus",
            NamedState::Bell(BellKind::PsiPlus) => "bell-psi-plus",
            NamedState::Bell(BellKind::PsiMinus) => "bell-psi-minus",
        };
        f.write_str(name)
    }
}
