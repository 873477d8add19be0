//! Dimension-generic quantum-information primitives.

mod entropy;
mod operator;
mod ops;
mod pauli;
mod state;

pub use entropy::{average_entropy, entanglement_entropy, single_qubit_bipartitions, von_neumann_entropy};
pub use operator::{DensityMatrix, ObservableOperator, Projector};
pub use ops::{born_probability, fidelity_pure, kron, partial_trace, trace_distance};
pub use pauli::{pauli_eigenstate, pauli_matrix, pauli_string, Pauli};
pub use state::StateVector;

pub use num_complex::Complex64;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<Complex64>;

/// Tolerance for the Hermiticity, trace, normalization and eigenvalue-floor
/// checks on states and operators.
pub const TOLERANCE: f64 = 1e-10;

/// Band around 0 and 1 within which probabilities are snapped into `[0, 1]`.
pub const PROBABILITY_CLAMP: f64 = 1e-12;

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub(crate) fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Largest absolute deviation of `m` from its conjugate transpose.
pub(crate) fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues (ascending) of a Hermitian matrix. Only the lower triangle is
/// trusted, so callers symmetrize first when in doubt.
pub(crate) fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut eig: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    eig
}

pub(crate) fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub(crate) fn trace_re(m: &CMatrix) -> f64 {
    m.trace().re
}

/// `Tr(a · b)` without forming the product.
pub(crate) fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}
