use super::{partial_trace, DensityMatrix, TOLERANCE};
use crate::error::{Error, Result};

/// `−Tr(ρ log_base ρ)` with `0·log 0 = 0`. Eigenvalues in `[−1e-10, 0)` are
/// treated as zero; anything more negative is rejected.
pub fn von_neumann_entropy(rho: &DensityMatrix, base: f64) -> Result<f64> {
    if !(base > 1.0) || !base.is_finite() {
        return Err(Error::input(format!("logarithm base must exceed 1, got {base}")));
    }
    let ln_base = base.ln();
    let mut s = 0.0;
    for lambda in rho.eigenvalues() {
        if lambda < -TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {lambda:e}")));
        }
        if lambda > 0.0 {
            s -= lambda * lambda.ln() / ln_base;
        }
    }
    Ok(s.max(0.0))
}

/// Entropy of the reduced state on `partition` (one side of a bipartition).
pub fn entanglement_entropy(
    rho: &DensityMatrix,
    subsystem_dims: &[usize],
    partition: &[usize],
    base: f64,
) -> Result<f64> {
    if partition.is_empty() || partition.len() >= subsystem_dims.len() {
        return Err(Error::input(format!(
            "partition {partition:?} does not split {} subsystems into two non-empty groups",
            subsystem_dims.len()
        )));
    }
    let reduced = partial_trace(rho, subsystem_dims, partition)?;
    von_neumann_entropy(&reduced, base)
}

/// Mean of [`entanglement_entropy`] over several bipartitions.
pub fn average_entropy(
    rho: &DensityMatrix,
    subsystem_dims: &[usize],
    bipartitions: &[Vec<usize>],
    base: f64,
) -> Result<f64> {
    if bipartitions.is_empty() {
        return Err(Error::input("no bipartitions to average over"));
    }
    let mut total = 0.0;
    for part in bipartitions {
        total += entanglement_entropy(rho, subsystem_dims, part, base)?;
    }
    Ok(total / bipartitions.len() as f64)
}

/// `[[0], [1], ..., [n-1]]`: every single-qubit-versus-rest split.
pub fn single_qubit_bipartitions(n_qubits: usize) -> Vec<Vec<usize>> {
    (0..n_qubits).map(|q| vec![q]).collect()
}
