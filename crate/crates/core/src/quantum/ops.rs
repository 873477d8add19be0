use super::{
    hermitian_eigenvalues, trace_of_product, CMatrix, Complex64, DensityMatrix, Projector, StateVector,
    PROBABILITY_CLAMP,
};
use crate::error::{Error, Result};

/// Kronecker product of two matrices; `a` occupies the most significant index
/// positions.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn clamp_probability(p: f64) -> f64 {
    if p < 0.0 && p > -PROBABILITY_CLAMP {
        0.0
    } else if p > 1.0 && p < 1.0 + PROBABILITY_CLAMP {
        1.0
    } else {
        p
    }
}

/// Reduced density matrix over the subsystems in `keep`.
///
/// Kept subsystems appear in ascending index order in the result regardless of
/// the order given in `keep`.
pub fn partial_trace(rho: &DensityMatrix, subsystem_dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    if subsystem_dims.is_empty() || subsystem_dims.iter().any(|&d| d == 0) {
        return Err(Error::input("subsystem dimensions must be positive"));
    }
    let total: usize = subsystem_dims.iter().product();
    if total != rho.dim() {
        return Err(Error::input(format!(
            "subsystem dimensions {subsystem_dims:?} multiply to {total}, state has dimension {}",
            rho.dim()
        )));
    }
    if keep.is_empty() {
        return Err(Error::input("at least one subsystem must be kept"));
    }
    let n = subsystem_dims.len();
    let mut kept = vec![false; n];
    for &k in keep {
        if k >= n {
            return Err(Error::input(format!("subsystem index {k} out of range for {n} subsystems")));
        }
        if kept[k] {
            return Err(Error::input(format!("subsystem index {k} listed twice")));
        }
        kept[k] = true;
    }

    let keep_dims: Vec<usize> = (0..n).filter(|&i| kept[i]).map(|i| subsystem_dims[i]).collect();
    let trace_dims: Vec<usize> = (0..n).filter(|&i| !kept[i]).map(|i| subsystem_dims[i]).collect();
    let dk: usize = keep_dims.iter().product();
    let dt: usize = trace_dims.iter().product();

    // row-major strides of the full index
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * subsystem_dims[i + 1];
    }
    let kept_idx: Vec<usize> = (0..n).filter(|&i| kept[i]).collect();
    let traced_idx: Vec<usize> = (0..n).filter(|&i| !kept[i]).collect();

    let compose = |positions: &[usize], dims: &[usize], mut flat: usize| -> usize {
        let mut offset = 0;
        for (slot, &pos) in positions.iter().enumerate().rev() {
            let digit = flat % dims[slot];
            flat /= dims[slot];
            offset += digit * strides[pos];
        }
        offset
    };
    let kept_offsets: Vec<usize> = (0..dk).map(|a| compose(&kept_idx, &keep_dims, a)).collect();
    let traced_offsets: Vec<usize> = (0..dt).map(|t| compose(&traced_idx, &trace_dims, t)).collect();

    let full = rho.entries();
    let mut out = CMatrix::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = Complex64::new(0.0, 0.0);
            for &t in &traced_offsets {
                acc += full[(kept_offsets[a] + t, kept_offsets[b] + t)];
            }
            out[(a, b)] = acc;
        }
    }
    DensityMatrix::from_numerical(out)
}

/// `Tr(Π ρ)`, snapped into `[0, 1]` when within `1e-12` of either bound.
pub fn born_probability(rho: &DensityMatrix, proj: &Projector) -> Result<f64> {
    if rho.dim() != proj.dim() {
        return Err(Error::input(format!(
            "projector dimension {} does not match state dimension {}",
            proj.dim(),
            rho.dim()
        )));
    }
    Ok(clamp_probability(trace_of_product(proj.entries(), rho.entries()).re))
}

/// `⟨ψ|ρ|ψ⟩` for a pure target.
pub fn fidelity_pure(rho: &DensityMatrix, target: &StateVector) -> Result<f64> {
    if rho.dim() != target.dim() {
        return Err(Error::input(format!(
            "target dimension {} does not match state dimension {}",
            target.dim(),
            rho.dim()
        )));
    }
    let v = target.amplitudes();
    let f = (v.adjoint() * rho.entries() * v)[(0, 0)].re;
    Ok(clamp_probability(f))
}

/// `½ ‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::input("trace distance of states with different dimensions"));
    }
    let diff = rho.entries() - sigma.entries();
    Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|e| e.abs()).sum::<f64>())
}
