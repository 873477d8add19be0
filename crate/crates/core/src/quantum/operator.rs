use super::{
    c, hermitian_eigenvalues, hermiticity_defect, identity, symmetrize, trace_of_product, trace_re, CMatrix,
    StateVector, TOLERANCE,
};
use crate::error::{Error, Result};

fn check_square(m: &CMatrix, what: &str) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::input(format!("{what} must be a non-empty square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::input(format!("{what} has non-finite entries")));
    }
    Ok(())
}

/// Hermitian, positive-semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and eigenvalue floor, all at `1e-10`.
    pub fn new(entries: CMatrix) -> Result<Self> {
        check_square(&entries, "density matrix")?;
        let defect = hermiticity_defect(&entries);
        if defect > TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian (max deviation {defect:e})")));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > TOLERANCE || tr.im.abs() > TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("trace is {tr}, expected 1")));
        }
        let min_eig = hermitian_eigenvalues(&entries)[0];
        if min_eig < -TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { entries })
    }

    /// Symmetrizes and trace-normalizes a matrix that is positive up to
    /// rounding, then validates it. Used for outputs of numerical routines.
    pub(crate) fn from_numerical(m: CMatrix) -> Result<Self> {
        let h = symmetrize(&m);
        let tr = trace_re(&h);
        if !(tr > 0.0) {
            return Err(Error::DegenerateState(format!("matrix trace {tr} is not positive")));
        }
        Self::new(h * c(1.0 / tr, 0.0))
    }

    pub fn from_pure(state: &StateVector) -> Self {
        Self { entries: state.outer() }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { entries: identity(dim) * c(1.0 / dim as f64, 0.0) }
    }

    /// Convex combination `Σ w_k ρ_k`; weights must be non-negative and sum to 1.
    pub fn mixture(components: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = components.first().ok_or_else(|| Error::input("empty mixture"))?;
        let dim = first.1.dim();
        let mut total = 0.0;
        let mut acc = CMatrix::zeros(dim, dim);
        for (w, rho) in components {
            if *w < 0.0 || !w.is_finite() {
                return Err(Error::input(format!("mixture weight {w} is not a probability")));
            }
            if rho.dim() != dim {
                return Err(Error::input("mixture components have different dimensions"));
            }
            total += w;
            acc += &rho.entries * c(*w, 0.0);
        }
        if (total - 1.0).abs() > TOLERANCE {
            return Err(Error::input(format!("mixture weights sum to {total}, expected 1")));
        }
        Self::from_numerical(acc)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.entries)
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        trace_of_product(&self.entries, &self.entries).re
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, unitary: &CMatrix) -> Result<Self> {
        if unitary.nrows() != self.dim() || unitary.ncols() != self.dim() {
            return Err(Error::input(format!(
                "operator is {}x{}, state has dimension {}",
                unitary.nrows(),
                unitary.ncols(),
                self.dim()
            )));
        }
        Self::from_numerical(unitary * &self.entries * unitary.adjoint())
    }

    /// Kronecker product; `self` occupies the most significant index positions.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix { entries: self.entries.kronecker(&other.entries) }
    }
}

/// Hermitian operator with an optional human-readable label such as a Pauli
/// string.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableOperator {
    entries: CMatrix,
    label: Option<String>,
}

impl ObservableOperator {
    pub fn new(entries: CMatrix, label: Option<String>) -> Result<Self> {
        check_square(&entries, "observable")?;
        let defect = hermiticity_defect(&entries);
        if defect > TOLERANCE {
            return Err(Error::input(format!("observable is not Hermitian (max deviation {defect:e})")));
        }
        Ok(Self { entries, label })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// `Tr(O ρ)`.
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.dim() != self.dim() {
            return Err(Error::input(format!(
                "observable dimension {} does not match state dimension {}",
                self.dim(),
                rho.dim()
            )));
        }
        Ok(trace_of_product(&self.entries, rho.entries()).re)
    }

    pub fn scaled(&self, factor: f64) -> ObservableOperator {
        let label = self.label.as_ref().map(|l| if factor < 0.0 { format!("-{l}") } else { l.clone() });
        ObservableOperator { entries: &self.entries * c(factor, 0.0), label }
    }

    pub fn tensor(&self, other: &ObservableOperator) -> ObservableOperator {
        let label = match (&self.label, &other.label) {
            (Some(a), Some(b)) => Some(format!("{a}{b}")),
            _ => None,
        };
        ObservableOperator { entries: self.entries.kronecker(&other.entries), label }
    }
}

/// Positive operator bounded by the identity; one measurement outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    entries: CMatrix,
}

impl Projector {
    /// Accepts any Hermitian operator with spectrum in `[0, 1]` (within `1e-10`).
    pub fn new(entries: CMatrix) -> Result<Self> {
        check_square(&entries, "projector")?;
        let defect = hermiticity_defect(&entries);
        if defect > TOLERANCE {
            return Err(Error::input(format!("projector is not Hermitian (max deviation {defect:e})")));
        }
        let eig = hermitian_eigenvalues(&entries);
        if eig[0] < -TOLERANCE || eig[eig.len() - 1] > 1.0 + TOLERANCE {
            return Err(Error::input(format!(
                "projector spectrum [{:e}, {}] is outside [0, 1]",
                eig[0],
                eig[eig.len() - 1]
            )));
        }
        Ok(Self { entries })
    }

    /// Rank-one projector `|ψ⟩⟨ψ|`.
    pub fn from_state(state: &StateVector) -> Self {
        Self { entries: state.outer() }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// `Tr(Π)`.
    pub fn rank_weight(&self) -> f64 {
        trace_re(&self.entries)
    }

    /// `U Π U†`; `unitary` must be unitary for the result to stay a projector.
    pub fn rotated(&self, unitary: &CMatrix) -> Result<Projector> {
        Projector::new(symmetrize(&(unitary * &self.entries * unitary.adjoint())))
    }

    pub fn tensor(&self, other: &Projector) -> Projector {
        Projector { entries: self.entries.kronecker(&other.entries) }
    }
}
