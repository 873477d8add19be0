use nalgebra::DVector;

use super::{c, CMatrix, Complex64, DensityMatrix, TOLERANCE};
use crate::error::{Error, Result};

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized to within `1e-10`.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::input("state vector must have at least one amplitude"));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::input("state vector has non-finite amplitudes"));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > TOLERANCE {
            return Err(Error::input(format!("state vector norm is {norm}, expected 1")));
        }
        Ok(Self { amplitudes: DVector::from_vec(amplitudes) })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::DegenerateState("cannot normalize a zero vector".into()));
        }
        let scale = c(1.0 / norm, 0.0);
        Self::new(amplitudes.into_iter().map(|a| a * scale).collect())
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(amplitudes.iter().map(|&a| c(a, 0.0)).collect())
    }

    /// Computational basis state `|index⟩` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::input(format!("basis index {index} out of range for dimension {dim}")));
        }
        let mut amps = vec![c(0.0, 0.0); dim];
        amps[index] = c(1.0, 0.0);
        Self::new(amps)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::input(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Kronecker product; `self` occupies the most significant index positions.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        StateVector { amplitudes: self.amplitudes.kronecker(&other.amplitudes) }
    }

    /// `|ψ⟩⟨ψ|` as a raw matrix.
    pub fn outer(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    /// Applies a unitary. The result is renormalized to absorb rounding.
    pub fn evolve(&self, unitary: &CMatrix) -> Result<StateVector> {
        if unitary.nrows() != self.dim() || unitary.ncols() != self.dim() {
            return Err(Error::input("unitary dimension does not match state"));
        }
        let out = unitary * &self.amplitudes;
        StateVector::normalized(out.iter().copied().collect())
    }

    /// True when the two states agree amplitude-by-amplitude within `tol`
    /// after removing a global phase.
    pub fn equal_up_to_phase(&self, other: &StateVector, tol: f64) -> bool {
        let Ok(overlap) = self.inner(other) else {
            return false;
        };
        if overlap.norm() < 0.5 {
            return false;
        }
        // ⟨self|other⟩ = e^{iθ} when other = e^{iθ} self
        let phase = overlap / overlap.norm();
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .all(|(a, b)| (a * phase - b).norm() <= tol)
    }
}
