use nalgebra::DMatrix;

use super::{validate_settings, MeasurementSetting};
use crate::error::Result;
use crate::quantum::CMatrix;

/// Coordinates of a Hermitian matrix in an orthonormal basis of the real
/// vector space of `d×d` Hermitian matrices (Hilbert–Schmidt inner product).
fn hermitian_coordinates(m: &CMatrix) -> Vec<f64> {
    let d = m.nrows();
    let mut v = Vec::with_capacity(d * d);
    let s = std::f64::consts::SQRT_2;
    for a in 0..d {
        v.push(m[(a, a)].re);
        for b in (a + 1)..d {
            v.push(s * m[(a, b)].re);
            v.push(s * m[(a, b)].im);
        }
    }
    v
}

/// Real matrix whose rows are the vectorized outcome operators of every setting.
pub fn measurement_matrix(settings: &[MeasurementSetting]) -> Result<DMatrix<f64>> {
    validate_settings(settings)?;
    let rows: Vec<Vec<f64>> = settings
        .iter()
        .flat_map(|s| s.outcomes().iter().map(|o| hermitian_coordinates(o.entries())))
        .collect();
    let cols = rows[0].len();
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// Numerical rank of the measurement matrix: singular values above
/// `max(rows, cols) · ε · σ_max`.
///
/// The count includes the trace direction, so an informationally complete set
/// on dimension `d` has rank `d²` (256 for four qubits, i.e. 255 traceless
/// directions plus the identity).
pub fn measurement_rank(settings: &[MeasurementSetting]) -> Result<usize> {
    let m = measurement_matrix(settings)?;
    let (rows, cols) = m.shape();
    let singular = m.singular_values();
    let max = singular.iter().copied().fold(0.0, f64::max);
    let cutoff = rows.max(cols) as f64 * f64::EPSILON * max;
    Ok(singular.iter().filter(|&&s| s > cutoff).count())
}

/// Dimension of the measurement-matrix null space: the number of directions
/// in state space that the data cannot constrain.
pub fn gauge_freedom(settings: &[MeasurementSetting]) -> Result<usize> {
    let rank = measurement_rank(settings)?;
    let d = settings[0].dim();
    Ok(d * d - rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tomography::{complete_pauli_set, pauli_setting};

    #[test]
    fn single_z_setting_has_rank_two() {
        assert_eq!(measurement_rank(&[pauli_setting("Z").unwrap()]).unwrap(), 2);
    }

    #[test]
    fn complete_two_qubit_set_is_full_rank() {
        let set = complete_pauli_set(2).unwrap();
        assert_eq!(measurement_rank(&set).unwrap(), 16);
        assert_eq!(gauge_freedom(&set).unwrap(), 0);
    }

    #[test]
    fn coordinates_are_an_isometry() {
        let a = pauli_setting("XY").unwrap().outcomes()[1].entries().clone();
        let v = hermitian_coordinates(&a);
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        let hs = crate::quantum::trace_of_product(&a, &a).re;
        assert!((norm2 - hs).abs() < 1e-12);
    }
}
