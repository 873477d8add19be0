use std::fmt;

use super::{c, CMatrix, ObservableOperator, StateVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(ch: char) -> Result<Self> {
        match ch {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::input(format!("invalid Pauli character {other:?}"))),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn parse_string(label: &str) -> Result<Vec<Pauli>> {
        if label.is_empty() {
            return Err(Error::input("Pauli label must be non-empty"));
        }
        label.chars().map(Pauli::from_char).collect()
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

pub fn pauli_matrix(p: Pauli) -> CMatrix {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    match p {
        Pauli::I => CMatrix::from_row_slice(2, 2, &[l, o, o, l]),
        Pauli::X => CMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        Pauli::Y => CMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        Pauli::Z => CMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
    }
}

/// Tensor product of single-qubit Paulis, leftmost character on the most
/// significant qubit.
pub fn pauli_string(label: &str) -> Result<ObservableOperator> {
    let paulis = Pauli::parse_string(label)?;
    let mut m = CMatrix::identity(1, 1);
    for p in paulis {
        m = m.kronecker(&pauli_matrix(p));
    }
    ObservableOperator::new(m, Some(label.to_string()))
}

/// Eigenstate of a single-qubit Pauli with eigenvalue `+1` (`positive`) or `-1`.
pub fn pauli_eigenstate(basis: Pauli, positive: bool) -> Result<StateVector> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if positive { 1.0 } else { -1.0 };
    let amps = match basis {
        Pauli::Z if positive => vec![c(1.0, 0.0), c(0.0, 0.0)],
        Pauli::Z => vec![c(0.0, 0.0), c(1.0, 0.0)],
        Pauli::X => vec![c(s, 0.0), c(sign * s, 0.0)],
        Pauli::Y => vec![c(s, 0.0), c(0.0, sign * s)],
        Pauli::I => return Err(Error::input("the identity has no preferred eigenbasis")),
    };
    StateVector::new(amps)
}
