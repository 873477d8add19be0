//! Simulation and analysis toolkit for two-photon states encoded in the path
//! and transverse-electric (TE) mode of integrated waveguides.
//!
//! Each photon carries two qubits (path and TE mode), so a photon pair lives
//! in a 16-dimensional space. All 16-dimensional objects in this crate use one
//! basis ordering:
//!
//! ```text
//! index = 8 * mode_signal + 4 * mode_idler + 2 * path_signal + path_idler
//! ```
//!
//! i.e. qubit 0 (most significant) is the signal TE mode, qubit 1 the idler TE
//! mode, qubit 2 the signal path and qubit 3 the idler path. Mode qubits come
//! first, matching the `(TE mode) ⊗ (path)` grouping of the hyperentangled
//! state.
//!
//! Modules:
//! - [`quantum`]: states, operators, Born rule, fidelity, partial trace, entropy.
//! - [`chip`]: pump distribution over the four sources, post-selected biphoton
//!   generation, MZI transfer matrices and RHOM fringes.
//! - [`states`]: canonical target states and the error channels applied to them.
//! - [`tomography`]: counting statistics, iterative maximum-likelihood
//!   reconstruction (complete and undercomplete), Poissonian bootstrap.
//! - [`distillation`]: single-copy entanglement distillation with a per-photon
//!   path→mode CNOT.
//! - [`harness`]: configuration-driven experiment runner behind the CLI.

pub mod chip;
pub mod distillation;
pub mod error;
pub mod harness;
pub mod quantum;
pub mod states;
pub mod tomography;

pub use error::{Error, Result};
pub use quantum::{CMatrix, DensityMatrix, ObservableOperator, Projector, StateVector};
