//! Counting statistics, maximum-likelihood state reconstruction and
//! Poissonian bootstrap uncertainties.

mod bootstrap;
mod counts;
mod mle;
mod rank;
mod setting;

pub use bootstrap::{bootstrap_estimate, resample_records, BootstrapEstimate, BootstrapOptions, Statistic};
pub use counts::{
    expectation_from_counts, expected_counts, observed_frequencies, read_count_csv, simulate_counts,
    write_count_csv, CountRecord, COUNT_CSV_HEADER,
};
pub(crate) use counts::poisson_draw;
pub use mle::{mle_reconstruct, predicted_probabilities, MleOptions, MleReconstruction, PROBABILITY_FLOOR};
pub use rank::{gauge_freedom, measurement_matrix, measurement_rank};
pub use setting::{
    complete_pauli_set, default_restricted_set, outcome_signs, parse_pauli_outcome, pauli_outcome_label,
    pauli_projector, pauli_setting, read_projector_set, restricted_pauli_set, validate_settings,
    write_projector_set, xz_pauli_set, MeasurementSetting, OutcomeSpec, ProjectorSetFile, SettingSpec,
};
