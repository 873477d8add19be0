//! Configuration-driven experiment runner behind the `hybrid-qudit` binary.
//!
//! A run is one JSON document (every key optional, unknown keys rejected)
//! plus `--set key=value` overrides using dotted paths, e.g.
//! `--set tomography.bootstrap=200`. Outputs go to one directory: CSV for
//! fringes, sweeps and entropies, JSON for density matrices. Each carries a
//! metadata block with the configuration hash, seed and tool version, so the
//! same configuration and seed always produce byte-identical files.

mod config;
mod run;

pub use config::{
    apply_override, ConfigError, DistillConfig, DistillMode, EntropyConfig, GridConfig, OutputConfig,
    PostSelectionRule, ProjectorChoice, RhomConfig, RunConfig, StateConfig, StateModel, TomographyConfig,
};
pub use run::{execute, read_body, run, Command, HarnessError, Invocation, RunReport};
