//! Reproducible experiment runs over `dbar-core`: config, runners and report files.

pub mod config;
pub mod plot;
pub mod report;
pub mod run;

pub use config::{Experiment, ExperimentConfig, Overrides, UsageError};
pub use report::{Report, Row};
pub use run::run;
