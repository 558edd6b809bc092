//! Batch front end for the `tverberg-core` oracles.
//!
//! A run is described by an [`ExperimentSpec`] (spec file plus flag
//! overrides), executed by [`run`], and written out as a [`RunReport`] in
//! JSON and/or CSV. Everything in `results` is a function of the spec alone.

mod commands;
mod output;
mod spec;

use serde::{Deserialize, Serialize};
use tverberg_core::Error;

pub use commands::{load_configuration, run, Results, SuiteResult};
pub use output::{csv_rows, csv_text, write_outputs};
pub use spec::{CapacityModeKind, CommandKind, ExperimentSpec, Format, GeneratorKind};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable consulted for the default output directory.
pub const OUT_DIR_ENV: &str = "TVERBERG_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("property violation: {0}")]
    Violation(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Violation(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Input(_) | CliError::Io(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } | Error::ToleranceBudget { .. } => CliError::Budget(e.to_string()),
            Error::InternalInconsistency(_) | Error::InvalidCertificate(_) => CliError::Violation(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub seed: Option<u64>,
    pub spec: ExperimentSpec,
    pub results: Results,
    /// Failed property checks; non-empty means exit status 2.
    pub violations: Vec<String>,
    pub wall_time_ms: u64,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.violations.is_empty() {
            0
        } else {
            2
        }
    }

    /// The `results` field alone, the part that must be reproducible.
    pub fn results_json(&self) -> String {
        serde_json::to_string(&self.results).expect("results serialize")
    }
}
