//! Simulation harness for regional relay selection over a LEO constellation.
//!
//! The algorithms live in `spacemeta-core`; this crate adds scenario files,
//! the slot-by-slot pipeline, on-disk outputs, scheme comparison and the
//! α sweep used by the `spacemeta` binary.

use std::path::PathBuf;

pub mod compare;
pub mod outputs;
pub mod pipeline;
pub mod scenario;
pub mod sweep;

pub use compare::{compare_runs, compare_scenarios, ComparisonReport};
pub use pipeline::{run_all, run_seed, RunOptions, SeedRun, SeedSummary};
pub use scenario::{Scenario, Scheme};
pub use sweep::{sweep_alpha, SweepReport};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}", path = .0.display(), source = .1)]
    Io(PathBuf, #[source] std::io::Error),
    #[error("scenarios differ in more than scheme and output_dir")]
    MismatchedScenarios,
}

/// Process exit codes of the `spacemeta` binary.
pub mod exit_code {
    /// Run completed and every slot passed the constraint audit.
    pub const CLEAN: i32 = 0;
    /// Run completed but at least one constraint violation was recorded.
    pub const AUDIT_VIOLATION: i32 = 1;
    /// Scenario file or command-line arguments were rejected.
    pub const CONFIG: i32 = 2;
    /// Reading or writing a file failed.
    pub const IO: i32 = 3;
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::MismatchedScenarios => exit_code::CONFIG,
            HarnessError::Io(..) => exit_code::IO,
        }
    }
}
