//! Experiment harness around `dnet-core`: seeded Monte Carlo sweeps, penalized
//! selection over an enumerated cover, and CSV/JSON reports.

pub mod config;
pub mod error;
pub mod report;
pub mod select;
pub mod sweep;

pub use config::ExperimentConfig;
pub use error::{HarnessError, HarnessResult};
pub use sweep::{run_sweep, run_theorem1_sweep, summarize, SweepResult, SweepSummary, TrialRecord};

/// JSON schema of the sweep summary.
pub const SUMMARY_SCHEMA: &str = include_str!("../schema/sweep_summary.schema.json");
