//! Config-driven verification harness: reads a time scale, a function and a
//! list of checks from JSON, evaluates every instance and renders the rows
//! as CSV, JSON or an aligned table.

pub mod config;
pub mod error;
pub mod report;
pub mod run;
pub mod sweep;

pub use config::{Check, Regime, RunConfig};
pub use error::CliError;
pub use report::{render_report, Equality, Format, Report, Row};
pub use run::run_verify;
pub use sweep::run_sweep;
