//! Scenario files, reports and the `catlab` command line on top of `catlab-core`.

pub mod commands;
pub mod error;
pub mod json;
pub mod parallel;
pub mod report;
pub mod scenario;

pub use commands::{check, discriminate_sources, enumerate_tree, run, Context, Output};
pub use error::{CliError, CliResult, Location};
pub use report::{to_csv, CsvRow, RunReport, ScenarioRef, REPORT_VERSION};
pub use scenario::{load_scenario, parse_scenario, to_toml, ScenarioFile};

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const INPUT_ERROR: u8 = 1;
    pub const VIOLATION: u8 = 2;
}
