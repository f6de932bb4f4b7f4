//! Configuration, experiment orchestration, reports, golden values and the
//! verification suite.

pub mod config;
pub mod experiment;
pub mod golden;
pub mod report;
pub mod verify;

pub use config::{parse_config, Mode, RunConfig};
pub use experiment::run_experiment;
pub use report::RunReport;
pub use verify::{verify_suite, CriterionResult, Level};
