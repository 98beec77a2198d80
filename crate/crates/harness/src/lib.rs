//! Scenario files, the staged certification and simulation pipeline, and
//! report and plot emission for the `dampwave` command-line tool.

pub mod pipeline;
pub mod plot;
pub mod report;
pub mod scenario;

pub use pipeline::{certify, run_scenario, Bundle, Certificate, Stage, StageError};
pub use scenario::{Overrides, Scenario};
