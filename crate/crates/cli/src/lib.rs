//! Command-line front end of the N-connected region analysis.
//!
//! `analyze` writes a JSON report and SVG figures; `feasibility` checks a
//! point-to-point trajectory against the computed regions.

pub mod config;
pub mod pipeline;
pub mod report;
pub mod svg;

use thiserror::Error;

pub use config::{Artifact, ConfigFile, Overrides, RunConfig};
pub use pipeline::{analyze, format_verdict, parse_trajectory, run_analyze, run_feasibility};
pub use report::AnalysisReport;
pub use svg::render_svg;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot write output: {0}")]
    Output(String),
    #[error("empty workspace")]
    EmptyWorkspace,
    #[error("trajectory point {index} ({x}, {y}) is unreachable")]
    Unreachable { index: usize, x: f64, y: f64 },
    #[error("analysis failed: {0}")]
    Analysis(String),
    #[error("invalid report: {0}")]
    Report(String),
    #[error("cannot render: {0}")]
    Render(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Analysis(_) | CliError::Report(_) | CliError::Render(_) => 2,
            CliError::Output(_) => 3,
            CliError::EmptyWorkspace => 4,
            CliError::Unreachable { .. } => 5,
        }
    }
}
