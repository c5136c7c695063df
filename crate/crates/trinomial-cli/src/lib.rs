//! Implementation of the `trinomial` command-line tool: descriptor parsing
//! and rendering, derivation specs, and one handler per subcommand. The
//! binary in `main.rs` is a thin clap dispatcher over [`commands`].

pub mod commands;
pub mod descriptor;
pub mod dspec;

use std::path::PathBuf;
use trinomial::model::{ValidationIssue, ValidationReport};

/// A failure surfaced to the user, with its process exit code.
#[derive(Debug)]
pub enum CliError {
    Io { path: PathBuf, message: String },
    Parse { line: usize, column: usize, message: String },
    Invalid(ValidationReport),
    Input(String),
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Compute(_) => 1,
            _ => 2,
        }
    }

    pub fn render(&self) -> String {
        match self {
            CliError::Io { path, message } => {
                format!("cannot read {}: {message}", path.display())
            }
            CliError::Parse { line, column, message } => {
                format!("parse error at line {line}, column {column}: {message}")
            }
            CliError::Invalid(report) => {
                let mut out = String::from("invalid descriptor:");
                for issue in &report.issues {
                    out.push_str(&format!("\n  {}: {issue}", issue_code(issue)));
                }
                out
            }
            CliError::Input(message) | CliError::Compute(message) => message.clone(),
        }
    }
}

/// Stable machine-facing name of a validation-issue variant.
pub fn issue_code(issue: &ValidationIssue) -> &'static str {
    match issue {
        ValidationIssue::TooFewBlocks { .. } => "TooFewBlocks",
        ValidationIssue::BadExponent { .. } => "BadExponent",
        ValidationIssue::DuplicateScalar { .. } => "DuplicateScalar",
        ValidationIssue::DependentColumns { .. } => "DependentColumns",
    }
}
