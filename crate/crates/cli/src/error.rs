use serde_json::{json, Value};
use std::path::PathBuf;

use gelfand_core::ValidationReport;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("config failed validation: {}", summary(.0))]
    Invalid(ValidationReport),

    #[error("unresolved {kind} reference `{name}`")]
    Unresolved { kind: &'static str, name: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error(transparent)]
    Core(#[from] gelfand_core::Error),

    #[error("i/o error on {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

fn summary(report: &ValidationReport) -> String {
    report.failures().map(|c| format!("{}: {}", c.name, c.detail)).collect::<Vec<_>>().join("; ")
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Invalid(_) => "schema",
            CliError::Unresolved { .. } => "unresolved_reference",
            CliError::Precondition(_) => "precondition",
            CliError::Core(_) => "computation",
            CliError::Io { .. } => "io",
        }
    }

    /// Machine-readable form printed on failure.
    pub fn to_json(&self, command: Option<&str>) -> Value {
        let mut body = json!({ "kind": self.kind(), "message": self.to_string() });
        if let Some(c) = command {
            body["command"] = json!(c);
        }
        match self {
            CliError::Parse { line, column, .. } => {
                body["line"] = json!(line);
                body["column"] = json!(column);
            }
            CliError::Invalid(report) => body["report"] = serde_json::to_value(report).expect("report serialises"),
            _ => {}
        }
        json!({ "error": body })
    }
}
