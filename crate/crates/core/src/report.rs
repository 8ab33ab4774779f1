//! Problem reports: the one diagnostics record shared by every stage.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        })
    }
}

/// A severity-tagged message anchored to a file, a 1-based line and a
/// 1-based column. `source` names the pass that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemReport {
    pub severity: Severity,
    pub message: String,
    pub file: PathBuf,
    pub line: u32,
    pub column: u32,
    pub source: String,
}

impl ProblemReport {
    pub fn new(
        severity: Severity,
        message: impl Into<String>,
        file: impl AsRef<Path>,
        line: u32,
        column: u32,
        source: impl Into<String>,
    ) -> Self {
        let message = message.into();
        debug_assert!(!message.is_empty());
        ProblemReport {
            severity,
            message,
            file: file.as_ref().to_path_buf(),
            line: line.max(1),
            column: column.max(1),
            source: source.into(),
        }
    }

    pub fn error(
        message: impl Into<String>,
        file: impl AsRef<Path>,
        line: u32,
        column: u32,
        source: impl Into<String>,
    ) -> Self {
        Self::new(Severity::Error, message, file, line, column, source)
    }

    pub fn warning(
        message: impl Into<String>,
        file: impl AsRef<Path>,
        line: u32,
        column: u32,
        source: impl Into<String>,
    ) -> Self {
        Self::new(Severity::Warning, message, file, line, column, source)
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// Renders as `severity file:line:col message`.
impl fmt::Display for ProblemReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}:{}:{} {}",
            self.severity,
            self.file.display(),
            self.line,
            self.column,
            self.message
        )
    }
}

pub fn has_errors(reports: &[ProblemReport]) -> bool {
    reports.iter().any(ProblemReport::is_error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_format() {
        let r = ProblemReport::error("unexpected token", "a/b.mc", 7, 3, "grammar");
        assert_eq!(r.to_string(), "error a/b.mc:7:3 unexpected token");
    }

    #[test]
    fn line_and_column_are_clamped_to_one() {
        let r = ProblemReport::warning("w", "f", 0, 0, "x");
        assert_eq!((r.line, r.column), (1, 1));
    }
}
