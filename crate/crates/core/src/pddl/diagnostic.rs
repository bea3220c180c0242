use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Syntax,
    Semantic,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Syntax => "syntax",
            Severity::Semantic => "semantic",
        })
    }
}

/// Byte offset plus 1-based line and column.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub offset: usize,
    pub line: usize,
    pub col: usize,
}

impl From<Span> for Location {
    fn from(s: Span) -> Self {
        Location {
            offset: s.offset,
            line: s.line,
            col: s.col,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{severity}: {message} (line {}, col {})", location.line, location.col)]
pub struct PddlDiagnostic {
    pub severity: Severity,
    pub message: String,
    pub location: Location,
}

impl PddlDiagnostic {
    pub fn syntax(message: impl Into<String>, location: impl Into<Location>) -> Self {
        PddlDiagnostic {
            severity: Severity::Syntax,
            message: message.into(),
            location: location.into(),
        }
    }

    pub fn semantic(message: impl Into<String>, location: impl Into<Location>) -> Self {
        PddlDiagnostic {
            severity: Severity::Semantic,
            message: message.into(),
            location: location.into(),
        }
    }
}

/// Renders diagnostics one per line, in the order given.
pub fn render_diagnostics(diags: &[PddlDiagnostic]) -> String {
    diags
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}
