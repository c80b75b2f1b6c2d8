use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Syntax,
    Unit,
    Consistency,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Syntax => "syntax",
            Stage::Unit => "unit",
            Stage::Consistency => "consistency",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub stage: Stage,
    /// JSON path into the offending document, e.g. `$.db.SLOs[0].unit`.
    pub location: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(stage: Stage, location: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { stage, location: location.into(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.stage, self.location, self.message)
    }
}

/// Outcome of one or more validation stages. Warnings never make a report
/// invalid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub is_valid: bool,
    pub errors: Vec<Diagnostic>,
    #[serde(default)]
    pub warnings: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn new() -> Self {
        ValidationReport { is_valid: true, errors: Vec::new(), warnings: Vec::new() }
    }

    pub fn from_errors(errors: Vec<Diagnostic>) -> Self {
        ValidationReport { is_valid: errors.is_empty(), errors, warnings: Vec::new() }
    }

    pub fn error(&mut self, d: Diagnostic) {
        self.errors.push(d);
        self.is_valid = false;
    }

    pub fn warning(&mut self, d: Diagnostic) {
        self.warnings.push(d);
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.errors.extend(other.errors);
        self.warnings.extend(other.warnings);
        self.is_valid = self.errors.is_empty();
    }

    pub fn errors_in(&self, stage: Stage) -> impl Iterator<Item = &Diagnostic> {
        self.errors.iter().filter(move |d| d.stage == stage)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning {w}")?;
        }
        if self.is_valid {
            write!(f, "valid ({} warning(s))", self.warnings.len())
        } else {
            write!(f, "invalid: {} error(s), {} warning(s)", self.errors.len(), self.warnings.len())
        }
    }
}
