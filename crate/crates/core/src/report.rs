use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Ordered list of named checks plus free-form warnings.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new() -> Report {
        Report::default()
    }

    pub fn push(&mut self, name: impl ToString, passed: bool, detail: impl ToString) {
        self.checks.push(Check { name: name.to_string(), passed, detail: detail.to_string() });
    }

    pub fn warn(&mut self, w: impl ToString) {
        self.warnings.push(w.to_string());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Appends `other`, prefixing its check names.
    pub fn absorb(&mut self, prefix: &str, other: Report) {
        for c in other.checks {
            let name = if prefix.is_empty() { c.name } else { alloc::format!("{prefix}.{}", c.name) };
            self.checks.push(Check { name, ..c });
        }
        self.warnings.extend(other.warnings);
    }
}
