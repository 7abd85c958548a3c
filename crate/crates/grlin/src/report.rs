use std::fmt::Write;

use serde::Serialize;
use sha2::{Digest, Sha256};

use grlin_core::Report;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of one command. Field order is the key order of the machine format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommandReport {
    pub command: String,
    /// SHA-256 over the command, the input text and the options.
    pub digest: String,
    pub checks: Vec<CheckLine>,
    pub diagnostics: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emitted: Option<String>,
}

pub fn digest(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    h.finalize().iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl CommandReport {
    pub fn new(command: &str, digest: String) -> CommandReport {
        CommandReport { command: command.to_string(), digest, checks: Vec::new(), diagnostics: Vec::new(), emitted: None }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn push(&mut self, name: impl ToString, passed: bool, detail: impl ToString) {
        self.checks.push(CheckLine { name: name.to_string(), passed, detail: detail.to_string() });
    }

    /// Appends a library report: checks prefixed by `prefix`, warnings as diagnostics.
    pub fn absorb(&mut self, prefix: &str, r: Report) {
        for c in r.checks {
            let name = if prefix.is_empty() { c.name } else { format!("{prefix}.{}", c.name) };
            self.push(name, c.passed, c.detail);
        }
        for w in r.warnings {
            self.diagnostics.push(format!("warning: {w}"));
        }
    }

    pub fn note(&mut self, line: impl ToString) {
        self.diagnostics.push(line.to_string());
    }

    pub fn machine(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serialises");
        s.push('\n');
        s
    }

    /// Human-readable form; the emitted presentation is appended when `with_emitted`.
    pub fn text(&self, with_emitted: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}: {}", self.command, if self.passed() { "pass" } else { "FAIL" });
        for c in &self.checks {
            let _ = writeln!(s, "  {} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
        }
        for d in &self.diagnostics {
            for (i, line) in d.lines().enumerate() {
                let _ = writeln!(s, "{}{line}", if i == 0 { "  " } else { "    " });
            }
        }
        if with_emitted {
            if let Some(e) = &self.emitted {
                s.push('\n');
                s.push_str(e);
            }
        }
        s
    }
}
