//! Rule-by-rule configuration checks.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Warn,
    Fail,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub rule: String,
    pub outcome: Outcome,
    pub detail: String,
}

impl Check {
    /// A hard rule: failing it makes the configuration unusable.
    pub fn require(rule: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Self {
            rule: rule.into(),
            outcome: if ok { Outcome::Pass } else { Outcome::Fail },
            detail: detail.into(),
        }
    }

    /// A soft rule: failing it only produces a warning.
    pub fn advise(rule: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Self {
            rule: rule.into(),
            outcome: if ok { Outcome::Pass } else { Outcome::Warn },
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.outcome == Outcome::Fail)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.outcome == Outcome::Warn)
    }

    pub fn into_result(self) -> Result<()> {
        let failed: Vec<String> = self
            .failures()
            .map(|c| format!("{} ({})", c.rule, c.detail))
            .collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(failed.join("; ")))
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = match c.outcome {
                Outcome::Pass => "PASS",
                Outcome::Warn => "WARN",
                Outcome::Fail => "FAIL",
            };
            writeln!(f, "[{tag}] {}: {}", c.rule, c.detail)?;
        }
        Ok(())
    }
}
