//! Machine-readable verdicts emitted by every checker.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// The check does not apply to this input (outside a hypothesis).
    Skipped,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_fail(self) -> bool {
        self == Verdict::Fail
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
        })
    }
}

/// A single offending (or extremal) term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// Exponent vector, relation, or multi-index the witness refers to.
    pub u: Vec<i64>,
    /// Exact coefficient as `"num/den"`.
    pub c: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valuation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Witness {
    pub fn new(u: Vec<i64>, c: impl Into<String>) -> Self {
        Witness {
            u,
            c: c.into(),
            valuation: None,
            note: None,
        }
    }

    pub fn with_valuation(mut self, v: impl ToString) -> Self {
        self.valuation = Some(v.to_string());
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// `{"check", "target", "verdict", "witness", "valid_level"}` plus optional
/// counters and nested per-item reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub target: String,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub valid_level: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub stats: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<Report>,
}

impl Report {
    pub fn new(check: impl Into<String>, target: impl Into<String>, verdict: Verdict) -> Self {
        Report {
            check: check.into(),
            target: target.into(),
            verdict,
            witness: None,
            valid_level: None,
            stats: BTreeMap::new(),
            details: Vec::new(),
        }
    }

    pub fn pass(check: impl Into<String>, target: impl Into<String>) -> Self {
        Self::new(check, target, Verdict::Pass)
    }

    pub fn with_witness(mut self, w: Option<Witness>) -> Self {
        self.witness = w;
        self
    }

    pub fn with_valid_level(mut self, level: impl ToString) -> Self {
        self.valid_level = Some(level.to_string());
        self
    }

    pub fn stat(mut self, key: &str, value: impl ToString) -> Self {
        self.stats.insert(key.to_string(), value.to_string());
        self
    }

    /// Appends a child and fails this report if the child failed.
    pub fn push(&mut self, child: Report) {
        if child.verdict.is_fail() {
            self.verdict = Verdict::Fail;
            if self.witness.is_none() {
                self.witness = child.witness.clone();
            }
        }
        self.details.push(child);
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed(&self) -> bool {
        self.verdict.is_fail()
    }
}

/// Combined verdict: fails if any report fails, otherwise passes.
pub fn overall(reports: &[Report]) -> Verdict {
    Verdict::from_bool(!reports.iter().any(Report::failed))
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {} :: {}", self.verdict, self.check, self.target)?;
        if let Some(l) = &self.valid_level {
            write!(f, " (valid to level {l})")?;
        }
        for (k, v) in &self.stats {
            write!(f, " {k}={v}")?;
        }
        if let Some(w) = &self.witness {
            write!(f, " witness u={:?} c={}", w.u, w.c)?;
            if let Some(v) = &w.valuation {
                write!(f, " v={v}")?;
            }
            if let Some(n) = &w.note {
                write!(f, " ({n})")?;
            }
        }
        Ok(())
    }
}
