//! Structured pass/fail reporting for the verification harnesses.
//!
//! Every harness produces the same shape: a claim identifier, a summary
//! of the inputs, a list of named assertions with measured values, and an
//! overall verdict.  Precondition failures yield `Inconclusive` rather
//! than `Fail` so that a malformed instance is never mistaken for a
//! counterexample.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    /// measured discrepancy or count, when the check is quantitative
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<f64>,
    /// bound the measurement was held against
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
}

impl Assertion {
    pub fn flag(name: &str, pass: bool) -> Self {
        Assertion { name: name.into(), pass, measured: None, bound: None }
    }

    pub fn measured(name: &str, measured: f64, bound: f64) -> Self {
        Assertion { name: name.into(), pass: measured <= bound, measured: Some(measured), bound: Some(bound) }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim: String,
    pub inputs: String,
    pub assertions: Vec<Assertion>,
    pub notes: Vec<String>,
    pub verdict: Verdict,
}

impl VerificationReport {
    pub fn new(claim: &str, inputs: String) -> Self {
        VerificationReport {
            claim: claim.into(),
            inputs,
            assertions: Vec::new(),
            notes: Vec::new(),
            verdict: Verdict::Pass,
        }
    }

    pub fn push(&mut self, a: Assertion) {
        self.assertions.push(a);
    }

    pub fn note(&mut self, text: String) {
        self.notes.push(text);
    }

    /// Marks the report inconclusive with an explanatory note; assertions
    /// already present are kept for context.
    pub fn preconditions_failed(mut self, why: String) -> Self {
        self.notes.push(format!("precondition failed: {why}"));
        self.verdict = Verdict::Inconclusive;
        self
    }

    /// Settles the verdict from the recorded assertions, unless already
    /// inconclusive.
    pub fn finish(mut self) -> Self {
        if self.verdict != Verdict::Inconclusive {
            self.verdict = if self.assertions.iter().all(|a| a.pass) {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}
