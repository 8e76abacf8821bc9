//! Sample-based verdicts shared by the axiom checkers.
//!
//! A `Pass` means no counterexample was found among the drawn samples; it is
//! never a proof.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraElement;
use crate::spaces::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// The inputs that broke an axiom together with the offending element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Point>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<AlgebraElement>,
    pub element: AlgebraElement,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomEntry {
    pub axiom: String,
    pub verdict: Verdict,
    pub samples_used: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Auxiliary measurement, e.g. the empirical continuity modulus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub subject: String,
    pub seed: u64,
    pub sample_count: usize,
    pub entries: Vec<AxiomEntry>,
}

impl AxiomReport {
    pub fn new(subject: impl Into<String>, seed: u64, sample_count: usize) -> Self {
        AxiomReport {
            subject: subject.into(),
            seed,
            sample_count,
            entries: Vec::new(),
        }
    }

    pub fn entry(&self, axiom: &str) -> Option<&AxiomEntry> {
        self.entries.iter().find(|e| e.axiom == axiom)
    }

    pub fn verdict(&self, axiom: &str) -> Option<Verdict> {
        self.entry(axiom).map(|e| e.verdict)
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.verdict == Verdict::Pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomEntry> {
        self.entries.iter().filter(|e| e.verdict == Verdict::Fail)
    }

    /// Records a sampled check: `Pass` when `witness` is `None`.
    pub(crate) fn push(&mut self, axiom: &str, samples_used: usize, witness: Option<Witness>) {
        let verdict = if witness.is_some() {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        self.entries.push(AxiomEntry {
            axiom: axiom.to_string(),
            verdict,
            samples_used,
            witness,
            measure: None,
        });
    }
}

/// Evaluates `check` over `items` in parallel and returns the failure with the
/// lowest index, so the result does not depend on scheduling.
pub(crate) fn first_failure<T, W, F>(items: &[T], check: F) -> Option<(usize, W)>
where
    T: Sync,
    W: Send,
    F: Fn(&T) -> Option<W> + Sync,
{
    items
        .par_iter()
        .enumerate()
        .find_map_first(|(i, item)| check(item).map(|w| (i, w)))
}
