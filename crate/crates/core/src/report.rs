//! Witness-carrying verdicts shared by every checker.
//!
//! Each checked relation is normalised to `lhs <= rhs`. A witness records an
//! instance where `lhs - rhs` exceeds the slack (for strict relations such as
//! `psi(t) < t`, the witness is kept once `lhs >= rhs - slack`).

use std::cmp::Ordering;

use serde::Serialize;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness<T> {
    pub points: Vec<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clause: Option<String>,
    pub lhs: T,
    pub rhs: T,
    pub margin: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationReport<T> {
    pub predicate: String,
    pub passed: bool,
    pub checked: usize,
    /// Instances excluded by a guard (only present for guarded predicates).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<usize>,
    /// Witnesses sorted by descending margin.
    pub witnesses: Vec<Witness<T>>,
}

impl<T: Scalar> ViolationReport<T> {
    pub fn witness_count(&self) -> usize {
        self.witnesses.len()
    }

    /// `f64` view of the report, used when reports cross the error boundary.
    pub fn to_f64(&self) -> ViolationReport<f64> {
        ViolationReport {
            predicate: self.predicate.clone(),
            passed: self.passed,
            checked: self.checked,
            skipped: self.skipped,
            witnesses: self
                .witnesses
                .iter()
                .map(|w| Witness {
                    points: w.points.iter().map(|p| p.to_f64_lossy()).collect(),
                    clause: w.clause.clone(),
                    lhs: w.lhs.to_f64_lossy(),
                    rhs: w.rhs.to_f64_lossy(),
                    margin: w.margin.to_f64_lossy(),
                })
                .collect(),
        }
    }
}

/// Accumulates checked instances and witnesses for one predicate.
#[derive(Debug, Clone)]
pub struct ReportBuilder<T> {
    predicate: String,
    slack: T,
    checked: usize,
    skipped: Option<usize>,
    witnesses: Vec<Witness<T>>,
}

impl<T: Scalar> ReportBuilder<T> {
    pub fn new(predicate: impl Into<String>, slack: T) -> Self {
        Self {
            predicate: predicate.into(),
            slack,
            checked: 0,
            skipped: None,
            witnesses: Vec::new(),
        }
    }

    /// Checks `lhs <= rhs + slack`; records a witness otherwise.
    ///
    /// NaN on either side is recorded as a witness with NaN margin.
    pub fn check_le(&mut self, points: &[T], clause: Option<&str>, lhs: T, rhs: T) -> bool {
        self.checked += 1;
        let margin = lhs - rhs;
        if margin > self.slack || margin.is_nan() {
            self.push(points, clause, lhs, rhs);
            false
        } else {
            true
        }
    }

    /// Checks the strict relation `lhs < rhs`, tolerating nothing within slack.
    pub fn check_lt(&mut self, points: &[T], clause: Option<&str>, lhs: T, rhs: T) -> bool {
        self.checked += 1;
        if lhs < rhs - self.slack {
            true
        } else {
            self.push(points, clause, lhs, rhs);
            false
        }
    }

    pub fn push(&mut self, points: &[T], clause: Option<&str>, lhs: T, rhs: T) {
        self.witnesses.push(Witness {
            points: points.to_vec(),
            clause: clause.map(str::to_owned),
            lhs,
            rhs,
            margin: lhs - rhs,
        });
    }

    pub fn count_checked(&mut self, n: usize) {
        self.checked += n;
    }

    pub fn skip(&mut self) {
        *self.skipped.get_or_insert(0) += 1;
    }

    pub fn enable_skip_count(&mut self) {
        self.skipped.get_or_insert(0);
    }

    pub fn absorb(&mut self, checked: usize, witnesses: Vec<Witness<T>>) {
        self.checked += checked;
        self.witnesses.extend(witnesses);
    }

    pub fn finish(mut self) -> ViolationReport<T> {
        sort_by_margin(&mut self.witnesses);
        ViolationReport {
            passed: self.witnesses.is_empty(),
            predicate: self.predicate,
            checked: self.checked,
            skipped: self.skipped,
            witnesses: self.witnesses,
        }
    }
}

/// Stable descending sort; NaN margins sort first (they are the most severe).
pub(crate) fn sort_by_margin<T: Scalar>(witnesses: &mut [Witness<T>]) {
    witnesses.sort_by(|a, b| match (a.margin.is_nan(), b.margin.is_nan()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        (false, false) => b.margin.partial_cmp(&a.margin).unwrap_or(Ordering::Equal),
    });
}
