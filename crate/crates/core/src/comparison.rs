//! b-comparison functions: non-decreasing `psi` whose weighted iterate series
//! `sum s^i psi^i(t)` converges for every `t >= 0`.
//!
//! Membership can only be evidenced on finite grids and truncated series, so
//! validation returns witness reports and graded series evidence rather than
//! a yes/no membership claim.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{QpbError, Result};
use crate::report::{ReportBuilder, ViolationReport};
use crate::scalar::Scalar;
use crate::space::Tolerances;

pub const DEFAULT_RATIO_BOUND: f64 = 0.95;
pub const DEFAULT_J_MAX: usize = 64;

#[derive(Clone)]
pub struct ComparisonFn<T> {
    name: String,
    psi: Arc<dyn Fn(T) -> T + Send + Sync>,
    claimed_s: T,
}

impl<T: Scalar> ComparisonFn<T> {
    pub fn new(name: impl Into<String>, claimed_s: T, psi: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            psi: Arc::new(psi),
            claimed_s,
        }
    }

    /// `psi(t) = factor * t`.
    pub fn linear(factor: T, claimed_s: T) -> Self {
        Self::new(format!("{factor}*t"), claimed_s, move |t| factor * t)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn claimed_s(&self) -> T {
        self.claimed_s
    }

    pub fn eval(&self, t: T) -> T {
        (self.psi)(t)
    }

    fn eval_finite(&self, t: T) -> Result<T> {
        let v = self.eval(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QpbError::NonFinite {
                what: format!("comparison function {}", self.name),
                points: vec![t.to_f64_lossy()],
            })
        }
    }
}

impl<T: Scalar> fmt::Debug for ComparisonFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComparisonFn")
            .field("name", &self.name)
            .field("claimed_s", &self.claimed_s)
            .finish()
    }
}

/// Witnesses adjacent grid points where `psi` decreases.
pub fn validate_monotone<T: Scalar>(f: &ComparisonFn<T>, grid: &[T], tol: &Tolerances<T>) -> Result<ViolationReport<T>> {
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(QpbError::InvalidArgument("monotonicity grid must be sorted ascending".into()));
    }
    let values = grid.iter().map(|&t| f.eval_finite(t)).collect::<Result<Vec<_>>>()?;
    let mut report = ReportBuilder::new("psi_monotone", tol.slack);
    for i in 1..grid.len() {
        report.check_le(&[grid[i - 1], grid[i]], None, values[i - 1], values[i]);
    }
    Ok(report.finish())
}

/// Witnesses every grid point with `psi(t) >= t`.
///
/// A non-finite `psi(t)` is reported as a witness, not an error.
pub fn validate_strict_contraction<T: Scalar>(f: &ComparisonFn<T>, grid: &[T], tol: &Tolerances<T>) -> ViolationReport<T> {
    let mut report = ReportBuilder::new("psi_strict_contraction", tol.slack);
    for &t in grid {
        let v = f.eval(t);
        if v.is_finite() {
            report.check_lt(&[t], None, v, t);
        } else {
            report.count_checked(1);
            report.push(&[t], Some("non-finite"), T::infinity(), t);
        }
    }
    report.finish()
}

/// `psi^n(t)`, with `psi^0(t) = t`.
pub fn psi_iterate<T: Scalar>(f: &ComparisonFn<T>, t: T, n: usize) -> Result<T> {
    let mut v = t;
    for _ in 0..n {
        v = f.eval_finite(v)?;
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesVerdict {
    ConvergentEvidence,
    DivergentEvidence,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesEvidence<T> {
    pub t: T,
    pub s: T,
    /// `S_j = sum_{i<=j} s^i psi^i(t)` for `j = 0..=j_max`.
    pub partial_sums: Vec<T>,
    /// `a_{i+1} / a_i`; `None` where `a_i = 0`.
    pub term_ratios: Vec<Option<T>>,
    pub verdict: SeriesVerdict,
}

/// Evidence for convergence of `sum_i s^i psi^i(t)` from its first `j_max + 1` terms.
///
/// * convergent: from some `i0 <= j_max / 2` on, every term ratio is at most
///   `ratio_bound` (a zero term counts as contracting), and the last term is
///   within slack of zero;
/// * divergent: terms never decrease over the second half of the window;
/// * inconclusive otherwise.
pub fn validate_series<T: Scalar>(
    f: &ComparisonFn<T>,
    t: T,
    j_max: usize,
    ratio_bound: T,
    tol: &Tolerances<T>,
) -> Result<SeriesEvidence<T>> {
    if j_max < 2 {
        return Err(QpbError::InvalidArgument(format!("j_max must be >= 2, got {j_max}")));
    }
    let s = f.claimed_s();
    let mut terms = Vec::with_capacity(j_max + 1);
    let (mut iterate, mut weight) = (t, T::one());
    for i in 0..=j_max {
        if i > 0 {
            iterate = f.eval_finite(iterate)?;
            weight = weight * s;
        }
        let term = weight * iterate;
        if !term.is_finite() {
            return Err(QpbError::NonFinite {
                what: format!("series term {i} of {}", f.name()),
                points: vec![t.to_f64_lossy()],
            });
        }
        terms.push(term);
    }

    let mut partial_sums = Vec::with_capacity(terms.len());
    let mut acc = T::zero();
    for &a in &terms {
        acc = acc + a;
        partial_sums.push(acc);
    }
    let term_ratios: Vec<Option<T>> = terms
        .windows(2)
        .map(|w| if w[0] == T::zero() { None } else { Some(w[1] / w[0]) })
        .collect();

    let contracting = |i: usize| match term_ratios[i] {
        Some(r) => r <= ratio_bound,
        None => terms[i + 1] == T::zero(),
    };
    // smallest i0 with every later ratio contracting
    let mut i0 = term_ratios.len();
    while i0 > 0 && contracting(i0 - 1) {
        i0 -= 1;
    }
    let tail_settled = terms[j_max].abs() <= tol.slack;
    let half = j_max / 2;
    let verdict = if i0 <= half && tail_settled {
        SeriesVerdict::ConvergentEvidence
    } else if (half..j_max).all(|i| terms[i] > T::zero() && terms[i + 1] >= terms[i]) {
        SeriesVerdict::DivergentEvidence
    } else {
        SeriesVerdict::Inconclusive
    };

    Ok(SeriesEvidence {
        t,
        s,
        partial_sums,
        term_ratios,
        verdict,
    })
}
