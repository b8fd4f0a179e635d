//! Auxiliary functions `delta`, `phi` and the predicates built on them:
//! locally dominated maps, locally triangular pairs, and the guard that
//! decides where the contraction condition applies.
//!
//! `delta` and `phi` are nominally nonnegative, but only the inequality
//! `delta >= phi` is ever evaluated, so real-valued functions are accepted.
//! Verdicts are relative to the region they were computed on.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::domain::{Domain, Region};
use crate::error::{QpbError, Result};
use crate::report::{ReportBuilder, ViolationReport};
use crate::scalar::Scalar;
use crate::space::{DistFn, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DominanceMode {
    /// General `(delta, phi)` pair.
    Pair,
    /// `phi` is the constant 1.
    DeltaOnly,
}

#[derive(Clone)]
pub struct DominancePair<T> {
    delta: DistFn<T>,
    phi: DistFn<T>,
    mode: DominanceMode,
}

impl<T: Scalar> DominancePair<T> {
    pub fn new(
        delta: impl Fn(T, T) -> T + Send + Sync + 'static,
        phi: impl Fn(T, T) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            delta: Arc::new(delta),
            phi: Arc::new(phi),
            mode: DominanceMode::Pair,
        }
    }

    pub fn delta_only(delta: impl Fn(T, T) -> T + Send + Sync + 'static) -> Self {
        Self {
            delta: Arc::new(delta),
            phi: Arc::new(|_, _| T::one()),
            mode: DominanceMode::DeltaOnly,
        }
    }

    /// Constant pair, useful for controls.
    pub fn constant(delta: T, phi: T) -> Self {
        Self::new(move |_, _| delta, move |_, _| phi)
    }

    /// Keeps `delta` and drops `phi` in favour of the constant 1.
    pub fn to_delta_only(&self) -> Self {
        Self {
            delta: self.delta.clone(),
            phi: Arc::new(|_, _| T::one()),
            mode: DominanceMode::DeltaOnly,
        }
    }

    pub fn mode(&self) -> DominanceMode {
        self.mode
    }

    pub fn delta(&self, x: T, y: T) -> T {
        (self.delta)(x, y)
    }

    pub fn phi(&self, x: T, y: T) -> T {
        match self.mode {
            DominanceMode::DeltaOnly => T::one(),
            DominanceMode::Pair => (self.phi)(x, y),
        }
    }

    /// `delta(x, y) >= phi(x, y) - slack`. NaN on either side fails.
    pub fn dominates(&self, x: T, y: T, slack: T) -> bool {
        self.delta(x, y) >= self.phi(x, y) - slack
    }
}

impl<T: Scalar> fmt::Debug for DominancePair<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DominancePair").field("mode", &self.mode).finish()
    }
}

/// Witnesses every `x` with `delta(x, Tx) < phi(x, Tx)`.
///
/// Witness convention: `lhs = phi(x, Tx)`, `rhs = delta(x, Tx)`, points `[x, Tx]`.
pub fn is_locally_dominated<T: Scalar>(
    pair: &DominancePair<T>,
    map_name: &str,
    map: &dyn Fn(T) -> T,
    domain: &Domain<T>,
    region: &Region<T>,
    tol: &Tolerances<T>,
) -> Result<ViolationReport<T>> {
    let mut report = ReportBuilder::new(format!("locally_dominated[{map_name}]"), tol.slack);
    for &x in region.points() {
        let tx = map(x);
        if !domain.contains(tx) {
            return Err(QpbError::OutsideDomain {
                map: map_name.to_owned(),
                input: x.to_f64_lossy(),
                output: tx.to_f64_lossy(),
                domain: domain.to_string(),
            });
        }
        report.check_le(&[x, tx], None, pair.phi(x, tx), pair.delta(x, tx));
    }
    Ok(report.finish())
}

/// Over ordered triples: `delta >= phi` on `(x,y)` and `(y,z)` must give it on `(x,z)`.
///
/// Witness convention: `lhs = phi(x, z)`, `rhs = delta(x, z)`, points `[x, y, z]`.
pub fn is_pair_triangular<T: Scalar>(pair: &DominancePair<T>, region: &Region<T>, tol: &Tolerances<T>) -> ViolationReport<T> {
    let pts = region.points();
    let n = pts.len();
    let mut holds = vec![false; n * n];
    let mut phi = vec![T::zero(); n * n];
    let mut delta = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let (d, p) = (pair.delta(pts[i], pts[j]), pair.phi(pts[i], pts[j]));
            holds[i * n + j] = d >= p - tol.slack;
            delta[i * n + j] = d;
            phi[i * n + j] = p;
        }
    }
    let mut report = ReportBuilder::new("pair_triangular", tol.slack);
    for i in 0..n {
        for j in 0..n {
            if !holds[i * n + j] {
                report.count_checked(n);
                continue;
            }
            for k in 0..n {
                report.count_checked(1);
                if holds[j * n + k] && !holds[i * n + k] {
                    report.push(&[pts[i], pts[j], pts[k]], None, phi[i * n + k], delta[i * n + k]);
                }
            }
        }
    }
    report.finish()
}

/// The gate of the contraction condition: `delta >= phi` on `(x,y)` or on `(y,x)`.
pub fn dominance_guard<T: Scalar>(pair: &DominancePair<T>, x: T, y: T, tol: &Tolerances<T>) -> bool {
    pair.dominates(x, y, tol.slack) || pair.dominates(y, x, tol.slack)
}
