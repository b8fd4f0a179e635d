//! Quasi-partial b-metric and dislocated quasi-metric spaces.
//!
//! Axioms are universally quantified over the whole space; here they are
//! verified exhaustively over a caller-supplied finite [`Region`], and every
//! failing instance is returned as a witness.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::Region;
use crate::error::{QpbError, Result};
use crate::report::{ReportBuilder, ViolationReport, Witness};
use crate::scalar::Scalar;

/// Two-argument real function: distances, and the dominance pair.
pub type DistFn<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// Self map on the point domain.
pub type MapFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Numerical tolerances. Defaults: `eq = 1e-9`, `zero = 1e-9`, `slack = 1e-12`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances<T> {
    /// Point identity.
    pub eq: T,
    /// Zero test for distances (fixed-point identification).
    pub zero: T,
    /// Inequality slack for floating point rounding.
    pub slack: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            eq: T::lit(1e-9),
            zero: T::lit(1e-9),
            slack: T::lit(1e-12),
        }
    }
}

/// A distance `q` together with its b-triangle coefficient `s >= 1`.
#[derive(Clone)]
pub struct QpbSpace<T> {
    name: String,
    dist: DistFn<T>,
    s: T,
}

impl<T: Scalar> QpbSpace<T> {
    pub fn new(name: impl Into<String>, s: T, dist: impl Fn(T, T) -> T + Send + Sync + 'static) -> Result<Self> {
        if s.is_nan() || s < T::one() {
            return Err(QpbError::InvalidArgument(format!("coefficient s must be >= 1, got {s}")));
        }
        Ok(Self {
            name: name.into(),
            dist: Arc::new(dist),
            s,
        })
    }

    /// The standard metric `|x - y|` with `s = 1`.
    pub fn standard_metric() -> Self {
        Self::new("|x-y|", T::one(), |x: T, y: T| (x - y).abs()).expect("s = 1")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn s(&self) -> T {
        self.s
    }

    /// Same distance, different coefficient.
    pub fn with_coefficient(&self, s: T) -> Result<Self> {
        if s.is_nan() || s < T::one() {
            return Err(QpbError::InvalidArgument(format!("coefficient s must be >= 1, got {s}")));
        }
        Ok(Self { s, ..self.clone() })
    }

    /// Raw distance value, without a finiteness check.
    pub fn q(&self, x: T, y: T) -> T {
        (self.dist)(x, y)
    }

    /// Distance value, rejecting NaN and infinities.
    pub fn dist(&self, x: T, y: T) -> Result<T> {
        let v = self.q(x, y);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QpbError::NonFinite {
                what: format!("distance {}", self.name),
                points: vec![x.to_f64_lossy(), y.to_f64_lossy()],
            })
        }
    }

    pub fn as_dq(&self) -> DqSpace<T> {
        DqSpace {
            name: self.name.clone(),
            dist: self.dist.clone(),
        }
    }
}

impl<T: Scalar> fmt::Debug for QpbSpace<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QpbSpace").field("name", &self.name).field("s", &self.s).finish()
    }
}

/// A dislocated quasi-metric: no coefficient, plain triangle with self-distance correction.
#[derive(Clone)]
pub struct DqSpace<T> {
    name: String,
    dist: DistFn<T>,
}

impl<T: Scalar> DqSpace<T> {
    pub fn new(name: impl Into<String>, dist: impl Fn(T, T) -> T + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            dist: Arc::new(dist),
        }
    }

    pub fn q(&self, x: T, y: T) -> T {
        (self.dist)(x, y)
    }
}

impl<T: Scalar> fmt::Debug for DqSpace<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DqSpace").field("name", &self.name).finish()
    }
}

/// Row-major `n x n` table of `q(p_i, p_j)` over a region.
struct DistMatrix<T> {
    n: usize,
    values: Vec<T>,
}

impl<T: Scalar> DistMatrix<T> {
    fn build(name: &str, q: impl Fn(T, T) -> T, points: &[T]) -> Result<Self> {
        let n = points.len();
        let mut values = Vec::with_capacity(n * n);
        for &x in points {
            for &y in points {
                let v = q(x, y);
                if !v.is_finite() {
                    return Err(QpbError::NonFinite {
                        what: format!("distance {name}"),
                        points: vec![x.to_f64_lossy(), y.to_f64_lossy()],
                    });
                }
                values.push(v);
            }
        }
        Ok(Self { n, values })
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> T {
        self.values[i * self.n + j]
    }
}

fn check_nonnegative<T: Scalar>(m: &DistMatrix<T>, pts: &[T], report: &mut ReportBuilder<T>) {
    for i in 0..m.n {
        for j in 0..m.n {
            // 0 <= q(x, y), written as -q <= 0
            report.check_le(&[pts[i], pts[j]], Some("nonnegative"), -m.at(i, j), T::zero());
        }
    }
}

/// Ordered-triple scan of `q(x,y) <= s (q(x,z) + q(z,y)) - q(z,z)`, parallel over `x`.
fn check_triangle<T: Scalar>(
    m: &DistMatrix<T>,
    pts: &[T],
    s: T,
    slack: T,
    clause: &str,
) -> (usize, Vec<Witness<T>>) {
    let n = m.n;
    let chunks: Vec<Vec<Witness<T>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut found = Vec::new();
            for j in 0..n {
                let lhs = m.at(i, j);
                for k in 0..n {
                    let rhs = s * (m.at(i, k) + m.at(k, j)) - m.at(k, k);
                    if lhs - rhs > slack {
                        found.push(Witness {
                            points: vec![pts[i], pts[j], pts[k]],
                            clause: Some(clause.to_owned()),
                            lhs,
                            rhs,
                            margin: lhs - rhs,
                        });
                    }
                }
            }
            found
        })
        .collect();
    (n * n * n, chunks.into_iter().flatten().collect())
}

/// Verifies the four quasi-partial b-metric axioms (plus nonnegativity) over `region`.
///
/// Clauses, each witnessed with `lhs <= rhs` semantics:
/// * `nonnegative`: `0 <= q(x,y)`;
/// * `axiom1`: `q(x,y) = q(x,x) = q(y,y)` forces `x = y`; witness `lhs = |x - y|`, `rhs = eq`;
/// * `axiom2`: `q(x,x) <= q(x,y)`;
/// * `axiom3`: `q(x,x) <= q(y,x)`;
/// * `axiom4`: `q(x,y) <= s (q(x,z) + q(z,y)) - q(z,z)` over ordered triples.
pub fn check_qpb_axioms<T: Scalar>(
    space: &QpbSpace<T>,
    region: &Region<T>,
    tol: &Tolerances<T>,
) -> Result<ViolationReport<T>> {
    require_nonempty(region)?;
    let pts = region.points();
    let m = DistMatrix::build(space.name(), |x, y| space.q(x, y), pts)?;
    let mut report = ReportBuilder::new("qpb_axioms", tol.slack);
    check_nonnegative(&m, pts, &mut report);
    for i in 0..m.n {
        for j in 0..m.n {
            let (x, y) = (pts[i], pts[j]);
            let (qxy, qxx, qyy) = (m.at(i, j), m.at(i, i), m.at(j, j));
            if i != j {
                report.count_checked(1);
                let separation = (x - y).abs();
                if (qxy - qxx).abs() <= tol.eq && (qxy - qyy).abs() <= tol.eq && separation > tol.eq {
                    report.push(&[x, y], Some("axiom1"), separation, tol.eq);
                }
            }
            report.check_le(&[x, y], Some("axiom2"), qxx, qxy);
            report.check_le(&[x, y], Some("axiom3"), qxx, m.at(j, i));
        }
    }
    let (checked, witnesses) = check_triangle(&m, pts, space.s(), tol.slack, "axiom4");
    report.absorb(checked, witnesses);
    Ok(report.finish())
}

/// Verifies the dislocated quasi-metric properties over `region`.
///
/// * `nonnegative`: `0 <= q(x,y)`;
/// * `dq1`: `q(x,y) = q(y,x) = 0` forces `x = y`; witness `lhs = |x - y|`, `rhs = eq`;
/// * `dq2`: `q(x,y) <= q(x,z) + q(z,y) - q(z,z)`.
pub fn check_dq_axioms<T: Scalar>(
    space: &DqSpace<T>,
    region: &Region<T>,
    tol: &Tolerances<T>,
) -> Result<ViolationReport<T>> {
    require_nonempty(region)?;
    let pts = region.points();
    let m = DistMatrix::build(&space.name, |x, y| space.q(x, y), pts)?;
    let mut report = ReportBuilder::new("dq_axioms", tol.slack);
    check_nonnegative(&m, pts, &mut report);
    for i in 0..m.n {
        for j in 0..m.n {
            if i == j {
                continue;
            }
            report.count_checked(1);
            let separation = (pts[i] - pts[j]).abs();
            if m.at(i, j).abs() <= tol.zero && m.at(j, i).abs() <= tol.zero && separation > tol.eq {
                report.push(&[pts[i], pts[j]], Some("dq1"), separation, tol.eq);
            }
        }
    }
    let (checked, witnesses) = check_triangle(&m, pts, T::one(), tol.slack, "dq2");
    report.absorb(checked, witnesses);
    Ok(report.finish())
}

fn require_nonempty<T: Scalar>(region: &Region<T>) -> Result<()> {
    if region.is_empty() {
        Err(QpbError::InvalidArgument("cannot check axioms on an empty region".into()))
    } else {
        Ok(())
    }
}

fn require_radius<T: Scalar>(radius: T) -> Result<()> {
    if radius >= T::zero() && radius.is_finite() {
        Ok(())
    } else {
        Err(QpbError::InvalidArgument(format!("radius must be finite and >= 0, got {radius}")))
    }
}

/// `{ y in candidates : q(center, y) <= radius }`. May be empty; the center
/// itself is excluded when `q(center, center) > radius`.
pub fn left_closed_ball<T: Scalar>(
    space: &QpbSpace<T>,
    center: T,
    radius: T,
    candidates: &Region<T>,
    tol: &Tolerances<T>,
) -> Result<Region<T>> {
    require_radius(radius)?;
    let mut points = Vec::new();
    for &y in candidates.points() {
        if space.dist(center, y)? <= radius + tol.slack {
            points.push(y);
        }
    }
    Ok(Region::ball(points))
}

/// `{ y in candidates : q(center, y) <= radius and q(y, center) <= radius }`.
pub fn closed_ball<T: Scalar>(
    space: &QpbSpace<T>,
    center: T,
    radius: T,
    candidates: &Region<T>,
    tol: &Tolerances<T>,
) -> Result<Region<T>> {
    require_radius(radius)?;
    let mut points = Vec::new();
    for &y in candidates.points() {
        let bound = radius + tol.slack;
        if space.dist(center, y)? <= bound && space.dist(y, center)? <= bound {
            points.push(y);
        }
    }
    Ok(Region::ball(points))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Separation {
    Identified,
    Separated,
}

/// Zero-distance identification: `x` and `y` are the same point iff `q(x, y) <= zero`.
pub fn separation<T: Scalar>(space: &QpbSpace<T>, x: T, y: T, tol: &Tolerances<T>) -> Separation {
    if space.q(x, y) <= tol.zero {
        Separation::Identified
    } else {
        Separation::Separated
    }
}
