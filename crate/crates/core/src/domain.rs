//! Point domains on the real line and the finite regions sampled from them.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::error::{QpbError, Result};
use crate::scalar::Scalar;

/// Interval with independently open or closed endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T, lo_closed: bool, hi_closed: bool) -> Self {
        Self {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }

    pub fn closed(lo: T, hi: T) -> Self {
        Self::new(lo, hi, true, true)
    }

    pub fn open(lo: T, hi: T) -> Self {
        Self::new(lo, hi, false, false)
    }

    pub fn closed_open(lo: T, hi: T) -> Self {
        Self::new(lo, hi, true, false)
    }

    pub fn open_closed(lo: T, hi: T) -> Self {
        Self::new(lo, hi, false, true)
    }

    pub fn contains(&self, x: T) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    /// Evenly spaced points with roughly `resolution` points per unit length.
    ///
    /// The interval is cut into `n = ceil(len * (resolution - 1))` segments;
    /// closed endpoints are emitted exactly, open endpoints never.
    fn sample(&self, resolution: usize) -> Vec<T> {
        let len = self.hi - self.lo;
        if len <= T::zero() {
            return if len == T::zero() && self.lo_closed && self.hi_closed {
                vec![self.lo]
            } else {
                Vec::new()
            };
        }
        let per_unit = T::lit((resolution - 1) as f64);
        let mut n = (len * per_unit).ceil().to_usize().unwrap_or(1).max(1);
        if !self.lo_closed && !self.hi_closed && n < 2 {
            n = 2;
        }
        let first = if self.lo_closed { 0 } else { 1 };
        let last = if self.hi_closed { n } else { n - 1 };
        let denom = T::lit(n as f64);
        (first..=last)
            .map(|k| {
                if k == n {
                    self.hi
                } else {
                    self.lo + len * T::lit(k as f64) / denom
                }
            })
            .collect()
    }
}

impl<T: Scalar> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// Finite union of intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain<T> {
    pieces: Vec<Interval<T>>,
}

impl<T: Scalar> Domain<T> {
    pub fn new(pieces: Vec<Interval<T>>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(QpbError::InvalidArgument("domain needs at least one interval".into()));
        }
        if pieces.iter().any(|p| !p.lo.is_finite() || !p.hi.is_finite() || p.lo > p.hi) {
            return Err(QpbError::InvalidArgument("domain intervals must be finite with lo <= hi".into()));
        }
        Ok(Self { pieces })
    }

    pub fn interval(piece: Interval<T>) -> Self {
        Self::new(vec![piece]).expect("single finite interval")
    }

    pub fn pieces(&self) -> &[Interval<T>] {
        &self.pieces
    }

    pub fn contains(&self, x: T) -> bool {
        x.is_finite() && self.pieces.iter().any(|p| p.contains(x))
    }

    /// Samples every piece at `resolution` points per unit length.
    pub fn sample(&self, resolution: usize, eq_tol: T) -> Result<Region<T>> {
        if resolution < 2 {
            return Err(QpbError::InvalidArgument(format!(
                "resolution must be at least 2 points per unit, got {resolution}"
            )));
        }
        let points: Vec<T> = self.pieces.iter().flat_map(|p| p.sample(resolution)).collect();
        Region::explicit(points, eq_tol)
    }
}

impl<T: Scalar> fmt::Display for Domain<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.pieces.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∪ ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionSource {
    ExplicitGrid,
    MaterializedBall,
}

/// Finite, ascending, duplicate-free set of points.
///
/// Explicit grids are never empty. A materialized ball may be empty when no
/// candidate lies within the radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Region<T> {
    points: Vec<T>,
    source: RegionSource,
}

impl<T: Scalar> Region<T> {
    /// Sorts, deduplicates under `eq_tol` and rejects empty or non-finite input.
    pub fn explicit(mut points: Vec<T>, eq_tol: T) -> Result<Self> {
        if let Some(bad) = points.iter().find(|p| !p.is_finite()) {
            return Err(QpbError::NonFinite {
                what: "region point".into(),
                points: vec![bad.to_f64_lossy()],
            });
        }
        points.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        points.dedup_by(|b, a| (*b - *a).abs() <= eq_tol);
        if points.is_empty() {
            return Err(QpbError::InvalidArgument("region must be nonempty".into()));
        }
        Ok(Self {
            points,
            source: RegionSource::ExplicitGrid,
        })
    }

    /// `count` evenly spaced points covering `[lo, hi]` inclusive.
    pub fn linspace(lo: T, hi: T, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(QpbError::InvalidArgument("linspace needs at least one point".into()));
        }
        if count == 1 {
            return Self::explicit(vec![lo], T::zero());
        }
        let steps = T::lit((count - 1) as f64);
        let points = (0..count)
            .map(|k| {
                if k == count - 1 {
                    hi
                } else {
                    lo + (hi - lo) * T::lit(k as f64) / steps
                }
            })
            .collect();
        Self::explicit(points, T::zero())
    }

    pub(crate) fn ball(points: Vec<T>) -> Self {
        Self {
            points,
            source: RegionSource::MaterializedBall,
        }
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn source(&self) -> RegionSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, x: T, eq_tol: T) -> bool {
        self.points.iter().any(|p| (*p - x).abs() <= eq_tol)
    }

    pub fn max(&self) -> Option<T> {
        self.points.last().copied()
    }
}
