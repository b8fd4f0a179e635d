//! Alternating iteration `x_{2n+1} = U x_{2n}`, `x_{2n+2} = V x_{2n+1}` towards a
//! common fixed point of `(U, V)`.
//!
//! The iteration stops once both one-sided successive distances drop below
//! `tol`; the final point is then classified with the zero-distance rule
//! applied to `q(x,Ux)`, `q(Ux,x)`, `q(x,Vx)`, `q(Vx,x)`. Self-distances are
//! not used for convergence since `q(x,x)` may be positive away from a fixed
//! point. Completeness of the ambient space cannot be established
//! numerically; the Cauchy diagnostics only summarise the computed tail.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::Region;
use crate::dominance::DominancePair;
use crate::error::{QpbError, Result};
use crate::hypothesis::Scenario;
use crate::report::{ReportBuilder, ViolationReport};
use crate::scalar::Scalar;
use crate::comparison::ComparisonFn;
use crate::space::{QpbSpace, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerEntry<T> {
    /// `max{q'_n, q_n}`.
    pub observed: T,
    /// `psi^n(max{q'_0, q_0})`.
    pub bound: T,
    pub satisfied: bool,
}

/// Iterates and their successive one-sided distances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace<T> {
    pub points: Vec<T>,
    /// `q_n = q(x_n, x_{n+1})`.
    pub q_fwd: Vec<T>,
    /// `q'_n = q(x_{n+1}, x_n)`.
    pub q_bwd: Vec<T>,
    /// `q''_n = q(x_n, x_n)`, one per point.
    pub q_self: Vec<T>,
    /// One entry per step; empty for traces built outside the solver.
    pub ledger: Vec<LedgerEntry<T>>,
    /// Left closed ball membership per point; empty when not tracked.
    pub ball_membership: Vec<bool>,
}

impl<T: Scalar> IterationTrace<T> {
    /// Trace of an arbitrary point sequence, without ledger or ball data.
    pub fn from_points(space: &QpbSpace<T>, points: Vec<T>) -> Result<Self> {
        let mut trace = Self {
            q_fwd: Vec::with_capacity(points.len()),
            q_bwd: Vec::with_capacity(points.len()),
            q_self: Vec::with_capacity(points.len()),
            points: Vec::with_capacity(points.len()),
            ledger: Vec::new(),
            ball_membership: Vec::new(),
        };
        for x in points {
            trace.push_point(space, x)?;
        }
        Ok(trace)
    }

    fn push_point(&mut self, space: &QpbSpace<T>, x: T) -> Result<()> {
        if let Some(&prev) = self.points.last() {
            self.q_fwd.push(space.dist(prev, x)?);
            self.q_bwd.push(space.dist(x, prev)?);
        }
        self.q_self.push(space.dist(x, x)?);
        self.points.push(x);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// One record per point; step quantities are absent on the final point.
    pub fn records(&self) -> Vec<TraceRecord<T>> {
        self.points
            .iter()
            .enumerate()
            .map(|(n, &x)| TraceRecord {
                n,
                x,
                q_fwd: self.q_fwd.get(n).copied(),
                q_bwd: self.q_bwd.get(n).copied(),
                q_self: self.q_self[n],
                psi_bound: self.ledger.get(n).map(|e| e.bound),
                in_ball: self.ball_membership.get(n).copied(),
            })
            .collect()
    }

    /// JSON lines, one object per point.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for record in self.records() {
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// CSV with header `n,x,q_fwd,q_bwd,q_self,psi_bound,in_ball`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        for record in self.records() {
            writer.serialize(record).map_err(std::io::Error::other)?;
        }
        if self.is_empty() {
            writer.write_record(TraceRecord::<T>::COLUMNS).map_err(std::io::Error::other)?;
        }
        writer.flush()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord<T> {
    pub n: usize,
    pub x: T,
    pub q_fwd: Option<T>,
    pub q_bwd: Option<T>,
    pub q_self: T,
    pub psi_bound: Option<T>,
    pub in_ball: Option<bool>,
}

impl<T> TraceRecord<T> {
    pub const COLUMNS: [&'static str; 7] = ["n", "x", "q_fwd", "q_bwd", "q_self", "psi_bound", "in_ball"];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    CommonFixedPoint,
    FixedPointOfUOnly,
    NoConvergence,
    LeftBallEscape,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residuals<T> {
    pub x_ux: T,
    pub ux_x: T,
    pub x_vx: T,
    pub vx_x: T,
}

impl<T: Scalar> Residuals<T> {
    fn at(scenario: &Scenario<T>, x: T) -> Result<Self> {
        let ux = scenario.apply_u(x)?;
        let vx = scenario.apply_v(x)?;
        Ok(Self {
            x_ux: scenario.q(x, ux)?,
            ux_x: scenario.q(ux, x)?,
            x_vx: scenario.q(x, vx)?,
            vx_x: scenario.q(vx, x)?,
        })
    }

    pub fn max(&self) -> T {
        self.x_ux.max(self.ux_x).max(self.x_vx).max(self.vx_x)
    }

    fn u_fixed(&self, zero: T) -> bool {
        self.x_ux <= zero && self.ux_x <= zero
    }

    fn v_fixed(&self, zero: T) -> bool {
        self.x_vx <= zero && self.vx_x <= zero
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchyDiagnostics<T> {
    pub tail: usize,
    /// `max q(x_m, x_n)` over tail indices `m <= n`.
    pub max_forward: T,
    /// `max q(x_n, x_m)` over tail indices `m <= n`.
    pub max_backward: T,
    pub tol: T,
    pub below_tol: bool,
}

/// Where the trajectory actually went, independent of the ball-wide reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord<T> {
    pub max_visited: T,
    /// `delta(x_n, x_{n+1}) >= phi(x_n, x_{n+1})` at every step.
    pub dominance_held: bool,
    pub dominance_failures: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult<T> {
    pub status: SolveStatus,
    pub limit: Option<T>,
    /// Index `n` of the step `(x_n, x_{n+1})` that met the stopping rule, or
    /// the number of steps taken otherwise.
    pub iterations: usize,
    /// Residuals at the final point of the trace.
    pub residuals: Residuals<T>,
    pub escape_index: Option<usize>,
    pub trace: IterationTrace<T>,
    pub cauchy: CauchyDiagnostics<T>,
    pub trajectory: TrajectoryRecord<T>,
}

const CAUCHY_TAIL: usize = 10;

/// Runs the alternating iteration from `scenario.x0`.
///
/// Stops when `max{q(x_n,x_{n+1}), q(x_{n+1},x_n)} <= tol`, when an iterate
/// leaves the left closed ball (exact predicate `q(x0, x) <= eps`), or after
/// `max_iter` steps.
pub fn iterate<T: Scalar>(scenario: &Scenario<T>, max_iter: usize, tol: T) -> Result<SolveResult<T>> {
    if max_iter == 0 {
        return Err(QpbError::InvalidArgument("max_iter must be >= 1".into()));
    }
    if tol.is_nan() || tol <= T::zero() {
        return Err(QpbError::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let slack = scenario.tol.slack;
    let mut trace = IterationTrace::from_points(&scenario.space, vec![scenario.x0])?;
    trace.ball_membership.push(scenario.in_ball(scenario.x0)?);
    let mut trajectory = TrajectoryRecord {
        max_visited: scenario.x0,
        dominance_held: true,
        dominance_failures: Vec::new(),
    };

    let mut status = SolveStatus::NoConvergence;
    let mut iterations = max_iter;
    let mut escape_index = None;
    let mut limit = None;
    let mut bound = T::zero();

    if !trace.ball_membership[0] {
        status = SolveStatus::LeftBallEscape;
        escape_index = Some(0);
        iterations = 0;
    } else {
        for n in 0..max_iter {
            let x = trace.points[n];
            let next = if n % 2 == 0 { scenario.apply_u(x)? } else { scenario.apply_v(x)? };
            trace.push_point(&scenario.space, next)?;
            trace.ball_membership.push(scenario.in_ball(next)?);
            trajectory.max_visited = trajectory.max_visited.max(next);
            if !scenario.dominance.dominates(x, next, slack) {
                trajectory.dominance_held = false;
                trajectory.dominance_failures.push(n);
            }

            let observed = trace.q_fwd[n].max(trace.q_bwd[n]);
            bound = if n == 0 { observed } else { scenario.psi.eval(bound) };
            trace.ledger.push(LedgerEntry {
                observed,
                bound,
                satisfied: observed <= bound + slack,
            });

            if !trace.ball_membership[n + 1] {
                status = SolveStatus::LeftBallEscape;
                escape_index = Some(n + 1);
                iterations = n + 1;
                break;
            }
            if observed <= tol {
                let r = Residuals::at(scenario, next)?;
                let zero = scenario.tol.zero;
                status = match (r.u_fixed(zero), r.v_fixed(zero)) {
                    (true, true) => SolveStatus::CommonFixedPoint,
                    (true, false) => SolveStatus::FixedPointOfUOnly,
                    _ => SolveStatus::NoConvergence,
                };
                if status != SolveStatus::NoConvergence {
                    limit = Some(next);
                }
                iterations = n;
                break;
            }
        }
    }

    let last = *trace.points.last().expect("trace holds x0");
    let residuals = Residuals::at(scenario, last)?;
    let cauchy = cauchy_diagnostics(&trace, &scenario.space, CAUCHY_TAIL, tol)?;
    Ok(SolveResult {
        status,
        limit,
        iterations,
        residuals,
        escape_index,
        trace,
        cauchy,
        trajectory,
    })
}

/// Recomputes `max{q'_n, q_n} <= psi^n(max{q'_0, q_0})` from the trace.
pub fn verify_ledger<T: Scalar>(
    trace: &IterationTrace<T>,
    psi: &ComparisonFn<T>,
    tol: &Tolerances<T>,
) -> Result<ViolationReport<T>> {
    if trace.is_empty() {
        return Err(QpbError::InvalidArgument("cannot verify the ledger of an empty trace".into()));
    }
    let mut report = ReportBuilder::new("psi_ledger", tol.slack);
    let steps = trace.q_fwd.len().min(trace.q_bwd.len());
    if steps == 0 {
        return Ok(report.finish());
    }
    let mut bound = trace.q_fwd[0].max(trace.q_bwd[0]);
    for n in 0..steps {
        if n > 0 {
            bound = psi.eval(bound);
        }
        let observed = trace.q_fwd[n].max(trace.q_bwd[n]);
        report.check_le(&[T::lit(n as f64)], None, observed, bound);
    }
    Ok(report.finish())
}

/// Maxima of `q(x_m, x_n)` and `q(x_n, x_m)` over the last `tail` points.
pub fn cauchy_diagnostics<T: Scalar>(
    trace: &IterationTrace<T>,
    space: &QpbSpace<T>,
    tail: usize,
    tol: T,
) -> Result<CauchyDiagnostics<T>> {
    let tail = tail.min(trace.len()).max(1.min(trace.len()));
    let pts = &trace.points[trace.len() - tail..];
    let (mut fwd, mut bwd) = (T::zero(), T::zero());
    for (i, &xm) in pts.iter().enumerate() {
        for &xn in &pts[i..] {
            fwd = fwd.max(space.dist(xm, xn)?);
            bwd = bwd.max(space.dist(xn, xm)?);
        }
    }
    Ok(CauchyDiagnostics {
        tail,
        max_forward: fwd,
        max_backward: bwd,
        tol,
        below_tol: fwd <= tol && bwd <= tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport<T> {
    pub starts: Vec<T>,
    pub statuses: Vec<SolveStatus>,
    /// Common fixed points found, deduplicated under the point tolerance.
    pub fixed_points: Vec<T>,
    /// `pairwise_guard[i][j]`: `delta >= phi` at `(fixed_points[i], fixed_points[j])`.
    pub pairwise_guard: Vec<Vec<bool>>,
    /// Every pair of distinct fixed points satisfies `delta >= phi`.
    pub unique_claim_applicable: bool,
    /// Applicable uniqueness claim yet several fixed points: the scenario
    /// violates some hypothesis.
    pub contradiction: bool,
}

/// Runs the solver from every start and compares the common fixed points found.
pub fn uniqueness_probe<T: Scalar>(
    scenario: &Scenario<T>,
    starts: &Region<T>,
    max_iter: usize,
    tol: T,
) -> Result<UniquenessReport<T>> {
    if starts.is_empty() {
        return Err(QpbError::InvalidArgument("uniqueness probe needs at least one start".into()));
    }
    let runs: Vec<Result<SolveResult<T>>> = starts
        .points()
        .par_iter()
        .map(|&x0| {
            let mut sc = scenario.clone();
            sc.x0 = x0;
            iterate(&sc, max_iter, tol)
        })
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;

    let mut fixed_points: Vec<T> = Vec::new();
    for run in &runs {
        if let (SolveStatus::CommonFixedPoint, Some(x)) = (run.status, run.limit) {
            if !fixed_points.iter().any(|&p| (p - x).abs() <= scenario.tol.eq) {
                fixed_points.push(x);
            }
        }
    }
    let slack = scenario.tol.slack;
    let pairwise_guard: Vec<Vec<bool>> = fixed_points
        .iter()
        .map(|&x| {
            fixed_points
                .iter()
                .map(|&y| (x - y).abs() <= scenario.tol.eq || scenario.dominance.dominates(x, y, slack))
                .collect()
        })
        .collect();
    let unique_claim_applicable = pairwise_guard.iter().flatten().all(|&g| g);
    Ok(UniquenessReport {
        starts: starts.points().to_vec(),
        statuses: runs.iter().map(|r| r.status).collect(),
        contradiction: unique_claim_applicable && fixed_points.len() > 1,
        fixed_points,
        pairwise_guard,
        unique_claim_applicable,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingleMapMode {
    /// `V := U` on the quasi-partial b-metric space.
    SingleMap,
    /// `V := U` on a metric space: `s = 1`, symmetric, zero self-distance.
    Metric,
    /// `V := U` with `phi` replaced by the constant 1.
    DeltaOnly,
}

/// Symmetry and zero self-distance over `region`, for metric mode.
pub fn check_metric_structure<T: Scalar>(
    space: &QpbSpace<T>,
    region: &Region<T>,
    tol: &Tolerances<T>,
) -> Result<ViolationReport<T>> {
    let mut report = ReportBuilder::new("metric_structure", tol.slack);
    let pts = region.points();
    for &x in pts {
        report.check_le(&[x], Some("zero_self_distance"), space.dist(x, x)?, T::zero());
        for &y in pts {
            // recorded in the order where q(x,y) exceeds q(y,x)
            report.check_le(&[x, y], Some("symmetry"), space.dist(x, y)?, space.dist(y, x)?);
        }
    }
    Ok(report.finish())
}

/// Single-map variants: the iteration with `V := U`.
///
/// Metric mode rejects, before solving, any space with `s != 1` or whose
/// distance is asymmetric or has positive self-distance on the ball grid.
pub fn solve_single_map<T: Scalar>(
    scenario: &Scenario<T>,
    mode: SingleMapMode,
    max_iter: usize,
    tol: T,
    resolution: usize,
) -> Result<SolveResult<T>> {
    let mut sc = scenario.clone();
    sc.v = sc.u.clone();
    match mode {
        SingleMapMode::SingleMap => {}
        SingleMapMode::DeltaOnly => sc.dominance = DominancePair::to_delta_only(&sc.dominance),
        SingleMapMode::Metric => {
            let ball = sc.materialize_ball(resolution)?;
            let report = check_metric_structure(&sc.space, &ball, &sc.tol)?;
            if sc.space.s() != T::one() {
                return Err(QpbError::MetricModeRejected {
                    reason: format!("coefficient s = {} but metric mode needs s = 1", sc.space.s()),
                    report: Box::new(report.to_f64()),
                });
            }
            if !report.passed {
                return Err(QpbError::MetricModeRejected {
                    reason: format!("distance {} is not a metric on the ball grid", sc.space.name()),
                    report: Box::new(report.to_f64()),
                });
            }
        }
    }
    iterate(&sc, max_iter, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adversarial_ledger_is_witnessed() {
        let trace = IterationTrace {
            points: vec![0.0, 1.0, 2.0, 3.0],
            q_fwd: vec![1.0, 1.0, 1.0],
            q_bwd: vec![0.0, 0.0, 0.0],
            q_self: vec![0.0; 4],
            ledger: Vec::new(),
            ball_membership: Vec::new(),
        };
        let psi = ComparisonFn::linear(1.0 / 6.0, 2.0);
        let r = verify_ledger(&trace, &psi, &Tolerances::default()).unwrap();
        let mut idx: Vec<f64> = r.witnesses.iter().map(|w| w.points[0]).collect();
        idx.sort_by(f64::total_cmp);
        assert_eq!(idx, vec![1.0, 2.0]);
    }

    #[test]
    fn constant_fixed_trace_passes_ledger() {
        let space = QpbSpace::<f64>::standard_metric();
        let trace = IterationTrace::from_points(&space, vec![0.0; 5]).unwrap();
        let psi = ComparisonFn::linear(1.0 / 6.0, 1.0);
        assert!(verify_ledger(&trace, &psi, &Tolerances::default()).unwrap().passed);
    }

    #[test]
    fn empty_trace_rejected() {
        let space = QpbSpace::<f64>::standard_metric();
        let trace = IterationTrace::from_points(&space, vec![]).unwrap();
        let psi = ComparisonFn::linear(0.5, 1.0);
        assert!(verify_ledger(&trace, &psi, &Tolerances::default()).is_err());
    }

    #[test]
    fn trace_lengths_consistent() {
        let space = QpbSpace::<f64>::standard_metric();
        let t = IterationTrace::from_points(&space, vec![1.0, 0.5, 0.25]).unwrap();
        assert_eq!(t.q_fwd.len(), t.len() - 1);
        assert_eq!(t.q_self.len(), t.len());
        let recs = t.records();
        assert_eq!(recs[2].q_fwd, None);
        assert_eq!(recs[0].q_fwd, Some(0.5));
    }

    #[test]
    fn csv_header_even_when_empty() {
        let space = QpbSpace::<f64>::standard_metric();
        let t = IterationTrace::from_points(&space, vec![]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,x,q_fwd,q_bwd,q_self,psi_bound,in_ball\n");
    }

    #[test]
    fn cauchy_tail_clamps() {
        let space = QpbSpace::<f64>::standard_metric();
        let t = IterationTrace::from_points(&space, vec![1.0, 0.0]).unwrap();
        let d = cauchy_diagnostics(&t, &space, 99, 1e-9).unwrap();
        assert_eq!(d.tail, 2);
        assert_eq!(d.max_forward, 1.0);
        assert!(!d.below_tol);
    }
}
