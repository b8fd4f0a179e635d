//! Hypotheses of the common fixed point theorem for a mapping pair `(U, V)`,
//! evaluated over the materialized left closed ball `B(x0, eps)`:
//!
//! 1. under the dominance guard, `max{q(Ux,Vy), q(Vy,Ux)} <= psi(M_s(x,y))`;
//! 2. `q(Vy,Ux) <= q(x,y)` for all pairs;
//! 3. `sum_{i<=j} s^{i+1} psi^i(t0) <= eps` for all `j`, with
//!    `t0 = max{q(x0,Ux0), q(Ux0,x0)}`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::comparison::{
    validate_monotone, validate_series, validate_strict_contraction, ComparisonFn, SeriesEvidence, SeriesVerdict,
    DEFAULT_J_MAX, DEFAULT_RATIO_BOUND,
};
use crate::domain::{Domain, Region};
use crate::dominance::{dominance_guard, is_locally_dominated, is_pair_triangular, DominancePair};
use crate::error::{QpbError, Result};
use crate::report::{ReportBuilder, ViolationReport};
use crate::scalar::Scalar;
use crate::space::{check_qpb_axioms, left_closed_ball, MapFn, QpbSpace, Tolerances};

/// A complete problem instance.
#[derive(Clone)]
pub struct Scenario<T> {
    pub name: String,
    pub space: QpbSpace<T>,
    pub u: MapFn<T>,
    pub v: MapFn<T>,
    pub dominance: DominancePair<T>,
    pub psi: ComparisonFn<T>,
    pub x0: T,
    pub epsilon: T,
    pub domain: Domain<T>,
    pub tol: Tolerances<T>,
}

impl<T: Scalar> Scenario<T> {
    pub fn builder(name: impl Into<String>) -> ScenarioBuilder<T> {
        ScenarioBuilder {
            name: name.into(),
            space: None,
            maps: None,
            dominance: None,
            psi: None,
            x0: None,
            epsilon: None,
            domain: None,
            tol: Tolerances::default(),
        }
    }

    fn apply(&self, which: &str, map: &MapFn<T>, x: T) -> Result<T> {
        let y = map(x);
        if self.domain.contains(y) {
            Ok(y)
        } else {
            Err(QpbError::OutsideDomain {
                map: which.to_owned(),
                input: x.to_f64_lossy(),
                output: y.to_f64_lossy(),
                domain: self.domain.to_string(),
            })
        }
    }

    /// `Ux`, rejecting images outside the domain.
    pub fn apply_u(&self, x: T) -> Result<T> {
        self.apply("U", &self.u, x)
    }

    /// `Vx`, rejecting images outside the domain.
    pub fn apply_v(&self, x: T) -> Result<T> {
        self.apply("V", &self.v, x)
    }

    pub fn q(&self, x: T, y: T) -> Result<T> {
        self.space.dist(x, y)
    }

    /// The left closed ball around `x0` with radius `epsilon`, sampled at `resolution`.
    pub fn materialize_ball(&self, resolution: usize) -> Result<Region<T>> {
        let grid = self.domain.sample(resolution, self.tol.eq)?;
        left_closed_ball(&self.space, self.x0, self.epsilon, &grid, &self.tol)
    }

    /// Exact membership in the left closed ball.
    pub fn in_ball(&self, x: T) -> Result<bool> {
        Ok(self.q(self.x0, x)? <= self.epsilon + self.tol.slack)
    }
}

impl<T: Scalar> fmt::Debug for Scenario<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Scenario")
            .field("name", &self.name)
            .field("space", &self.space)
            .field("psi", &self.psi)
            .field("x0", &self.x0)
            .field("epsilon", &self.epsilon)
            .field("domain", &self.domain.to_string())
            .finish()
    }
}

pub struct ScenarioBuilder<T> {
    name: String,
    space: Option<QpbSpace<T>>,
    maps: Option<(MapFn<T>, MapFn<T>)>,
    dominance: Option<DominancePair<T>>,
    psi: Option<ComparisonFn<T>>,
    x0: Option<T>,
    epsilon: Option<T>,
    domain: Option<Domain<T>>,
    tol: Tolerances<T>,
}

impl<T: Scalar> ScenarioBuilder<T> {
    pub fn space(mut self, space: QpbSpace<T>) -> Self {
        self.space = Some(space);
        self
    }

    pub fn maps(
        mut self,
        u: impl Fn(T) -> T + Send + Sync + 'static,
        v: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        self.maps = Some((Arc::new(u), Arc::new(v)));
        self
    }

    pub fn dominance(mut self, pair: DominancePair<T>) -> Self {
        self.dominance = Some(pair);
        self
    }

    pub fn psi(mut self, psi: ComparisonFn<T>) -> Self {
        self.psi = Some(psi);
        self
    }

    pub fn start(mut self, x0: T) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn radius(mut self, epsilon: T) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn domain(mut self, domain: Domain<T>) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn tolerances(mut self, tol: Tolerances<T>) -> Self {
        self.tol = tol;
        self
    }

    /// Validates `x0` in the domain, `epsilon > 0` and `space.s == psi.claimed_s`.
    pub fn build(self) -> Result<Scenario<T>> {
        let missing = |what: &str| QpbError::InvalidArgument(format!("scenario {}: missing {what}", self.name));
        let space = self.space.clone().ok_or_else(|| missing("space"))?;
        let (u, v) = self.maps.clone().ok_or_else(|| missing("maps"))?;
        let dominance = self.dominance.clone().ok_or_else(|| missing("dominance pair"))?;
        let psi = self.psi.clone().ok_or_else(|| missing("comparison function"))?;
        let x0 = self.x0.ok_or_else(|| missing("start point"))?;
        let epsilon = self.epsilon.ok_or_else(|| missing("radius"))?;
        let domain = self.domain.clone().ok_or_else(|| missing("domain"))?;
        if !domain.contains(x0) {
            return Err(QpbError::InvalidArgument(format!("x0 = {x0} outside domain {domain}")));
        }
        if epsilon.is_nan() || epsilon <= T::zero() || epsilon.is_infinite() {
            return Err(QpbError::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
        }
        if space.s() != psi.claimed_s() {
            return Err(QpbError::InvalidArgument(format!(
                "space coefficient {} differs from comparison function coefficient {}",
                space.s(),
                psi.claimed_s()
            )));
        }
        Ok(Scenario {
            name: self.name,
            space,
            u,
            v,
            dominance,
            psi,
            x0,
            epsilon,
            domain,
            tol: self.tol,
        })
    }
}

/// `max{ q(x,y), q(x,Ux), q(y,Vy), [q(x,Vy) + q(y,Ux) - q(x,x)] / (2s) }`.
pub fn m_s<T: Scalar>(scenario: &Scenario<T>, x: T, y: T) -> Result<T> {
    let ux = scenario.apply_u(x)?;
    let vy = scenario.apply_v(y)?;
    let q = |a, b| scenario.q(a, b);
    let two_s = (T::one() + T::one()) * scenario.space.s();
    let cross = (q(x, vy)? + q(y, ux)? - q(x, x)?) / two_s;
    Ok(q(x, y)?.max(q(x, ux)?).max(q(y, vy)?).max(cross))
}

/// Contraction condition over ordered pairs that pass the dominance guard.
///
/// Guard-failing pairs are skipped and counted in `skipped`.
/// Witness: `lhs = max{q(Ux,Vy), q(Vy,Ux)}`, `rhs = psi(M_s(x,y))`.
pub fn check_condition_1<T: Scalar>(scenario: &Scenario<T>, region: &Region<T>) -> Result<ViolationReport<T>> {
    let mut report = ReportBuilder::new("condition_1", scenario.tol.slack);
    report.enable_skip_count();
    for &x in region.points() {
        let ux = scenario.apply_u(x)?;
        for &y in region.points() {
            if !dominance_guard(&scenario.dominance, x, y, &scenario.tol) {
                report.skip();
                continue;
            }
            let vy = scenario.apply_v(y)?;
            let lhs = scenario.q(ux, vy)?.max(scenario.q(vy, ux)?);
            let rhs = scenario.psi.eval(m_s(scenario, x, y)?);
            report.check_le(&[x, y], None, lhs, rhs);
        }
    }
    Ok(report.finish())
}

/// `q(Vy, Ux) <= q(x, y)` over all ordered pairs.
pub fn check_condition_2<T: Scalar>(scenario: &Scenario<T>, region: &Region<T>) -> Result<ViolationReport<T>> {
    let mut report = ReportBuilder::new("condition_2", scenario.tol.slack);
    for &x in region.points() {
        let ux = scenario.apply_u(x)?;
        for &y in region.points() {
            let vy = scenario.apply_v(y)?;
            report.check_le(&[x, y], None, scenario.q(vy, ux)?, scenario.q(x, y)?);
        }
    }
    Ok(report.finish())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusEvidence<T> {
    /// `max{q(x0,Ux0), q(Ux0,x0)}`.
    pub t0: T,
    /// `sum_{i<=j} s^{i+1} psi^i(t0)` for `j = 0..=j_max`.
    pub partial_sums: Vec<T>,
    pub bound: T,
    pub passed: bool,
    /// First `j` whose partial sum exceeds the bound.
    pub first_failure: Option<usize>,
}

/// Radius condition: every partial sum of `s^{i+1} psi^i(t0)` stays within `epsilon`.
pub fn check_condition_3<T: Scalar>(scenario: &Scenario<T>, j_max: usize) -> Result<RadiusEvidence<T>> {
    let x0 = scenario.x0;
    let ux0 = scenario.apply_u(x0)?;
    let t0 = scenario.q(x0, ux0)?.max(scenario.q(ux0, x0)?);
    let s = scenario.space.s();
    let bound = scenario.epsilon;
    let mut partial_sums = Vec::with_capacity(j_max + 1);
    let (mut iterate, mut weight, mut acc) = (t0, s, T::zero());
    let mut first_failure = None;
    for j in 0..=j_max {
        if j > 0 {
            iterate = scenario.psi.eval(iterate);
            weight = weight * s;
        }
        acc = acc + weight * iterate;
        if !acc.is_finite() {
            return Err(QpbError::NonFinite {
                what: format!("radius partial sum {j}"),
                points: vec![x0.to_f64_lossy()],
            });
        }
        if first_failure.is_none() && acc > bound + scenario.tol.slack {
            first_failure = Some(j);
        }
        partial_sums.push(acc);
    }
    Ok(RadiusEvidence {
        t0,
        partial_sums,
        bound,
        passed: first_failure.is_none(),
        first_failure,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiReport<T> {
    pub monotone: ViolationReport<T>,
    pub strict_contraction: ViolationReport<T>,
    pub series: SeriesEvidence<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Passed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositeReport<T> {
    pub scenario: String,
    pub ball_size: usize,
    pub axioms: ViolationReport<T>,
    #[serde(rename = "dominance_U")]
    pub dominance_u: ViolationReport<T>,
    #[serde(rename = "dominance_V")]
    pub dominance_v: ViolationReport<T>,
    pub triangular: ViolationReport<T>,
    pub psi: PsiReport<T>,
    pub cond1: ViolationReport<T>,
    pub cond2: ViolationReport<T>,
    pub cond3: RadiusEvidence<T>,
    pub verdict: Verdict,
}

impl<T: Scalar> CompositeReport<T> {
    /// `(name, passed)` for every constituent check, in report order.
    pub fn summary(&self) -> Vec<(&'static str, bool)> {
        vec![
            ("axioms", self.axioms.passed),
            ("dominance_U", self.dominance_u.passed),
            ("dominance_V", self.dominance_v.passed),
            ("triangular", self.triangular.passed),
            ("psi_monotone", self.psi.monotone.passed),
            ("psi_strict_contraction", self.psi.strict_contraction.passed),
            ("psi_series", self.psi.series.verdict == SeriesVerdict::ConvergentEvidence),
            ("cond1", self.cond1.passed),
            ("cond2", self.cond2.passed),
            ("cond3", self.cond3.passed),
        ]
    }
}

/// Runs every check of the theorem's hypotheses on the ball materialized at `resolution`.
pub fn check_all<T: Scalar>(scenario: &Scenario<T>, resolution: usize) -> Result<CompositeReport<T>> {
    check_all_with(scenario, resolution, DEFAULT_J_MAX)
}

pub fn check_all_with<T: Scalar>(scenario: &Scenario<T>, resolution: usize, j_max: usize) -> Result<CompositeReport<T>> {
    let tol = &scenario.tol;
    let ball = scenario.materialize_ball(resolution)?;
    if ball.is_empty() {
        return Err(QpbError::InvalidArgument(format!(
            "left closed ball around {} with radius {} is empty at resolution {resolution}",
            scenario.x0, scenario.epsilon
        )));
    }
    let axioms = check_qpb_axioms(&scenario.space, &ball, tol)?;
    let u = |x| (scenario.u)(x);
    let v = |x| (scenario.v)(x);
    let dominance_u = is_locally_dominated(&scenario.dominance, "U", &u, &scenario.domain, &ball, tol)?;
    let dominance_v = is_locally_dominated(&scenario.dominance, "V", &v, &scenario.domain, &ball, tol)?;
    let triangular = is_pair_triangular(&scenario.dominance, &ball, tol);

    // psi is applied to distance values on the ball: check it there
    let mut grid = vec![T::zero()];
    for &x in ball.points() {
        for &y in ball.points() {
            grid.push(scenario.q(x, y)?);
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    grid.dedup();
    let positive: Vec<T> = grid.iter().copied().filter(|&t| t > T::zero()).collect();
    let cond3 = check_condition_3(scenario, j_max)?;
    let psi = PsiReport {
        monotone: validate_monotone(&scenario.psi, &grid, tol)?,
        strict_contraction: validate_strict_contraction(&scenario.psi, &positive, tol),
        series: validate_series(&scenario.psi, cond3.t0, j_max.max(2), T::lit(DEFAULT_RATIO_BOUND), tol)?,
    };

    let mut report = CompositeReport {
        scenario: scenario.name.clone(),
        ball_size: ball.len(),
        axioms,
        dominance_u,
        dominance_v,
        triangular,
        psi,
        cond1: check_condition_1(scenario, &ball)?,
        cond2: check_condition_2(scenario, &ball)?,
        cond3,
        verdict: Verdict::Failed,
    };
    if report.summary().iter().all(|(_, ok)| *ok) {
        report.verdict = Verdict::Passed;
    }
    Ok(report)
}
