use approx::assert_abs_diff_eq;
use qpb_core::catalog::{example1_delta, example1_distance, example1_phi, example1_u, example1_v};
use qpb_core::comparison::ComparisonFn;
use qpb_core::hypothesis::{check_all, check_condition_1, check_condition_2, check_condition_3, m_s, Verdict};
use qpb_core::solver::{iterate, solve_single_map, uniqueness_probe, verify_ledger, SingleMapMode, SolveStatus};
use qpb_core::{
    check_dq_axioms, check_qpb_axioms, closed_ball, example1, find, is_locally_dominated, is_pair_triangular,
    left_closed_ball, separation, DominancePair, DqSpace, QpbError, Region, Scenario, Separation, Tolerances,
};

fn tol() -> Tolerances<f64> {
    Tolerances::default()
}

fn ex1() -> Scenario<f64> {
    example1::<f64>().scenario
}

#[test]
fn branch_evaluations() {
    let sc = ex1();
    assert_eq!(sc.q(1.0, 3.0).unwrap(), 4.0);
    assert_eq!(sc.q(3.0, 1.0).unwrap(), 9.0);
    assert_eq!(sc.q(4.5, 3.0).unwrap(), 13.5);
    assert_eq!(sc.q(2.0, 2.0).unwrap(), 2.0);
}

#[test]
fn axioms_hold_at_two_and_fail_at_one() {
    let sc = ex1();
    for res in [11, 41] {
        let grid = sc.domain.sample(res, 1e-9).unwrap();
        assert!(grid.contains(4.0, 1e-12));
        let r = check_qpb_axioms(&sc.space, &grid, &tol()).unwrap();
        assert!(r.passed, "resolution {res}: {:?}", r.witnesses.first());
    }
    let grid = Region::explicit(vec![4.1, 4.5, 4.9], 1e-9).unwrap();
    let r = check_qpb_axioms(&sc.space.with_coefficient(1.0).unwrap(), &grid, &tol()).unwrap();
    let w = r
        .witnesses
        .iter()
        .find(|w| w.points == vec![4.1, 4.9, 4.5])
        .expect("B triple witness");
    assert_abs_diff_eq!(w.lhs, 0.64, epsilon = 1e-12);
    assert_abs_diff_eq!(w.rhs, 0.32, epsilon = 1e-12);
    assert_abs_diff_eq!(w.margin, 0.32, epsilon = 1e-12);
}

#[test]
fn axiom_witnesses_below_two() {
    let sc = ex1();
    let grid = sc.domain.sample(11, 1e-9).unwrap();
    let r = check_qpb_axioms(&sc.space.with_coefficient(1.9).unwrap(), &grid, &tol()).unwrap();
    assert!(!r.passed);
}

#[test]
fn dq_view_on_b_is_witnessed() {
    let dq = DqSpace::new("B", example1_distance::<f64>);
    let grid = Region::linspace(4.1, 4.9, 9).unwrap();
    let r = check_dq_axioms(&dq, &grid, &tol()).unwrap();
    assert!(!r.passed);
    // (x-y)^2 <= (x-z)^2 + (z-y)^2 fails exactly when z lies strictly between x and y
    let pts = grid.points();
    let mut expected = 0;
    for &x in pts {
        for &y in pts {
            for &z in pts {
                if (x < z && z < y) || (y < z && z < x) {
                    expected += 1;
                }
            }
        }
    }
    assert_eq!(expected, 168);
    assert_eq!(r.witnesses.len(), expected);
}

#[test]
fn ball_identity_and_closed_ball() {
    let sc = ex1();
    let grid = sc.domain.sample(41, 1e-9).unwrap();
    let ball = left_closed_ball(&sc.space, 0.5, 4.5, &grid, &tol()).unwrap();
    let a: Vec<f64> = grid.points().iter().copied().filter(|&x| x <= 4.0).collect();
    assert_eq!(ball.points(), a.as_slice());

    let closed = closed_ball(&sc.space, 0.5, 4.5, &grid, &tol()).unwrap();
    assert!(closed.points().iter().all(|&y| y <= 1.5 + 1e-12));
    assert!(closed.contains(1.5, 1e-12));

    let small = left_closed_ball(&sc.space, 0.5, 1.0, &grid, &tol()).unwrap();
    assert_eq!(small.points(), &[0.5]);
}

#[test]
fn separation_on_diagonal() {
    let sc = ex1();
    assert_eq!(separation(&sc.space, 0.0, 0.0, &tol()), Separation::Identified);
    assert_eq!(separation(&sc.space, 4.5, 4.5, &tol()), Separation::Identified);
    assert_eq!(separation(&sc.space, 2.0, 2.0, &tol()), Separation::Separated);
    assert_eq!(separation(&sc.space, 1.0, 3.0, &tol()), Separation::Separated);
}

#[test]
fn dominance_fails_near_four() {
    let sc = ex1();
    let ball = sc.materialize_ball(41).unwrap();
    let r = is_locally_dominated(&sc.dominance, "U", &|x| example1_u(x), &sc.domain, &ball, &tol()).unwrap();
    let w = r.witnesses.iter().find(|w| w.points[0] == 4.0).expect("x = 4 witness");
    let u4 = (2.0f64).sin() / 6.0;
    assert_abs_diff_eq!(w.rhs, ((4.0 + u4) / 4.0).cos(), epsilon = 1e-12);
    assert_abs_diff_eq!(w.lhs, ((4.0 + u4) / 4.0).sin(), epsilon = 1e-12);
    assert_abs_diff_eq!(w.rhs, 0.5083, epsilon = 5e-4);
    assert_abs_diff_eq!(w.lhs, 0.8612, epsilon = 5e-4);
    // low end of the ball is dominated
    assert!(r.witnesses.iter().all(|w| w.points[0] > 2.9));

    let rv = is_locally_dominated(&sc.dominance, "V", &|x| example1_v(x), &sc.domain, &ball, &tol()).unwrap();
    assert!(!rv.passed);
}

#[test]
fn triangularity_fails_on_ball() {
    let sc = ex1();
    let region = Region::linspace(0.0, 2.5, 11).unwrap();
    let r = is_pair_triangular(&sc.dominance, &region, &tol());
    assert!(r.witnesses.iter().any(|w| w.points == vec![2.5, 0.0, 2.5]));
}

#[test]
fn m_s_values() {
    let sc = ex1();
    assert_eq!(m_s(&sc, 0.0, 0.0).unwrap(), 0.0);
    // q(4,4) = 4 and q(4,U4) = max{8, U4} + 4 = 12
    assert_abs_diff_eq!(m_s(&sc, 4.0, 4.0).unwrap(), 12.0, epsilon = 1e-12);
    let direct = {
        let (x, y) = (0.5, 0.5);
        let (ux, vy) = (example1_u(x), example1_v(y));
        let q = example1_distance::<f64>;
        q(x, y).max(q(x, ux)).max(q(y, vy)).max((q(x, vy) + q(y, ux) - q(x, x)) / 4.0)
    };
    assert_eq!(m_s(&sc, 0.5, 0.5).unwrap(), direct);
    assert_abs_diff_eq!(direct, 1.5, epsilon = 1e-12);
}

#[test]
fn contraction_conditions_hold_on_ball() {
    let sc = ex1();
    let ball = sc.materialize_ball(41).unwrap();
    let c1 = check_condition_1(&sc, &ball).unwrap();
    assert!(c1.passed);
    assert!(c1.skipped.unwrap() > 0);
    assert_eq!(c1.checked + c1.skipped.unwrap(), ball.len() * ball.len());
    let c2 = check_condition_2(&sc, &ball).unwrap();
    assert!(c2.passed);
    assert_eq!(c2.checked, ball.len() * ball.len());

    let q = example1_distance::<f64>;
    assert_abs_diff_eq!(q(example1_v(2.0), example1_u(1.0)), 0.549306144334, epsilon = 1e-9);
}

#[test]
fn identity_maps_violate_condition_1() {
    let mut sc = ex1();
    sc.u = std::sync::Arc::new(|x| x);
    sc.v = std::sync::Arc::new(|x| x);
    sc.dominance = DominancePair::constant(1.0, 0.0);
    let region = Region::explicit(vec![1.0, 3.0], 1e-9).unwrap();
    let r = check_condition_1(&sc, &region).unwrap();
    let w = r.witnesses.iter().find(|w| w.points == vec![1.0, 3.0]).unwrap();
    assert_eq!(w.lhs, 9.0);
    // M_s(1,3) = max{4, 1, 3, (4 + 9 - 1)/4} = 4
    assert_abs_diff_eq!(w.rhs, 4.0 / 6.0, epsilon = 1e-12);
}

#[test]
fn empty_guard_is_vacuous() {
    let mut sc = ex1();
    sc.dominance = DominancePair::constant(0.0, 1.0);
    let ball = sc.materialize_ball(11).unwrap();
    let r = check_condition_1(&sc, &ball).unwrap();
    assert!(r.passed);
    assert_eq!(r.checked, 0);
    assert_eq!(r.skipped, Some(ball.len() * ball.len()));
}

#[test]
fn radius_partial_sums() {
    let sc = ex1();
    let r = check_condition_3(&sc, 64).unwrap();
    assert_abs_diff_eq!(r.t0, 1.5, epsilon = 1e-12);
    assert_abs_diff_eq!(r.partial_sums[0], 3.0, epsilon = 1e-12);
    assert_abs_diff_eq!(r.partial_sums[1], 4.0, epsilon = 1e-12);
    assert_abs_diff_eq!(r.partial_sums[2], 13.0 / 3.0, epsilon = 1e-12);
    assert!(r.passed);

    let mut tight = ex1();
    tight.epsilon = 4.0;
    let r = check_condition_3(&tight, 64).unwrap();
    assert_eq!(r.first_failure, Some(2));

    let mut at_zero = ex1();
    at_zero.x0 = 0.0;
    let r = check_condition_3(&at_zero, 10).unwrap();
    assert!(r.partial_sums.iter().all(|&s| s == 0.0));
}

#[test]
fn composite_check_reports_dominance_only() {
    let sc = ex1();
    let report = check_all(&sc, 41).unwrap();
    assert_eq!(report.verdict, Verdict::Failed);
    assert!(report.axioms.passed);
    assert!(report.cond1.passed && report.cond2.passed && report.cond3.passed);
    assert!(report.psi.monotone.passed && report.psi.strict_contraction.passed);
    assert!(!report.dominance_u.passed);
    let json = serde_json::to_value(&report).unwrap();
    assert!(json.get("dominance_U").is_some());
}

#[test]
fn converges_to_zero() {
    let sc = ex1();
    let r = iterate(&sc, 10_000, 1e-9).unwrap();
    assert_eq!(r.status, SolveStatus::CommonFixedPoint);
    assert!(r.limit.unwrap().abs() <= 1e-8);
    assert!(r.residuals.max() <= 1e-9);
    assert!(r.iterations <= 100);
    assert!(r.trace.ball_membership.iter().all(|&b| b));
    assert!(r.trajectory.dominance_held);
    assert!(r.trajectory.max_visited <= 0.5);
    for (n, e) in r.trace.ledger.iter().enumerate() {
        assert!(e.observed <= 1.5 * (1.0f64 / 6.0).powi(n as i32) + 1e-12, "step {n}");
    }
    assert!(verify_ledger(&r.trace, &sc.psi, &tol()).unwrap().passed);
}

#[test]
fn iteration_alternates_maps() {
    let sc = ex1();
    let r = iterate(&sc, 3, 1e-300).unwrap();
    let x = &r.trace.points;
    assert_eq!(x[1], example1_u(0.5));
    assert_eq!(x[2], example1_v(x[1]));
    assert_eq!(x[3], example1_u(x[2]));
    assert_eq!(r.status, SolveStatus::NoConvergence);
}

#[test]
fn one_iteration_does_not_converge() {
    let r = iterate(&ex1(), 1, 1e-9).unwrap();
    assert_eq!(r.status, SolveStatus::NoConvergence);
    assert_eq!(r.iterations, 1);
}

#[test]
fn escape_from_ball_is_reported() {
    let mut sc = ex1();
    sc.epsilon = 1.0;
    let r = iterate(&sc, 100, 1e-9).unwrap();
    assert_eq!(r.status, SolveStatus::LeftBallEscape);
    // x0 itself is in the ball since q(0.5, 0.5) = 0.5; its image is not
    assert_eq!(r.escape_index, Some(1));
}

#[test]
fn u_only_fixed_point() {
    // U fixes 0, V = x + 0.5 does not
    let mut sc = ex1();
    sc.v = std::sync::Arc::new(|x: f64| if x == 0.0 { 0.5 } else { x });
    sc.u = std::sync::Arc::new(|_| 0.0);
    sc.x0 = 0.0;
    let r = iterate(&sc, 10, 1e-9).unwrap();
    assert_eq!(r.status, SolveStatus::FixedPointOfUOnly);
}

#[test]
fn cauchy_diagnostics_on_converged_tail() {
    let sc = ex1();
    let r = iterate(&sc, 10_000, 1e-9).unwrap();
    let d = qpb_core::cauchy_diagnostics(&r.trace, &sc.space, 10, 1e-9).unwrap();
    assert_eq!(d.tail, r.trace.len().min(10));
    let pts = &r.trace.points[r.trace.len() - d.tail..];
    let mut fwd: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i..pts.len() {
            fwd = fwd.max(example1_distance(pts[i], pts[j]));
        }
    }
    assert_eq!(d.max_forward, fwd);
    // the first points of the tail are still far from 0 at this trace length
    let strict = qpb_core::cauchy_diagnostics(&r.trace, &sc.space, 4, 1e-6).unwrap();
    assert!(strict.below_tol);

    let constant = qpb_core::IterationTrace::from_points(&sc.space, vec![2.0; 5]).unwrap();
    let d = qpb_core::cauchy_diagnostics(&constant, &sc.space, 10, 1e-9).unwrap();
    assert_eq!(d.max_forward, 2.0);
    assert_eq!(d.max_backward, 2.0);
}

#[test]
fn cauchy_without_limit_in_b() {
    let sc = ex1();
    let pts: Vec<f64> = (2..40).map(|n| 5.0 - 1.0 / n as f64).collect();
    let trace = qpb_core::IterationTrace::from_points(&sc.space, pts).unwrap();
    let d = qpb_core::cauchy_diagnostics(&trace, &sc.space, 10, 1e-3).unwrap();
    assert!(d.below_tol);
    assert!(!sc.domain.contains(5.0));
}

#[test]
fn uniqueness_from_several_starts() {
    let sc = ex1();
    let starts = Region::explicit(vec![0.0, 0.25, 0.5, 1.0, 2.0], 1e-9).unwrap();
    let r = uniqueness_probe(&sc, &starts, 10_000, 1e-9).unwrap();
    assert_eq!(r.fixed_points.len(), 1);
    assert!(r.fixed_points[0].abs() <= 1e-8);
    assert!(!r.contradiction);

    let single = Region::explicit(vec![0.5], 1e-9).unwrap();
    let r = uniqueness_probe(&sc, &single, 10_000, 1e-9).unwrap();
    assert_eq!(r.fixed_points.len(), 1);
    assert_eq!(r.pairwise_guard, vec![vec![true]]);
}

#[test]
fn identity_maps_flag_contradiction() {
    let mut sc = ex1();
    sc.u = std::sync::Arc::new(|x| x);
    sc.v = std::sync::Arc::new(|x| x);
    sc.dominance = DominancePair::constant(1.0, 0.0);
    // only points with zero self-distance are identified as fixed
    let starts = Region::explicit(vec![0.0, 4.2, 4.6], 1e-9).unwrap();
    let r = uniqueness_probe(&sc, &starts, 10, 1e-9).unwrap();
    assert_eq!(r.fixed_points.len(), 3);
    assert!(r.unique_claim_applicable);
    assert!(r.contradiction);
}

#[test]
fn single_map_modes() {
    let sc = ex1();
    let r = solve_single_map(&sc, SingleMapMode::SingleMap, 10_000, 1e-9, 41).unwrap();
    assert_eq!(r.status, SolveStatus::CommonFixedPoint);
    assert!(r.limit.unwrap().abs() <= 1e-8);

    let r = solve_single_map(&sc, SingleMapMode::DeltaOnly, 10_000, 1e-9, 41).unwrap();
    assert_eq!(r.status, SolveStatus::CommonFixedPoint);

    let mut metric_s = ex1();
    metric_s.space = metric_s.space.with_coefficient(1.0).unwrap();
    metric_s.psi = ComparisonFn::linear(1.0 / 6.0, 1.0);
    match solve_single_map(&metric_s, SingleMapMode::Metric, 100, 1e-9, 11) {
        Err(QpbError::MetricModeRejected { report, .. }) => {
            assert!(report.witnesses.iter().any(|w| w.points == vec![3.0, 1.0] && w.lhs == 9.0 && w.rhs == 4.0));
        }
        other => panic!("expected rejection, got {other:?}"),
    }
    assert!(matches!(
        solve_single_map(&sc, SingleMapMode::Metric, 100, 1e-9, 11),
        Err(QpbError::MetricModeRejected { .. })
    ));

    let banach = find::<f64>("banach-control").unwrap().scenario;
    let r = solve_single_map(&banach, SingleMapMode::Metric, 100, 1e-9, 41).unwrap();
    assert_eq!(r.status, SolveStatus::CommonFixedPoint);
    assert!(r.iterations <= 40);
    assert!(r.limit.unwrap().abs() <= 1e-9);
}

#[test]
fn dominance_functions_on_a() {
    assert_eq!(example1_delta(1.0, 1.0), 0.5f64.cos());
    assert_eq!(example1_phi(1.0, 1.0), 0.5f64.sin());
    assert_eq!(example1_delta(4.5, 1.0), 5.5f64.ln());
    assert_eq!(example1_phi(4.5, 1.0), 5.5f64.exp());
}
