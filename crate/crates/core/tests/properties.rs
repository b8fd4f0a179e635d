use proptest::prelude::*;

use qpb_core::comparison::ComparisonFn;
use qpb_core::hypothesis::{check_condition_3, m_s};
use qpb_core::solver::{iterate, verify_ledger, SolveStatus};
use qpb_core::{closed_ball, example1, left_closed_ball, psi_iterate, Domain, Interval, Region, Tolerances};

fn tol() -> Tolerances<f64> {
    Tolerances::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ball_monotone_in_radius(center in 0.0f64..4.999, r1 in 0.0f64..20.0, extra in 0.0f64..10.0) {
        let sc = example1::<f64>().scenario;
        let grid = sc.domain.sample(11, 1e-9).unwrap();
        let small = left_closed_ball(&sc.space, center, r1, &grid, &tol()).unwrap();
        let large = left_closed_ball(&sc.space, center, r1 + extra, &grid, &tol()).unwrap();
        for &p in small.points() {
            prop_assert!(large.contains(p, 0.0));
        }
    }

    #[test]
    fn left_ball_contains_closed_ball(center in 0.0f64..4.999, r in 0.0f64..20.0) {
        let sc = example1::<f64>().scenario;
        let grid = sc.domain.sample(11, 1e-9).unwrap();
        let left = left_closed_ball(&sc.space, center, r, &grid, &tol()).unwrap();
        let closed = closed_ball(&sc.space, center, r, &grid, &tol()).unwrap();
        for &p in closed.points() {
            prop_assert!(left.contains(p, 0.0));
        }
    }

    #[test]
    fn psi_iterates_compose(t in 0.0f64..100.0, m in 0usize..20, n in 0usize..20, c in 0.01f64..0.99) {
        let psi = ComparisonFn::linear(c, 1.0);
        let inner = psi_iterate(&psi, t, n).unwrap();
        prop_assert_eq!(psi_iterate(&psi, t, m + n).unwrap(), psi_iterate(&psi, inner, m).unwrap());
    }

    #[test]
    fn m_s_dominates_distance(x in 0.0f64..=4.0, y in 0.0f64..=4.0) {
        let sc = example1::<f64>().scenario;
        prop_assert!(m_s(&sc, x, y).unwrap() >= sc.q(x, y).unwrap());
    }

    #[test]
    fn radius_sums_nondecreasing(x0 in 0.0f64..=4.0, eps in 0.1f64..50.0) {
        let mut sc = example1::<f64>().scenario;
        sc.x0 = x0;
        sc.epsilon = eps;
        let r = check_condition_3(&sc, 32).unwrap();
        prop_assert!(r.partial_sums.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(r.passed, r.first_failure.is_none());
    }

    #[test]
    fn sampler_respects_domain(res in 2usize..60) {
        let domain = Domain::new(vec![Interval::closed(0.0f64, 4.0), Interval::open(4.0, 5.0)]).unwrap();
        let grid = domain.sample(res, 1e-9).unwrap();
        prop_assert!(grid.points().iter().all(|&x| domain.contains(x)));
        prop_assert!(grid.contains(4.0, 0.0));
        prop_assert!(!grid.contains(5.0, 1e-12));
        prop_assert!(grid.points().windows(2).all(|w| w[1] - w[0] > 1e-9));
    }

    #[test]
    fn explicit_regions_are_sorted_and_distinct(mut pts in proptest::collection::vec(-10.0f64..10.0, 1..40)) {
        pts.extend(pts.clone());
        let region = Region::explicit(pts, 1e-9).unwrap();
        prop_assert!(region.points().windows(2).all(|w| w[1] - w[0] > 1e-9));
    }

    #[test]
    fn converged_runs_obey_ledger_and_ball(x0 in 0.0f64..=1.5) {
        let mut sc = example1::<f64>().scenario;
        sc.x0 = x0;
        let r = iterate(&sc, 10_000, 1e-9).unwrap();
        prop_assert_eq!(r.status, SolveStatus::CommonFixedPoint);
        prop_assert!(verify_ledger(&r.trace, &sc.psi, &tol()).unwrap().passed);
        prop_assert!(r.trace.ball_membership.iter().all(|&b| b));
        let x = r.limit.unwrap();
        let (ux, vx) = (sc.apply_u(x).unwrap(), sc.apply_v(x).unwrap());
        for (a, b) in [(x, ux), (ux, x), (x, vx), (vx, x)] {
            prop_assert!(sc.q(a, b).unwrap() <= sc.tol.zero);
        }
    }

    #[test]
    fn iteration_is_deterministic(x0 in 0.0f64..=4.0) {
        let mut sc = example1::<f64>().scenario;
        sc.x0 = x0;
        sc.epsilon = 100.0;
        let a = iterate(&sc, 200, 1e-9).unwrap();
        let b = iterate(&sc, 200, 1e-9).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&a.trace.points), bits(&b.trace.points));
        prop_assert_eq!(bits(&a.trace.q_fwd), bits(&b.trace.q_fwd));
    }
}

#[test]
fn single_precision_example() {
    let mut sc = example1::<f32>().scenario;
    sc.tol = Tolerances { eq: 1e-5, zero: 1e-5, slack: 1e-5 };
    let r = iterate(&sc, 1000, 1e-5f32).unwrap();
    assert_eq!(r.status, SolveStatus::CommonFixedPoint);
    assert!(r.limit.unwrap().abs() <= 1e-5);
    let grid = sc.domain.sample(11, 1e-5).unwrap();
    assert!(qpb_core::check_qpb_axioms(&sc.space, &grid, &sc.tol).unwrap().passed);
}
