//! Quasi-partial b-metric spaces and common fixed points of mapping pairs.
//!
//! Distances, maps and comparison functions are checked by exhaustive
//! evaluation over finite regions; every failing instance is reported as a
//! witness. The solver runs the alternating iteration `U, V, U, V, ...` and
//! records the `psi^n` bound that the convergence argument relies on.

pub mod catalog;
pub mod comparison;
pub mod domain;
pub mod dominance;
pub mod error;
pub mod hypothesis;
pub mod report;
pub mod scalar;
pub mod solver;
pub mod space;

pub use catalog::{catalog, controls, example1, find, listing, verify_tables, CatalogEntry, TableGrid};
pub use comparison::{psi_iterate, validate_monotone, validate_series, validate_strict_contraction, ComparisonFn};
pub use domain::{Domain, Interval, Region, RegionSource};
pub use dominance::{dominance_guard, is_locally_dominated, is_pair_triangular, DominancePair};
pub use error::{QpbError, Result};
pub use hypothesis::{
    check_all, check_condition_1, check_condition_2, check_condition_3, m_s, CompositeReport, Scenario, Verdict,
};
pub use report::{ViolationReport, Witness};
pub use scalar::Scalar;
pub use solver::{
    cauchy_diagnostics, iterate, solve_single_map, uniqueness_probe, verify_ledger, IterationTrace, SingleMapMode,
    SolveResult, SolveStatus,
};
pub use space::{
    check_dq_axioms, check_qpb_axioms, closed_ball, left_closed_ball, separation, DqSpace, QpbSpace,
    Separation, Tolerances,
};

pub type QpbSpace64 = QpbSpace<f64>;
pub type Scenario64 = Scenario<f64>;
pub type Region64 = Region<f64>;
pub type Domain64 = Domain<f64>;
pub type ViolationReport64 = ViolationReport<f64>;
pub type SolveResult64 = SolveResult<f64>;
pub type ComparisonFn64 = ComparisonFn<f64>;
pub type DominancePair64 = DominancePair<f64>;
pub type CatalogEntry64 = CatalogEntry<f64>;

pub type QpbSpace32 = QpbSpace<f32>;
pub type Scenario32 = Scenario<f32>;
pub type Region32 = Region<f32>;
pub type SolveResult32 = SolveResult<f32>;
