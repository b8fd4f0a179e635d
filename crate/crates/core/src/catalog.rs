//! Code-registered scenarios: the worked piecewise example on `[0, 5)`,
//! a Banach-style control, and two deliberately broken controls.

use std::fmt;

use serde::Serialize;

use crate::comparison::ComparisonFn;
use crate::domain::{Domain, Interval};
use crate::dominance::DominancePair;
use crate::error::{QpbError, Result};
use crate::hypothesis::{Scenario, Verdict};
use crate::scalar::Scalar;
use crate::space::QpbSpace;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expected<T> {
    /// Verdict of the axiom check at coefficient `s`.
    pub axiom_verdict: Verdict,
    pub fixed_point: Option<T>,
    pub epsilon: T,
    pub s: T,
    /// Known discrepancies between the stated example and direct evaluation.
    pub notes: Vec<String>,
}

pub struct CatalogEntry<T> {
    pub name: String,
    pub scenario: Scenario<T>,
    pub expected: Expected<T>,
}

impl<T: Scalar> fmt::Debug for CatalogEntry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("name", &self.name)
            .field("scenario", &self.scenario)
            .field("expected", &self.expected)
            .finish()
    }
}

impl<T: Scalar> Clone for CatalogEntry<T> {
    fn clone(&self) -> Self {
        Self {
            name: self.name.clone(),
            scenario: self.scenario.clone(),
            expected: self.expected.clone(),
        }
    }
}

fn in_a<T: Scalar>(x: T) -> bool {
    x >= T::zero() && x <= T::lit(4.0)
}

fn in_b<T: Scalar>(x: T) -> bool {
    x > T::lit(4.0) && x < T::lit(5.0)
}

/// The piecewise distance on `X = [0, 5)` with `A = [0, 4]`, `B = (4, 5)`.
///
/// Branches are tried in order: `x = y` in `A` gives `x`; `x` in `B`, `y` in
/// `A` gives `3x`; both in `B` gives `|x - y|^2`; everything else gives
/// `max{2x, y} + x`.
pub fn example1_distance<T: Scalar>(x: T, y: T) -> T {
    let three = T::lit(3.0);
    if in_a(x) && in_a(y) && x == y {
        x
    } else if in_b(x) && in_a(y) {
        three * x
    } else if in_b(x) && in_b(y) {
        (x - y).powi(2)
    } else {
        (x + x).max(y) + x
    }
}

pub fn example1_u<T: Scalar>(x: T) -> T {
    if in_a(x) {
        (x / T::lit(2.0)).sin() / T::lit(6.0)
    } else {
        x * x
    }
}

/// `ln(x + 1) / 6` on `A`, `e^x` elsewhere.
pub fn example1_v<T: Scalar>(x: T) -> T {
    if in_a(x) {
        x.ln_1p() / T::lit(6.0)
    } else {
        x.exp()
    }
}

pub fn example1_delta<T: Scalar>(x: T, y: T) -> T {
    if in_a(x) && in_a(y) {
        ((x + y) / T::lit(4.0)).cos()
    } else {
        (x + y).ln()
    }
}

pub fn example1_phi<T: Scalar>(x: T, y: T) -> T {
    if in_a(x) && in_a(y) {
        ((x + y) / T::lit(4.0)).sin()
    } else {
        (x + y).exp()
    }
}

pub fn example1<T: Scalar>() -> CatalogEntry<T> {
    let two = T::lit(2.0);
    let domain = Domain::new(vec![
        Interval::closed(T::zero(), T::lit(4.0)),
        Interval::open(T::lit(4.0), T::lit(5.0)),
    ])
    .expect("static domain");
    let space = QpbSpace::new("example1", two, example1_distance::<T>).expect("s = 2");
    let scenario = Scenario::builder("example1")
        .space(space)
        .maps(example1_u::<T>, example1_v::<T>)
        .dominance(DominancePair::new(example1_delta::<T>, example1_phi::<T>))
        .psi(ComparisonFn::new("x/6", two, |t: T| t / T::lit(6.0)))
        .start(T::lit(0.5))
        .radius(T::lit(4.5))
        .domain(domain)
        .build()
        .expect("example1 scenario is well formed");
    let notes = [
        "V is read as ln(x+1)/6 on A and e^x elsewhere; the stated definition mentions y and e^(x+y) for a one-argument map",
        "log is the natural logarithm",
        "x = 4 belongs to A, so (4, y) uses the A branches",
        "U and V are not locally (delta, phi)-dominated on all of A: delta(x,Tx) < phi(x,Tx) for x above about 3.0",
        "the (delta, phi) pair is not locally triangular on A: (2.5, 0, 2.5) is a witness since cos < sin past pi/4",
        "table row q(y,x) for x in A, y in B lists 3x; the definition gives 3y",
        "table rows q(x,x) and q(z,z) for points of B list x and z; the definition gives 0",
        "table row q(z,y) for z in B, y in A lists |z-y|^2; the definition gives 3z",
    ];
    CatalogEntry {
        name: "example1".into(),
        scenario,
        expected: Expected {
            axiom_verdict: Verdict::Passed,
            fixed_point: Some(T::zero()),
            epsilon: T::lit(4.5),
            s: two,
            notes: notes.iter().map(|s| s.to_string()).collect(),
        },
    }
}

fn halving_control<T: Scalar>(
    name: &str,
    space: QpbSpace<T>,
    psi: ComparisonFn<T>,
    axiom_verdict: Verdict,
    notes: &[&str],
) -> CatalogEntry<T> {
    let half = T::lit(0.5);
    let scenario = Scenario::builder(name)
        .space(space)
        .maps(move |x: T| x * half, move |x: T| x * half)
        .dominance(DominancePair::constant(T::one(), T::one()))
        .psi(psi)
        .start(T::one())
        .radius(T::one())
        .domain(Domain::interval(Interval::closed(T::zero(), T::one())))
        .build()
        .expect("control scenario is well formed");
    CatalogEntry {
        name: name.into(),
        scenario,
        expected: Expected {
            axiom_verdict,
            fixed_point: Some(T::zero()),
            epsilon: T::one(),
            s: T::one(),
            notes: notes.iter().map(|s| s.to_string()).collect(),
        },
    }
}

/// Positive and negative controls, all on `[0, 1]` with `U = V = x/2`.
pub fn controls<T: Scalar>() -> Vec<CatalogEntry<T>> {
    let half = ComparisonFn::linear(T::lit(0.5), T::one());
    let broken = QpbSpace::new("x-y", T::one(), |x: T, y: T| x - y).expect("s = 1");
    vec![
        halving_control(
            "banach-control",
            QpbSpace::standard_metric(),
            half.clone(),
            Verdict::Passed,
            &["standard metric, every hypothesis holds"],
        ),
        halving_control(
            "broken-control",
            broken,
            half,
            Verdict::Failed,
            &["q(x,y) = x - y takes negative values"],
        ),
        halving_control(
            "psi-identity-control",
            QpbSpace::standard_metric(),
            ComparisonFn::new("identity", T::one(), |t: T| t),
            Verdict::Passed,
            &["psi(t) = t is not a comparison function; the maps still converge"],
        ),
    ]
}

pub fn catalog<T: Scalar>() -> Vec<CatalogEntry<T>> {
    let mut entries = vec![example1()];
    entries.extend(controls());
    entries
}

pub fn find<T: Scalar>(name: &str) -> Result<CatalogEntry<T>> {
    catalog()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| QpbError::InvalidArgument(format!("unknown scenario {name:?}")))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ListingEntry {
    pub name: String,
    pub domain: String,
    pub s: f64,
    pub epsilon: f64,
    pub notes: Vec<String>,
}

pub fn listing() -> Vec<ListingEntry> {
    catalog::<f64>()
        .into_iter()
        .map(|e| ListingEntry {
            domain: e.scenario.domain.to_string(),
            s: e.expected.s,
            epsilon: e.expected.epsilon,
            notes: e.expected.notes,
            name: e.name,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Var {
    X,
    Y,
    Z,
}

impl Var {
    fn pick<T: Copy>(self, p: [T; 3]) -> T {
        match self {
            Var::X => p[0],
            Var::Y => p[1],
            Var::Z => p[2],
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Var::X => "x",
            Var::Y => "y",
            Var::Z => "z",
        })
    }
}

/// Symbolic cell of a verification table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expr {
    Var(Var),
    Zero,
    Triple(Var),
    /// `max{2a, b} + a`.
    MaxPlus(Var, Var),
    /// `|a - b|^2`.
    Square(Var, Var),
}

impl Expr {
    fn eval<T: Scalar>(self, p: [T; 3]) -> T {
        match self {
            Expr::Var(a) => a.pick(p),
            Expr::Zero => T::zero(),
            Expr::Triple(a) => T::lit(3.0) * a.pick(p),
            Expr::MaxPlus(a, b) => (a.pick(p) + a.pick(p)).max(b.pick(p)) + a.pick(p),
            Expr::Square(a, b) => (a.pick(p) - b.pick(p)).powi(2),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(a) => write!(f, "{a}"),
            Expr::Zero => f.write_str("0"),
            Expr::Triple(a) => write!(f, "3{a}"),
            Expr::MaxPlus(a, b) => write!(f, "max{{2{a}, {b}}} + {a}"),
            Expr::Square(a, b) => write!(f, "|{a}-{b}|^2"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Set {
    A,
    B,
}

/// One table case: where each variable lives, and the cells of its row.
struct Case {
    table: u8,
    case: &'static str,
    sets: [Set; 3],
    cells: &'static [((Var, Var), Expr)],
}

use Expr::{MaxPlus, Square, Triple, Zero};
use Var::{X, Y, Z};

const fn v(a: Var) -> Expr {
    Expr::Var(a)
}

/// Tables 1 and 2 range over pairs; `z` is unused there and sampled from `A`.
const CASES: &[Case] = &[
    Case { table: 1, case: "I", sets: [Set::A, Set::A, Set::A], cells: &[((X, Y), MaxPlus(X, Y)), ((X, X), v(X)), ((Y, Y), v(Y))] },
    Case { table: 1, case: "II", sets: [Set::B, Set::B, Set::A], cells: &[((X, Y), Square(X, Y)), ((X, X), Zero), ((Y, Y), Zero)] },
    Case { table: 1, case: "III", sets: [Set::A, Set::B, Set::A], cells: &[((X, Y), MaxPlus(X, Y)), ((X, X), v(X)), ((Y, Y), Zero)] },
    Case { table: 1, case: "IV", sets: [Set::B, Set::A, Set::A], cells: &[((X, Y), Triple(X)), ((X, X), Zero), ((Y, Y), v(Y))] },
    Case { table: 2, case: "I", sets: [Set::A, Set::A, Set::A], cells: &[((X, X), v(X)), ((X, Y), MaxPlus(X, Y)), ((Y, X), MaxPlus(Y, X))] },
    Case { table: 2, case: "II", sets: [Set::B, Set::B, Set::A], cells: &[((X, X), Zero), ((X, Y), Square(X, Y)), ((Y, X), Square(Y, X))] },
    Case { table: 2, case: "III", sets: [Set::A, Set::B, Set::A], cells: &[((X, X), v(X)), ((X, Y), MaxPlus(X, Y)), ((Y, X), Triple(X))] },
    Case { table: 2, case: "IV", sets: [Set::B, Set::A, Set::A], cells: &[((X, X), v(X)), ((X, Y), Triple(X)), ((Y, X), MaxPlus(Y, X))] },
    Case { table: 3, case: "I.I", sets: [Set::A, Set::A, Set::A], cells: &[((X, Y), MaxPlus(X, Y)), ((X, Z), MaxPlus(X, Z)), ((Z, Y), MaxPlus(Z, Y)), ((Z, Z), v(Z))] },
    Case { table: 3, case: "I.II", sets: [Set::A, Set::A, Set::B], cells: &[((X, Y), MaxPlus(X, Y)), ((X, Z), MaxPlus(X, Z)), ((Z, Y), Triple(Z)), ((Z, Z), v(Z))] },
    Case { table: 3, case: "II.I", sets: [Set::B, Set::B, Set::A], cells: &[((X, Y), Square(X, Y)), ((X, Z), Triple(X)), ((Z, Y), MaxPlus(Z, Y)), ((Z, Z), v(Z))] },
    Case { table: 3, case: "II.II", sets: [Set::B, Set::B, Set::B], cells: &[((X, Y), Square(X, Y)), ((X, Z), Square(X, Z)), ((Z, Y), Square(Z, Y)), ((Z, Z), Zero)] },
    Case { table: 3, case: "III.I", sets: [Set::A, Set::B, Set::A], cells: &[((X, Y), MaxPlus(X, Y)), ((X, Z), MaxPlus(X, Z)), ((Z, Y), MaxPlus(Z, Y)), ((Z, Z), v(Z))] },
    Case { table: 3, case: "III.II", sets: [Set::A, Set::B, Set::B], cells: &[((X, Y), MaxPlus(X, Y)), ((X, Z), MaxPlus(X, Z)), ((Z, Y), Square(Z, Y)), ((Z, Z), Zero)] },
    Case { table: 3, case: "IV.I", sets: [Set::B, Set::A, Set::A], cells: &[((X, Y), Triple(X)), ((X, Z), Triple(X)), ((Z, Y), MaxPlus(Z, Y)), ((Z, Z), v(Z))] },
    Case { table: 3, case: "IV.II", sets: [Set::B, Set::A, Set::B], cells: &[((X, Y), Triple(X)), ((X, Z), Square(X, Z)), ((Z, Y), Square(Z, Y)), ((Z, Z), Zero)] },
];

/// Sample points for the two pieces of the example domain.
#[derive(Debug, Clone, PartialEq)]
pub struct TableGrid<T> {
    pub a: Vec<T>,
    pub b: Vec<T>,
}

impl<T: Scalar> Default for TableGrid<T> {
    fn default() -> Self {
        Self {
            a: [0.5, 1.0, 2.0, 3.0, 4.0].iter().map(|&x| T::lit(x)).collect(),
            b: [4.1, 4.2, 4.5, 4.7, 4.9].iter().map(|&x| T::lit(x)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow<T> {
    pub table: u8,
    pub case: String,
    /// The distance this cell tabulates, e.g. `q(x,y)`.
    pub column: String,
    pub expression: String,
    pub evaluated: usize,
    pub mismatches: usize,
    pub max_abs_diff: T,
    /// First sample `[x, y, z]` where the cell and the definition disagree.
    pub example: Option<[T; 3]>,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseAxiom {
    pub table: u8,
    pub case: String,
    /// Axiom the table supports: 1, "2 and 3", or 4 at `s = 2`.
    pub axiom: String,
    pub checked: usize,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableReport<T> {
    pub rows: Vec<TableRow<T>>,
    pub axioms: Vec<CaseAxiom>,
    pub all_agree: bool,
}

impl<T: Scalar> TableReport<T> {
    pub fn discrepancies(&self) -> impl Iterator<Item = &TableRow<T>> {
        self.rows.iter().filter(|r| !r.agrees)
    }
}

/// Evaluates every tabulated cell against the implemented distance on sample
/// points conforming to its case (pairwise distinct), and checks the axiom
/// each table is meant to support on the same samples.
pub fn verify_tables<T: Scalar>(entry: &CatalogEntry<T>, grid: &TableGrid<T>) -> Result<TableReport<T>> {
    if entry.name != "example1" {
        return Err(QpbError::InvalidArgument(format!(
            "table verification applies to example1, not {}",
            entry.name
        )));
    }
    if grid.a.iter().any(|&x| !in_a(x)) || grid.b.iter().any(|&x| !in_b(x)) {
        return Err(QpbError::InvalidArgument("table grid points must lie in their pieces".into()));
    }
    let space = &entry.scenario.space;
    let s = space.s();
    let slack = entry.scenario.tol.slack;
    let pick = |set: Set| match set {
        Set::A => &grid.a,
        Set::B => &grid.b,
    };

    let mut rows = Vec::new();
    let mut axioms = Vec::new();
    for case in CASES {
        let mut samples = Vec::new();
        for &x in pick(case.sets[0]) {
            for &y in pick(case.sets[1]) {
                for &z in pick(case.sets[2]) {
                    if x != y && x != z && y != z {
                        samples.push([x, y, z]);
                    }
                }
            }
        }
        for &((a, b), expr) in case.cells {
            let mut row = TableRow {
                table: case.table,
                case: case.case.to_string(),
                column: format!("q({a},{b})"),
                expression: expr.to_string(),
                evaluated: samples.len(),
                mismatches: 0,
                max_abs_diff: T::zero(),
                example: None,
                agrees: true,
            };
            for &p in &samples {
                let diff = (space.dist(a.pick(p), b.pick(p))? - expr.eval(p)).abs();
                row.max_abs_diff = row.max_abs_diff.max(diff);
                if diff > slack {
                    row.mismatches += 1;
                    row.example.get_or_insert(p);
                }
            }
            row.agrees = row.mismatches == 0;
            rows.push(row);
        }

        let mut holds = true;
        for &[x, y, z] in &samples {
            let q = |a, b| space.dist(a, b);
            holds &= match case.table {
                1 => !(q(x, y)? == q(x, x)? && q(x, x)? == q(y, y)?),
                2 => q(x, x)? <= q(x, y)? + slack && q(x, x)? <= q(y, x)? + slack,
                _ => q(x, y)? <= s * (q(x, z)? + q(z, y)?) - q(z, z)? + slack,
            };
        }
        axioms.push(CaseAxiom {
            table: case.table,
            case: case.case.to_string(),
            axiom: match case.table {
                1 => "1",
                2 => "2 and 3",
                _ => "4",
            }
            .into(),
            checked: samples.len(),
            holds,
        });
    }
    let all_agree = rows.iter().all(|r| r.agrees);
    Ok(TableReport { rows, axioms, all_agree })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_values() {
        assert_eq!(example1_distance(1.0, 3.0), 4.0);
        assert_eq!(example1_distance(4.5, 3.0), 13.5);
        assert_eq!(example1_distance(2.0, 2.0), 2.0);
        assert_eq!(example1_distance(0.0, 0.0), 0.0);
        assert_eq!(example1_distance(4.5, 4.5), 0.0);
        assert_eq!(example1_distance(4.0, 4.0), 4.0);
        // x in A, y in B falls through to the last branch
        assert_eq!(example1_distance(1.0, 4.5), 5.5);
    }

    #[test]
    fn names_unique() {
        let names: Vec<String> = catalog::<f64>().into_iter().map(|e| e.name).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        assert!(find::<f64>("nosuch").is_err());
    }

    #[test]
    fn example1_maps_at_four() {
        let x: f64 = 4.0;
        assert_eq!(example1_u(x), (2.0f64).sin() / 6.0);
        assert_eq!(example1_v(x), (5.0f64).ln() / 6.0);
        assert_eq!(example1_u(4.5), 20.25);
    }

    #[test]
    fn tables_disagree_only_on_known_rows() {
        let report = verify_tables(&example1::<f64>(), &TableGrid::default()).unwrap();
        let bad: Vec<(u8, &str, &str)> =
            report.discrepancies().map(|r| (r.table, r.case.as_str(), r.column.as_str())).collect();
        assert_eq!(
            bad,
            vec![(2, "III", "q(y,x)"), (2, "IV", "q(x,x)"), (3, "I.II", "q(z,z)"), (3, "IV.II", "q(z,y)")]
        );
        assert!(report.axioms.iter().all(|a| a.holds && a.checked > 0));
    }

    #[test]
    fn table_rejects_other_entries() {
        let banach = find::<f64>("banach-control").unwrap();
        assert!(verify_tables(&banach, &TableGrid::default()).is_err());
    }

    #[test]
    fn listing_serializes() {
        let json = serde_json::to_value(listing()).unwrap();
        assert_eq!(json[0]["name"], "example1");
        assert_eq!(json[0]["domain"], "[0, 4] ∪ (4, 5)");
        assert_eq!(json[0]["s"], 2.0);
    }
}
