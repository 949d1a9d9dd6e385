//! Randomized zone checks shared by the zone property tests and the
//! acceptance run. The reference side is a plain Fourier-Motzkin over
//! explicit rows, with no redundancy removal, DBM or LP shortcuts.

use num_rational::Ratio;
use proptest::prelude::*;
use railsynth::synth::{Polyhedron, Row, RowKind};

pub type Q = Ratio<i128>;

#[derive(Clone, Debug)]
pub struct Case {
    pub clocks: usize,
    pub params: usize,
    pub rows: Vec<Row>,
    /// Extra rows used to build a second zone for the inclusion checks.
    pub other: Vec<Row>,
    pub points: Vec<Vec<Q>>,
}

impl Case {
    pub fn dim(&self) -> usize {
        self.clocks + self.params
    }

    pub fn zone(&self) -> Polyhedron {
        Polyhedron::from_rows(self.dim(), self.rows.iter().cloned())
    }
}

fn row_strategy(dim: usize) -> impl Strategy<Value = Row> {
    (
        prop::collection::vec(-5i128..=5, dim),
        -10i128..=10,
        prop_oneof![6 => Just(RowKind::Ge), 3 => Just(RowKind::Gt), 1 => Just(RowKind::Eq)],
    )
        .prop_map(|(coeffs, c, kind)| Row::new(kind, coeffs, c))
}

/// Zones with 1 to 3 clocks and 0 to 2 parameters, coefficients in
/// [-5, 5], plus 24 sample points on the half-unit grid over [0, 8].
pub fn case_strategy() -> impl Strategy<Value = Case> {
    (1usize..=3, 0usize..=2).prop_flat_map(|(clocks, params)| {
        let dim = clocks + params;
        (
            prop::collection::vec(row_strategy(dim), 1..=4),
            prop::collection::vec(row_strategy(dim), 0..=2),
            prop::collection::vec(prop::collection::vec(0i128..=16, dim), 24),
        )
            .prop_map(move |(rows, other, pts)| Case {
                clocks,
                params,
                rows,
                other,
                points: pts
                    .into_iter()
                    .map(|p| p.into_iter().map(|x| Q::new(x, 2)).collect())
                    .collect(),
            })
    })
}

/// Reference inequality `coeffs · v + constant >= 0` (or `> 0`).
#[derive(Clone, Debug, PartialEq, Eq)]
struct Ineq {
    coeffs: Vec<i128>,
    constant: i128,
    strict: bool,
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Ineq {
    fn reduced(mut self) -> Self {
        let g = self.coeffs.iter().fold(self.constant, |g, &a| gcd(g, a));
        if g > 1 {
            self.coeffs.iter_mut().for_each(|a| *a /= g);
            self.constant /= g;
        }
        self
    }

    fn holds(&self, p: &[Q]) -> bool {
        let mut acc = Q::from_integer(self.constant);
        for (&a, x) in self.coeffs.iter().zip(p) {
            acc += Q::from_integer(a) * x;
        }
        if self.strict {
            acc > Q::from_integer(0)
        } else {
            acc >= Q::from_integer(0)
        }
    }
}

/// The rows of a zone with every equality split in two and the implicit
/// non-negativity bounds made explicit.
fn reference(dim: usize, rows: &[Row]) -> Vec<Ineq> {
    let mut out = Vec::new();
    for r in rows {
        let ge = Ineq {
            coeffs: r.coeffs.clone(),
            constant: r.constant,
            strict: r.kind == RowKind::Gt,
        };
        if r.kind == RowKind::Eq {
            out.push(Ineq {
                coeffs: r.coeffs.iter().map(|a| -a).collect(),
                constant: -r.constant,
                strict: false,
            });
        }
        out.push(ge);
    }
    for v in 0..dim {
        let mut coeffs = vec![0; dim];
        coeffs[v] = 1;
        out.push(Ineq {
            coeffs,
            constant: 0,
            strict: false,
        });
    }
    out
}

fn fm(rows: &[Ineq], var: usize) -> Vec<Ineq> {
    let mut out = Vec::new();
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for r in rows {
        match r.coeffs[var].signum() {
            1 => pos.push(r),
            -1 => neg.push(r),
            _ => out.push(r.clone()),
        }
    }
    for p in &pos {
        for n in &neg {
            let (s, t) = (-n.coeffs[var], p.coeffs[var]);
            let row = Ineq {
                coeffs: p.coeffs.iter().zip(&n.coeffs).map(|(a, b)| s * a + t * b).collect(),
                constant: s * p.constant + t * n.constant,
                strict: p.strict || n.strict,
            }
            .reduced();
            if !out.contains(&row) {
                out.push(row);
            }
        }
    }
    out
}

fn reference_empty(rows: &[Ineq]) -> bool {
    let dim = rows.first().map_or(0, |r| r.coeffs.len());
    let mut rows = rows.to_vec();
    for v in 0..dim {
        rows = fm(&rows, v);
    }
    rows.iter().any(|r| if r.strict { r.constant <= 0 } else { r.constant < 0 })
}

/// Fixes the trailing variables to `vals`.
fn substitute(rows: &[Ineq], keep: usize, vals: &[Q]) -> Vec<Ineq> {
    let den = vals.iter().fold(1i128, |l, v| l / gcd(l, *v.denom()) * v.denom());
    rows.iter()
        .map(|r| {
            let mut c = Q::from_integer(r.constant * den);
            for (a, v) in r.coeffs[keep..].iter().zip(vals) {
                c += Q::from_integer(a * den) * v;
            }
            Ineq {
                coeffs: r.coeffs[..keep].iter().map(|a| a * den).collect(),
                constant: c.to_integer(),
                strict: r.strict,
            }
            .reduced()
        })
        .collect()
}

fn fail(what: &str, case: &Case, detail: String) -> Result<(), String> {
    Err(format!("{what}: {detail}\nzone {}", case.zone()))
}

/// Elapsing twice gives the same set as elapsing once, which contains the
/// original zone.
pub fn elapse_idempotent(case: &Case) -> Result<(), String> {
    let z = case.zone();
    let clocks: Vec<usize> = (0..case.clocks).collect();
    let once = z.elapse(&clocks);
    let twice = once.elapse(&clocks);
    if !once.same_set(&twice) {
        return fail("elapse idempotence", case, format!("{once} vs {twice}"));
    }
    if !once.includes(&z) {
        return fail("elapse idempotence", case, format!("{once} misses the zone"));
    }
    for p in &case.points {
        if once.contains_point(p) != twice.contains_point(p) {
            return fail("elapse idempotence", case, format!("point {p:?}"));
        }
    }
    Ok(())
}

/// Resetting a clock and then projecting it away matches the reference
/// elimination, pointwise and as a set.
pub fn reset_then_project(case: &Case) -> Result<(), String> {
    let dim = case.dim();
    let z = case.zone();
    let reference_rows = reference(dim, &case.rows);
    for x in 0..case.clocks {
        let got = z.reset(x).eliminate(&[x]);
        let want = fm(&reference_rows, x);
        for p in &case.points {
            let mut p = p.clone();
            p[x] = Q::from_integer(0);
            let a = got.contains_point(&p);
            let b = want.iter().all(|r| r.holds(&p));
            if a != b {
                return fail("reset then project", case, format!("clock {x}, point {p:?}: {a} vs {b}"));
            }
        }
        let want_poly = Polyhedron::from_rows(
            dim,
            want.iter().map(|r| {
                let kind = if r.strict { RowKind::Gt } else { RowKind::Ge };
                Row::new(kind, r.coeffs.clone(), r.constant)
            }),
        );
        if !want_poly.same_set(&got) {
            return fail("reset then project", case, format!("clock {x}: {got} vs {want_poly}"));
        }
        if got.is_empty() != reference_empty(&want) {
            return fail("reset then project", case, format!("clock {x}: emptiness differs"));
        }
    }
    Ok(())
}

/// Mutual inclusion holds exactly for semantically equal zones, which then
/// share a canonical form and agree on every sample point.
pub fn inclusion_antisymmetry(case: &Case) -> Result<(), String> {
    let dim = case.dim();
    let a = case.zone();
    // b: the same set written differently (rows scaled, reversed, plus a
    // redundant positive combination)
    let mut rows: Vec<Row> = case
        .rows
        .iter()
        .rev()
        .map(|r| Row {
            kind: r.kind,
            coeffs: r.coeffs.iter().map(|c| 3 * c).collect(),
            constant: 3 * r.constant,
        })
        .collect();
    let ineqs: Vec<&Row> = case.rows.iter().filter(|r| r.kind != RowKind::Eq).collect();
    if let [r, s, ..] = ineqs.as_slice() {
        let coeffs = r.coeffs.iter().zip(&s.coeffs).map(|(x, y)| x + 2 * y).collect();
        rows.push(Row::new(RowKind::Ge, coeffs, r.constant + 2 * s.constant + 1));
    }
    let b = Polyhedron::from_rows(dim, rows);
    if !(a.includes(&b) && b.includes(&a)) {
        return fail("inclusion antisymmetry", case, format!("rewritten zone {b} not equal"));
    }
    if a.canonicalize() != b.canonicalize() {
        return fail("inclusion antisymmetry", case, "canonical forms differ".into());
    }
    // c: a possibly different zone
    let c = a.intersect(&Polyhedron::from_rows(dim, case.other.iter().cloned()));
    let (ac, ca) = (a.includes(&c), c.includes(&a));
    if !ac {
        return fail("inclusion antisymmetry", case, format!("{a} does not include {c}"));
    }
    if ca != (a.canonicalize() == c.canonicalize()) {
        return fail("inclusion antisymmetry", case, format!("mutual inclusion {ca} with {c}"));
    }
    for p in &case.points {
        if c.contains_point(p) && !a.contains_point(p) {
            return fail("inclusion antisymmetry", case, format!("point {p:?}"));
        }
        if ca && a.contains_point(p) != c.contains_point(p) {
            return fail("inclusion antisymmetry", case, format!("point {p:?}"));
        }
    }
    let empty_ref = reference_empty(&reference(dim, &case.rows));
    if a.is_empty() != empty_ref {
        return fail("inclusion antisymmetry", case, format!("emptiness {} vs {empty_ref}", a.is_empty()));
    }
    Ok(())
}

/// A parameter valuation lies in the projection of the zone iff the zone
/// restricted to it has a clock point.
pub fn projection_membership(case: &Case) -> Result<(), String> {
    let dim = case.dim();
    let z = case.zone();
    let clocks: Vec<usize> = (0..case.clocks).collect();
    let proj = z.eliminate(&clocks).tail(case.params);
    let reference_rows = reference(dim, &case.rows);
    for p in &case.points {
        let vals = &p[case.clocks..];
        let got = proj.contains_point(vals);
        let restricted = substitute(&reference_rows, case.clocks, vals);
        let want = !reference_empty(&restricted);
        if got != want {
            return fail("projection membership", case, format!("valuation {vals:?}: {got} vs {want}"));
        }
    }
    Ok(())
}

pub type Check = fn(&Case) -> Result<(), String>;

pub const CHECKS: [(&str, Check); 4] = [
    ("elapse idempotence", elapse_idempotent),
    ("reset then project", reset_then_project),
    ("inclusion antisymmetry", inclusion_antisymmetry),
    ("projection membership", projection_membership),
];
