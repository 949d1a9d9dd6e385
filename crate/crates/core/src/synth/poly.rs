//! Convex polyhedra over non-negative rational variables, represented by
//! integer constraint rows, with exact elimination and canonical forms.
//!
//! Every variable carries an implicit `v >= 0`. Rows are `a · v + c ⋈ 0`
//! with `⋈` one of `=`, `>=`, `>`.

use std::borrow::Cow;
use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive, Zero};

use super::dbm::Dbm;
use super::lp::{self, LpOutcome, LpRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowKind {
    Eq,
    Ge,
    Gt,
}

/// `coeffs · v + constant ⋈ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Row {
    pub kind: RowKind,
    pub coeffs: Vec<i128>,
    pub constant: i128,
}

impl Row {
    pub fn new(kind: RowKind, coeffs: Vec<i128>, constant: i128) -> Self {
        let mut r = Row {
            kind,
            coeffs,
            constant,
        };
        r.normalize();
        r
    }

    /// `v_var ⋈ 0` style row builder: `Σ terms + constant ⋈ 0`.
    pub fn from_terms(dim: usize, terms: &[(usize, i128)], constant: i128, kind: RowKind) -> Self {
        let mut coeffs = vec![0; dim];
        for &(v, a) in terms {
            coeffs[v] += a;
        }
        Row::new(kind, coeffs, constant)
    }

    fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|&a| a == 0)
    }

    /// Truth value of a row without variables.
    fn constant_truth(&self) -> Option<bool> {
        self.is_constant().then_some(match self.kind {
            RowKind::Eq => self.constant == 0,
            RowKind::Ge => self.constant >= 0,
            RowKind::Gt => self.constant > 0,
        })
    }

    /// Divides by the content; equalities get a positive leading coefficient.
    pub fn normalize(&mut self) {
        let mut g = self.constant.abs();
        for &a in &self.coeffs {
            g = g.gcd(&a);
        }
        if g > 1 {
            for a in &mut self.coeffs {
                *a /= g;
            }
            self.constant /= g;
        }
        if self.kind == RowKind::Eq {
            let lead = self.coeffs.iter().copied().find(|&a| a != 0).unwrap_or(self.constant);
            if lead < 0 {
                self.negate_in_place();
            }
        }
    }

    /// The complement of an inequality.
    fn negation(&self) -> Row {
        let kind = match self.kind {
            RowKind::Ge => RowKind::Gt,
            RowKind::Gt => RowKind::Ge,
            RowKind::Eq => unreachable!("equalities have no convex complement"),
        };
        Row::new(kind, self.negated_coeffs(), -self.constant)
    }

    fn negate_in_place(&mut self) {
        for a in &mut self.coeffs {
            *a = -*a;
        }
        self.constant = -self.constant;
    }

    fn negated_coeffs(&self) -> Vec<i128> {
        self.coeffs.iter().map(|&a| -a).collect()
    }

    /// `s * self + t * other`, with `s > 0` for inequalities.
    fn combine(&self, s: i128, other: &Row, t: i128, kind: RowKind) -> Row {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| {
                s.checked_mul(a)
                    .and_then(|x| t.checked_mul(b).and_then(|y| x.checked_add(y)))
                    .expect("coefficient overflow")
            })
            .collect();
        let constant = s
            .checked_mul(self.constant)
            .and_then(|x| t.checked_mul(other.constant).and_then(|y| x.checked_add(y)))
            .expect("constant overflow");
        Row::new(kind, coeffs, constant)
    }

    pub fn holds_at(&self, point: &[Ratio<i128>]) -> bool {
        let mut acc = Ratio::from_integer(self.constant);
        for (&a, v) in self.coeffs.iter().zip(point) {
            if a != 0 {
                acc += Ratio::from_integer(a) * v;
            }
        }
        match self.kind {
            RowKind::Eq => acc.is_zero(),
            RowKind::Ge => !acc.is_negative(),
            RowKind::Gt => acc.is_positive(),
        }
    }
}

/// A point of a polyhedron's closure as integers over a common
/// denominator.
#[derive(Clone, Debug)]
struct Witness {
    num: Vec<i128>,
    den: i128,
}

impl Witness {
    fn from_big(point: &[BigRational]) -> Option<Witness> {
        let den = point
            .iter()
            .fold(BigInt::from(1), |acc, v| acc.lcm(v.denom()));
        let num = point
            .iter()
            .map(|v| (v.numer() * (&den / v.denom())).to_i128())
            .collect::<Option<Vec<i128>>>()?;
        Some(Witness {
            num,
            den: den.to_i128()?,
        })
    }

    /// Whether the non-strict version of `r` fails here; false when the
    /// arithmetic overflows.
    fn falsifies(&self, r: &Row) -> bool {
        let mut acc = match r.constant.checked_mul(self.den) {
            Some(v) => v,
            None => return false,
        };
        for (&a, &x) in r.coeffs.iter().zip(&self.num) {
            if a != 0 {
                match a.checked_mul(x).and_then(|t| acc.checked_add(t)) {
                    Some(v) => acc = v,
                    None => return false,
                }
            }
        }
        match r.kind {
            RowKind::Eq => acc != 0,
            RowKind::Ge | RowKind::Gt => acc < 0,
        }
    }
}

/// Entailment queries against one polyhedron, with its difference-bound
/// closure computed once when the rows allow it. Points met by the LP are
/// kept as witnesses, and answers are memoized per row.
#[derive(Debug)]
pub(crate) struct Entailer<'a> {
    poly: Cow<'a, Polyhedron>,
    dbm: Option<(Dbm, bool)>,
    points: RefCell<Option<Vec<Witness>>>,
    memo: RefCell<HashMap<Row, bool>>,
}

impl<'a> Entailer<'a> {
    pub(crate) fn new(poly: Cow<'a, Polyhedron>) -> Self {
        let dbm = Dbm::from_rows(poly.dim, &poly.rows).map(|mut d| {
            let sat = d.close();
            (d, sat)
        });
        Entailer {
            poly,
            dbm,
            points: RefCell::new(None),
            memo: RefCell::new(HashMap::new()),
        }
    }

    pub(crate) fn poly(&self) -> &Polyhedron {
        &self.poly
    }

    pub(crate) fn entails(&self, r: &Row) -> bool {
        if let Some(t) = r.constant_truth() {
            return t;
        }
        match &self.dbm {
            Some((_, false)) => true,
            Some((d, true)) => d.entails(r).unwrap_or_else(|| self.entails_cached(r)),
            None => self.entails_cached(r),
        }
    }

    fn entails_cached(&self, r: &Row) -> bool {
        if let Some(&t) = self.memo.borrow().get(r) {
            return t;
        }
        let t = !self.refutes(r) && {
            let mut found = Vec::new();
            let t = self.poly.entails_lp(r, &mut found);
            if let Some(ps) = self.points.borrow_mut().as_mut() {
                ps.extend(found.iter().filter_map(|p| Witness::from_big(p)));
            }
            t
        };
        self.memo.borrow_mut().insert(r.clone(), t);
        t
    }

    /// Cheap exact refutation: a known point of the closure falsifies the
    /// non-strict version of `r`, so `r` is not entailed.
    fn refutes(&self, r: &Row) -> bool {
        if self.dbm.is_some() {
            return false;
        }
        let mut points = self.points.borrow_mut();
        let ps = points.get_or_insert_with(|| {
            lp::feasible_point(self.poly.dim, &self.poly.lp_rows())
                .and_then(|p| Witness::from_big(&p))
                .into_iter()
                .collect()
        });
        ps.iter().any(|w| w.falsifies(r))
    }
}

/// Result of minimizing a linear expression.
enum Min {
    Infeasible,
    Unbounded,
    Value(BigRational),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polyhedron {
    dim: usize,
    rows: Vec<Row>,
}

impl Polyhedron {
    pub fn universe(dim: usize) -> Self {
        Polyhedron { dim, rows: vec![] }
    }

    pub fn empty(dim: usize) -> Self {
        Polyhedron {
            dim,
            rows: vec![Row {
                kind: RowKind::Ge,
                coeffs: vec![0; dim],
                constant: -1,
            }],
        }
    }

    pub fn from_rows(dim: usize, rows: impl IntoIterator<Item = Row>) -> Self {
        let mut p = Polyhedron::universe(dim);
        for r in rows {
            p.add_row(r);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    fn marked_empty(&self) -> bool {
        self.rows.len() == 1 && self.rows[0].constant_truth() == Some(false)
    }

    pub fn add_row(&mut self, mut r: Row) {
        debug_assert_eq!(r.coeffs.len(), self.dim);
        if self.marked_empty() {
            return;
        }
        r.normalize();
        match r.constant_truth() {
            Some(true) => {}
            Some(false) => *self = Polyhedron::empty(self.dim),
            None => self.rows.push(r),
        }
    }

    pub fn intersect(&self, other: &Polyhedron) -> Polyhedron {
        let mut p = self.clone();
        for r in &other.rows {
            p.add_row(r.clone());
        }
        p.simplify();
        p
    }

    pub fn contains_point(&self, point: &[Ratio<i128>]) -> bool {
        point.iter().all(|v| !v.is_negative()) && self.rows.iter().all(|r| r.holds_at(point))
    }

    fn lp_rows(&self) -> Vec<LpRow<'_>> {
        self.rows
            .iter()
            .map(|r| LpRow {
                coeffs: &r.coeffs,
                constant: r.constant,
                eq: r.kind == RowKind::Eq,
            })
            .collect()
    }

    /// Exact emptiness, strict rows included.
    pub fn is_empty(&self) -> bool {
        if self.marked_empty() {
            return true;
        }
        if self.rows.is_empty() {
            return false;
        }
        if let Some(mut d) = Dbm::from_rows(self.dim, &self.rows) {
            return !d.close();
        }
        if !self.rows.iter().any(|r| r.kind == RowKind::Gt) {
            return !lp::feasible(self.dim, &self.lp_rows());
        }
        // maximize t with t <= 1 and every strict row shifted by t
        let n = self.dim + 1;
        let mut store: Vec<(Vec<i128>, i128, bool)> = self
            .rows
            .iter()
            .map(|r| {
                let mut c = r.coeffs.clone();
                c.push(if r.kind == RowKind::Gt { -1 } else { 0 });
                (c, r.constant, r.kind == RowKind::Eq)
            })
            .collect();
        let mut cap = vec![0; n];
        cap[self.dim] = -1;
        store.push((cap, 1, false));
        let rows: Vec<LpRow> = store
            .iter()
            .map(|(c, k, eq)| LpRow {
                coeffs: c,
                constant: *k,
                eq: *eq,
            })
            .collect();
        let mut obj = vec![0; n];
        obj[self.dim] = 1;
        match lp::maximize(n, &rows, &obj) {
            LpOutcome::Optimal(t) => !t.is_positive(),
            _ => true,
        }
    }

    /// Minimum of `coeffs · v` over the closure, recording the minimizer.
    fn minimize(&self, coeffs: &[i128], found: &mut Vec<Vec<BigRational>>) -> Min {
        let neg: Vec<i128> = coeffs.iter().map(|&a| -a).collect();
        let (out, point) = lp::maximize_at(self.dim, &self.lp_rows(), &neg);
        found.extend(point);
        match out {
            LpOutcome::Infeasible => Min::Infeasible,
            LpOutcome::Unbounded => Min::Unbounded,
            LpOutcome::Optimal(v) => Min::Value(-v),
        }
    }

    /// Whether every point satisfies `r`. Requires a non-empty polyhedron
    /// for a meaningful answer on strict rows.
    fn entails(&self, r: &Row) -> bool {
        self.entailer().entails(r)
    }

    /// Prepares repeated entailment queries against `self`.
    pub(crate) fn entailer(&self) -> Entailer<'_> {
        Entailer::new(Cow::Borrowed(self))
    }

    fn entails_lp(&self, r: &Row, found: &mut Vec<Vec<BigRational>>) -> bool {
        if let Some(t) = r.constant_truth() {
            return t;
        }
        if self.rows.contains(r) {
            return true;
        }
        if r.kind == RowKind::Eq {
            let ge = Row::new(RowKind::Ge, r.coeffs.clone(), r.constant);
            let le = Row::new(RowKind::Ge, r.negated_coeffs(), -r.constant);
            return self.entails_lp(&ge, found) && self.entails_lp(&le, found);
        }
        // a nonnegativity row is always entailed
        if r.constant >= 0 && r.coeffs.iter().all(|&a| a >= 0) && (r.kind == RowKind::Ge || r.constant > 0) {
            return true;
        }
        match self.minimize(&r.coeffs, found) {
            Min::Infeasible => true,
            Min::Unbounded => false,
            Min::Value(m) => {
                let v = m + BigRational::from_integer(BigInt::from(r.constant));
                if v.is_positive() {
                    true
                } else if v.is_negative() {
                    false
                } else if r.kind == RowKind::Ge {
                    true
                } else {
                    let mut q = self.clone();
                    q.add_row(Row::new(RowKind::Ge, r.negated_coeffs(), -r.constant));
                    q.is_empty()
                }
            }
        }
    }

    /// `other ⊆ self`.
    pub fn includes(&self, other: &Polyhedron) -> bool {
        if other.is_empty() {
            return true;
        }
        self.includes_nonempty(other)
    }

    /// `other ⊆ self` for a non-empty `other`.
    pub(crate) fn includes_nonempty(&self, other: &Polyhedron) -> bool {
        debug_assert_eq!(self.dim, other.dim);
        self.includes_via(&other.entailer())
    }

    /// Inclusion of the (non-empty) polyhedron behind `e`.
    pub(crate) fn includes_via(&self, e: &Entailer<'_>) -> bool {
        if self.rows.iter().any(|r| r.constant_truth().is_none() && e.refutes(r)) {
            return false;
        }
        self.rows.iter().all(|r| e.entails(r))
    }

    /// `self ∪ other` when that union is convex and each side has at most
    /// `limit` inequalities the other violates. The result keeps the rows of
    /// either side that hold on the other; it is the union exactly when no
    /// point of it violates a row of each side at once.
    pub(crate) fn convex_union(a: &Entailer<'_>, b: &Entailer<'_>, limit: usize) -> Option<Polyhedron> {
        let (p, q) = (a.poly(), b.poly());
        debug_assert_eq!(p.dim, q.dim);
        let split = |poly: &Polyhedron| -> Vec<Row> {
            let mut out = Vec::with_capacity(poly.rows.len());
            for r in &poly.rows {
                if r.kind == RowKind::Eq {
                    out.push(Row::new(RowKind::Ge, r.coeffs.clone(), r.constant));
                    out.push(Row::new(RowKind::Ge, r.negated_coeffs(), -r.constant));
                } else {
                    out.push(r.clone());
                }
            }
            out
        };
        let (p_rows, q_rows) = (split(p), split(q));
        // cheap bound on the violated rows before any exact test
        if p_rows.iter().filter(|r| b.refutes(r)).count() > limit
            || q_rows.iter().filter(|r| a.refutes(r)).count() > limit
        {
            return None;
        }
        let mut env = Vec::new();
        let mut p_only = Vec::new();
        for r in p_rows {
            if b.entails(&r) {
                env.push(r);
            } else {
                p_only.push(r);
                if p_only.len() > limit {
                    return None;
                }
            }
        }
        let mut q_only = Vec::new();
        for r in q_rows {
            if a.entails(&r) {
                env.push(r);
            } else {
                q_only.push(r);
                if q_only.len() > limit {
                    return None;
                }
            }
        }
        if p_only.is_empty() {
            return Some(p.clone());
        }
        if q_only.is_empty() {
            return Some(q.clone());
        }
        let env = Polyhedron::from_rows(p.dim, env);
        for x in &p_only {
            for y in &q_only {
                let mut cell = env.clone();
                cell.add_row(x.negation());
                cell.add_row(y.negation());
                if !cell.is_empty() {
                    return None;
                }
            }
        }
        let mut env = env;
        env.simplify();
        Some(env)
    }

    /// Semantic equality.
    pub fn same_set(&self, other: &Polyhedron) -> bool {
        self.includes(other) && other.includes(self)
    }

    /// Cheap syntactic cleanup: normalization, duplicate and parallel rows,
    /// opposite pairs. Marks the polyhedron empty on a syntactic
    /// contradiction.
    fn simplify(&mut self) {
        if self.marked_empty() {
            return;
        }
        let mut eqs: BTreeMap<Vec<i128>, i128> = BTreeMap::new();
        let mut ineqs: BTreeMap<Vec<i128>, (i128, RowKind)> = BTreeMap::new();
        for mut r in std::mem::take(&mut self.rows) {
            r.normalize();
            match r.constant_truth() {
                Some(true) => continue,
                Some(false) => {
                    *self = Polyhedron::empty(self.dim);
                    return;
                }
                None => {}
            }
            match r.kind {
                RowKind::Eq => {
                    if let Some(&c) = eqs.get(&r.coeffs) {
                        if c != r.constant {
                            *self = Polyhedron::empty(self.dim);
                            return;
                        }
                    } else {
                        eqs.insert(r.coeffs, r.constant);
                    }
                }
                kind => {
                    let e = ineqs.entry(r.coeffs).or_insert((r.constant, kind));
                    if r.constant < e.0 || (r.constant == e.0 && kind == RowKind::Gt) {
                        *e = (r.constant, kind);
                    }
                }
            }
        }
        let mut out_ineqs: Vec<Row> = Vec::new();
        for (coeffs, (c, kind)) in &ineqs {
            // inequality against an equality on the same expression
            let neg: Vec<i128> = coeffs.iter().map(|&a| -a).collect();
            let eq_same = eqs.get(coeffs).map(|&ce| (ce, 1));
            let eq_neg = eqs.get(&neg).map(|&ce| (ce, -1));
            if let Some((ce, s)) = eq_same.or(eq_neg) {
                // expression value is -ce (s = 1) or ce (s = -1)
                let slack = c - s * ce;
                let ok = slack > 0 || (slack == 0 && *kind == RowKind::Ge);
                if !ok {
                    *self = Polyhedron::empty(self.dim);
                    return;
                }
                continue;
            }
            // opposite pair: -c <= a.v <= c'
            if let Some(&(c2, kind2)) = ineqs.get(&neg) {
                let width = c + c2;
                let strict = *kind == RowKind::Gt || kind2 == RowKind::Gt;
                if width < 0 || (width == 0 && strict) {
                    *self = Polyhedron::empty(self.dim);
                    return;
                }
                if width == 0 {
                    let lead = coeffs.iter().copied().find(|&a| a != 0).unwrap_or(0);
                    if lead > 0 {
                        eqs.insert(coeffs.clone(), *c);
                    }
                    continue;
                }
            }
            out_ineqs.push(Row {
                kind: *kind,
                coeffs: coeffs.clone(),
                constant: *c,
            });
        }
        // equalities created from opposite pairs may now dominate others
        out_ineqs.retain(|r| !eqs.contains_key(&r.coeffs) && !eqs.contains_key(&r.negated_coeffs()));
        self.rows = eqs
            .into_iter()
            .map(|(coeffs, constant)| Row {
                kind: RowKind::Eq,
                coeffs,
                constant,
            })
            .chain(out_ineqs)
            .collect();
    }

    /// Drops rows entailed by the others (and nonnegativity). Assumes a
    /// non-empty polyhedron.
    fn remove_redundant(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            let r = self.rows.remove(i);
            if self.entails(&r) {
                continue;
            }
            self.rows.insert(i, r);
            i += 1;
        }
    }

    /// Exact projection along `var`; the variable is left unconstrained.
    fn eliminate_raw(&mut self, var: usize) {
        if self.marked_empty() {
            return;
        }
        let eq_pos = self
            .rows
            .iter()
            .position(|r| r.kind == RowKind::Eq && r.coeffs[var] != 0);
        if let Some(pos) = eq_pos {
            let e = self.rows.swap_remove(pos);
            let ek = e.coeffs[var];
            let mut rows = Vec::with_capacity(self.rows.len() + 1);
            for r in std::mem::take(&mut self.rows) {
                let rk = r.coeffs[var];
                if rk == 0 {
                    rows.push(r);
                } else {
                    rows.push(r.combine(ek.abs(), &e, -ek.signum() * rk, r.kind));
                }
            }
            // the eliminated variable was non-negative
            let mut rest = e.clone();
            rest.coeffs[var] = 0;
            if ek > 0 {
                rest.negate_in_place();
            }
            rest.kind = RowKind::Ge;
            rows.push(rest);
            self.rows = rows;
            for r in &mut self.rows {
                debug_assert_eq!(r.coeffs[var], 0);
                r.normalize();
            }
            self.simplify();
            return;
        }
        let mut unit = vec![0; self.dim];
        unit[var] = 1;
        let mut pos = vec![Row {
            kind: RowKind::Ge,
            coeffs: unit,
            constant: 0,
        }];
        let mut neg = Vec::new();
        let mut rows = Vec::new();
        for r in std::mem::take(&mut self.rows) {
            match r.coeffs[var].signum() {
                1 => pos.push(r),
                -1 => neg.push(r),
                _ => rows.push(r),
            }
        }
        for p in &pos {
            for n in &neg {
                let kind = if p.kind == RowKind::Gt || n.kind == RowKind::Gt {
                    RowKind::Gt
                } else {
                    RowKind::Ge
                };
                rows.push(p.combine(-n.coeffs[var], n, p.coeffs[var], kind));
            }
        }
        self.rows = rows;
        self.simplify();
    }

    /// Exact projection along each of `vars`, with redundancy removal.
    pub fn eliminate(&self, vars: &[usize]) -> Polyhedron {
        let mut p = self.clone();
        let mut fm = false;
        for &v in vars {
            if p.rows.iter().all(|r| r.coeffs[v] == 0) {
                continue;
            }
            let has_eq = p.rows.iter().any(|r| r.kind == RowKind::Eq && r.coeffs[v] != 0);
            p.eliminate_raw(v);
            fm |= !has_eq;
            if fm && p.rows.len() > 2 * p.dim + 4 {
                p.remove_redundant();
                fm = false;
            }
        }
        if fm {
            p.remove_redundant();
        }
        p
    }

    /// Resets `clock` to zero.
    pub fn reset(&self, clock: usize) -> Polyhedron {
        let mut p = self.eliminate(&[clock]);
        p.add_row(Row::from_terms(self.dim, &[(clock, 1)], 0, RowKind::Eq));
        p.simplify();
        p
    }

    /// Lets time elapse: the listed clocks advance together by any
    /// non-negative delay. Other variables are unchanged.
    pub fn elapse(&self, clocks: &[usize]) -> Polyhedron {
        if self.marked_empty() || clocks.is_empty() {
            return self.clone();
        }
        let d = self.dim;
        let mut ext = Polyhedron::universe(d + 1);
        for r in &self.rows {
            // substitute x = x' - delay
            let shift: i128 = clocks.iter().map(|&c| r.coeffs[c]).sum();
            let mut coeffs = r.coeffs.clone();
            coeffs.push(-shift);
            ext.rows.push(Row::new(r.kind, coeffs, r.constant));
        }
        for &c in clocks {
            // the pre-delay value was non-negative
            ext.rows
                .push(Row::from_terms(d + 1, &[(c, 1), (d, -1)], 0, RowKind::Ge));
        }
        ext.simplify();
        let out = ext.eliminate(&[d]);
        Polyhedron {
            dim: d,
            rows: out
                .rows
                .into_iter()
                .map(|mut r| {
                    r.coeffs.pop();
                    r
                })
                .collect(),
        }
    }

    /// Keeps the trailing `keep` variables, dropping the leading ones,
    /// which must already be unconstrained.
    pub fn tail(&self, keep: usize) -> Polyhedron {
        let skip = self.dim - keep;
        let rows = self.rows.iter().map(|r| {
            debug_assert!(r.coeffs[..skip].iter().all(|&a| a == 0));
            Row {
                kind: r.kind,
                coeffs: r.coeffs[skip..].to_vec(),
                constant: r.constant,
            }
        });
        Polyhedron {
            dim: keep,
            rows: rows.collect(),
        }
    }

    /// Embeds into a larger space, placing the current variables last.
    pub fn widen_front(&self, extra: usize) -> Polyhedron {
        let rows = self.rows.iter().map(|r| {
            let mut coeffs = vec![0; extra];
            coeffs.extend_from_slice(&r.coeffs);
            Row {
                kind: r.kind,
                coeffs,
                constant: r.constant,
            }
        });
        Polyhedron {
            dim: self.dim + extra,
            rows: rows.collect(),
        }
    }

    /// Unique representation of the solution set: implicit equalities made
    /// explicit and reduced to echelon form, remaining inequalities
    /// irredundant, rows sorted.
    pub fn canonicalize(&self) -> Polyhedron {
        let mut p = self.clone();
        p.simplify();
        if p.is_empty() {
            return Polyhedron::empty(p.dim);
        }
        let dim = p.dim;

        // implicit equalities, including variables pinned at zero
        let tight = |p: &Polyhedron, coeffs: &[i128], constant: i128| {
            let mut q = p.clone();
            q.add_row(Row::new(RowKind::Gt, coeffs.to_vec(), constant));
            q.is_empty()
        };
        let mut eqs: Vec<Row> = Vec::new();
        let mut ineqs: Vec<Row> = Vec::new();
        for r in &p.rows {
            match r.kind {
                RowKind::Eq => eqs.push(r.clone()),
                RowKind::Ge if tight(&p, &r.coeffs, r.constant) => {
                    eqs.push(Row::new(RowKind::Eq, r.coeffs.clone(), r.constant))
                }
                _ => ineqs.push(r.clone()),
            }
        }
        for v in 0..dim {
            let mut unit = vec![0; dim];
            unit[v] = 1;
            if tight(&p, &unit, 0) {
                eqs.push(Row::new(RowKind::Eq, unit, 0));
            }
        }

        // reduced echelon form, pivoting on the leftmost columns
        let mut pivots: Vec<(usize, Row)> = Vec::new();
        let mut pending = eqs;
        for col in 0..dim {
            let Some(i) = pending.iter().position(|r| r.coeffs[col] != 0) else {
                continue;
            };
            let mut e = pending.swap_remove(i);
            if e.coeffs[col] < 0 {
                e.negate_in_place();
            }
            let ec = e.coeffs[col];
            let reduce = |r: &Row| -> Row {
                let rc = r.coeffs[col];
                if rc == 0 {
                    r.clone()
                } else {
                    r.combine(ec, &e, -rc, r.kind)
                }
            };
            pending = pending.iter().map(reduce).collect();
            for (_, q) in pivots.iter_mut() {
                *q = reduce(q);
                if q.coeffs.iter().copied().find(|&a| a != 0).unwrap_or(0) < 0 {
                    q.negate_in_place();
                }
            }
            pivots.push((col, e));
        }
        debug_assert!(pending.iter().all(|r| r.constant_truth() == Some(true)));

        let mut rows: Vec<Row> = Vec::new();
        for (col, e) in &pivots {
            let ec = e.coeffs[*col];
            ineqs = ineqs
                .iter()
                .map(|r| {
                    let rc = r.coeffs[*col];
                    if rc == 0 {
                        r.clone()
                    } else {
                        r.combine(ec, e, -rc, r.kind)
                    }
                })
                .collect();
        }
        for (col, e) in &pivots {
            let mut rest = e.clone();
            rest.coeffs[*col] = 0;
            rest.negate_in_place();
            rest.kind = RowKind::Ge;
            ineqs.push(rest);
        }
        let mut ip = Polyhedron::from_rows(dim, ineqs);
        ip.simplify();
        let mut eq_rows: Vec<Row> = pivots.into_iter().map(|(_, mut e)| {
            e.normalize();
            e
        }).collect();
        eq_rows.sort();
        let mut all = Polyhedron {
            dim,
            rows: eq_rows.clone(),
        };
        all.rows.extend(ip.rows.iter().cloned());
        // drop inequalities implied by the rest (equalities always kept)
        let mut i = eq_rows.len();
        while i < all.rows.len() {
            let r = all.rows.remove(i);
            if all.entails(&r) {
                continue;
            }
            all.rows.insert(i, r);
            i += 1;
        }
        rows.extend(all.rows.drain(eq_rows.len()..));
        rows.sort();
        eq_rows.extend(rows);
        Polyhedron {
            dim,
            rows: eq_rows,
        }
    }
}

impl fmt::Display for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rows.is_empty() {
            return f.write_str("true");
        }
        let parts: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                let mut s = String::new();
                for (i, &a) in r.coeffs.iter().enumerate() {
                    if a != 0 {
                        s.push_str(&format!("{a:+}*v{i} "));
                    }
                }
                let op = match r.kind {
                    RowKind::Eq => "=",
                    RowKind::Ge => ">=",
                    RowKind::Gt => ">",
                };
                format!("{s}{:+} {op} 0", r.constant)
            })
            .collect();
        f.write_str(&parts.join(" && "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(coeffs: &[i128], c: i128, kind: RowKind) -> Row {
        Row::new(kind, coeffs.to_vec(), c)
    }

    fn ge(coeffs: &[i128], c: i128) -> Row {
        row(coeffs, c, RowKind::Ge)
    }

    fn eq(coeffs: &[i128], c: i128) -> Row {
        row(coeffs, c, RowKind::Eq)
    }

    fn poly(dim: usize, rows: Vec<Row>) -> Polyhedron {
        Polyhedron::from_rows(dim, rows)
    }

    #[test]
    fn emptiness() {
        // x <= 2 && x >= 3
        assert!(poly(1, vec![ge(&[-1], 2), ge(&[1], -3)]).is_empty());
        assert!(!poly(1, vec![ge(&[-1], 2)]).is_empty());
        // x > 0 && x <= 0
        assert!(poly(1, vec![row(&[1], 0, RowKind::Gt), ge(&[-1], 0)]).is_empty());
        // x < 0 impossible under nonnegativity
        assert!(poly(1, vec![row(&[-1], 0, RowKind::Gt)]).is_empty());
        assert!(!poly(2, vec![row(&[1, -1], 0, RowKind::Gt)]).is_empty());
    }

    #[test]
    fn inclusion() {
        let a = poly(1, vec![ge(&[-1], 2)]);
        let b = poly(1, vec![ge(&[-1], 3)]);
        assert!(b.includes(&a));
        assert!(!a.includes(&b));
        let open = poly(1, vec![row(&[-1], 3, RowKind::Gt)]);
        assert!(b.includes(&open));
        assert!(!open.includes(&b));
        assert!(open.includes(&a));
    }

    #[test]
    fn elapse_examples() {
        // {x = 0} -> {x >= 0}
        let z = poly(1, vec![eq(&[1], 0)]);
        assert!(z.elapse(&[0]).same_set(&Polyhedron::universe(1)));
        // {x = 0, y = 2} -> {y = x + 2}
        let z = poly(2, vec![eq(&[1, 0], 0), eq(&[0, 1], -2)]);
        let want = poly(2, vec![eq(&[-1, 1], -2)]);
        assert!(z.elapse(&[0, 1]).same_set(&want));
        // {x = p} -> {x >= p}
        let z = poly(2, vec![eq(&[1, -1], 0)]);
        let want = poly(2, vec![ge(&[1, -1], 0)]);
        assert!(z.elapse(&[0]).same_set(&want));
    }

    #[test]
    fn reset_examples() {
        // {x >= p, p <= 3} reset x -> {x = 0, p <= 3}
        let z = poly(2, vec![ge(&[1, -1], 0), ge(&[0, -1], 3)]);
        let want = poly(2, vec![eq(&[1, 0], 0), ge(&[0, -1], 3)]);
        assert!(z.reset(0).same_set(&want));
        // {x = y + 1, y >= 2} reset x -> {x = 0, y >= 2}
        let z = poly(2, vec![eq(&[1, -1], -1), ge(&[0, 1], -2)]);
        let want = poly(2, vec![eq(&[1, 0], 0), ge(&[0, 1], -2)]);
        assert!(z.reset(0).same_set(&want));
    }

    #[test]
    fn projection_example() {
        // {x = p + 2, x <= 5} -> {p <= 3}
        let z = poly(2, vec![eq(&[1, -1], -2), ge(&[-1, 0], 5)]);
        let proj = z.eliminate(&[0]).tail(1);
        assert!(proj.same_set(&poly(1, vec![ge(&[-1], 3)])));
        assert_eq!(proj.canonicalize().rows(), &[ge(&[-1], 3)]);
    }

    #[test]
    fn canonical_form_is_unique() {
        // x <= 3 && x >= 3  ==  x = 3
        let a = poly(2, vec![ge(&[-1, 0], 3), ge(&[1, 0], -3), ge(&[0, 1], -1)]);
        let b = poly(2, vec![eq(&[2, 0], -6), ge(&[1, 1], -4), ge(&[0, 2], -2)]);
        assert_eq!(a.canonicalize(), b.canonicalize());
        // p <= 0 pins p at zero
        let c = poly(1, vec![ge(&[-1], 0)]);
        assert_eq!(c.canonicalize().rows(), &[eq(&[1], 0)]);
        assert_eq!(Polyhedron::universe(2).canonicalize(), Polyhedron::universe(2));
        let e1 = poly(1, vec![ge(&[1], -5), ge(&[-1], 1)]);
        assert_eq!(e1.canonicalize(), Polyhedron::empty(1));
    }

    fn union(a: &Polyhedron, b: &Polyhedron) -> Option<Polyhedron> {
        let (ea, eb) = (Entailer::new(Cow::Borrowed(a)), Entailer::new(Cow::Borrowed(b)));
        Polyhedron::convex_union(&ea, &eb, 8)
    }

    #[test]
    fn convex_union_cases() {
        let interval = |lo: i128, hi: i128| poly(1, vec![ge(&[1], -lo), ge(&[-1], hi)]);
        let u = union(&interval(0, 2), &interval(1, 3)).unwrap();
        assert!(u.same_set(&interval(0, 3)));
        // touching intervals join, separated ones do not
        assert!(union(&interval(0, 1), &interval(1, 3)).unwrap().same_set(&interval(0, 3)));
        assert!(union(&interval(0, 1), &interval(2, 3)).is_none());
        // [0, 1) and [1, 2]
        let open = poly(1, vec![row(&[-1], 1, RowKind::Gt)]);
        assert!(union(&open, &interval(1, 2)).unwrap().same_set(&interval(0, 2)));
        // nested
        assert!(union(&interval(1, 2), &interval(0, 3)).unwrap().same_set(&interval(0, 3)));
        // two unit squares side by side, then an L shape
        let square = |x: i128, y: i128| {
            poly(2, vec![ge(&[1, 0], -x), ge(&[-1, 0], x + 1), ge(&[0, 1], -y), ge(&[0, -1], y + 1)])
        };
        let wide = poly(2, vec![ge(&[-1, 0], 2), ge(&[0, -1], 1)]);
        assert!(union(&square(0, 0), &square(1, 0)).unwrap().same_set(&wide));
        assert!(union(&square(0, 0), &square(1, 1)).is_none());
        let tall = poly(2, vec![ge(&[-1, 0], 1), ge(&[0, -1], 2)]);
        assert!(union(&tall, &wide).is_none());
        // the diagonal halves of a square
        let lower = poly(2, vec![ge(&[1, -1], 0), ge(&[-1, 0], 1)]);
        let upper = poly(2, vec![ge(&[-1, 1], 0), ge(&[0, -1], 1)]);
        assert!(union(&lower, &upper).unwrap().same_set(&square(0, 0)));
    }
}
