//! Difference-bound matrices, used as an exact shortcut for polyhedra whose
//! rows all have the form `v_i - v_j ⋈ c` or `v_i ⋈ c`.

use std::cmp::Ordering;

use num_rational::Ratio;

use super::poly::{Row, RowKind};

/// Upper bound `value` (strict or not) on a difference; `None` is +inf.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Bound {
    value: Ratio<i128>,
    strict: bool,
}

impl Bound {
    fn weak(value: Ratio<i128>) -> Self {
        Bound { value, strict: false }
    }

    fn add(self, o: Bound) -> Bound {
        Bound {
            value: self.value + o.value,
            strict: self.strict || o.strict,
        }
    }

    /// Tighter bounds compare smaller.
    fn cmp(&self, o: &Bound) -> Ordering {
        self.value
            .cmp(&o.value)
            .then_with(|| o.strict.cmp(&self.strict))
    }
}

fn tighter(a: Option<Bound>, b: Option<Bound>) -> bool {
    match (a, b) {
        (a, None) => a.is_some(),
        (None, Some(_)) => false,
        (Some(a), Some(b)) => a.cmp(&b) == Ordering::Less,
    }
}

/// A difference constraint `v_to - v_from <= bound` over indices in which
/// 0 is the constant zero and `k + 1` is variable `k`.
struct Diff {
    to: usize,
    from: usize,
    bound: Bound,
}

/// Splits a row into difference constraints, or `None` if it has another
/// shape. Constant rows are handled by the caller.
fn diffs(r: &Row) -> Option<Vec<Diff>> {
    let nz: Vec<(usize, i128)> = r
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, &a)| a != 0)
        .map(|(i, &a)| (i, a))
        .collect();
    // `a * (v_p - v_n) + c >= 0`, i.e. v_n - v_p <= c / a
    let (p, n, a) = match nz.as_slice() {
        [(i, a)] if *a > 0 => (i + 1, 0, *a),
        [(i, a)] => (0, i + 1, -*a),
        [(i, a), (j, b)] if *a == -*b => {
            if *a > 0 {
                (i + 1, j + 1, *a)
            } else {
                (j + 1, i + 1, *b)
            }
        }
        _ => return None,
    };
    let value = Ratio::new(r.constant, a);
    let strict = r.kind == RowKind::Gt;
    let mut out = vec![Diff {
        to: n,
        from: p,
        bound: Bound { value, strict },
    }];
    if r.kind == RowKind::Eq {
        out.push(Diff {
            to: p,
            from: n,
            bound: Bound::weak(-value),
        });
    }
    Some(out)
}

#[derive(Clone, Debug)]
pub(crate) struct Dbm {
    n: usize,
    m: Vec<Option<Bound>>,
}

impl Dbm {
    /// Builds the matrix of `rows` plus the non-negativity of every variable;
    /// `None` if some row is not a difference constraint.
    pub(crate) fn from_rows<'a>(dim: usize, rows: impl IntoIterator<Item = &'a Row>) -> Option<Dbm> {
        let n = dim + 1;
        let mut d = Dbm {
            n,
            m: vec![None; n * n],
        };
        for i in 0..n {
            d.m[i * n + i] = Some(Bound::weak(Ratio::from_integer(0)));
            // 0 - v <= 0
            d.tighten(0, i, Bound::weak(Ratio::from_integer(0)));
        }
        for r in rows {
            if r.coeffs.iter().all(|&a| a == 0) {
                continue;
            }
            for df in diffs(r)? {
                d.tighten(df.to, df.from, df.bound);
            }
        }
        Some(d)
    }

    fn at(&self, to: usize, from: usize) -> Option<Bound> {
        self.m[to * self.n + from]
    }

    fn tighten(&mut self, to: usize, from: usize, b: Bound) {
        let cell = &mut self.m[to * self.n + from];
        if tighter(Some(b), *cell) {
            *cell = Some(b);
        }
    }

    /// Shortest-path closure; false if the constraints are unsatisfiable.
    pub(crate) fn close(&mut self) -> bool {
        let n = self.n;
        for k in 0..n {
            for i in 0..n {
                let Some(ik) = self.at(i, k) else { continue };
                for j in 0..n {
                    let Some(kj) = self.at(k, j) else { continue };
                    let via = ik.add(kj);
                    if tighter(Some(via), self.at(i, j)) {
                        self.m[i * n + j] = Some(via);
                    }
                }
            }
            let zero = Bound::weak(Ratio::from_integer(0));
            if (0..n).any(|i| self.at(i, i).is_some_and(|b| b.cmp(&zero) == Ordering::Less)) {
                return false;
            }
        }
        true
    }

    /// Whether the closed, satisfiable matrix entails `r`; `None` if `r`
    /// is not a difference constraint.
    pub(crate) fn entails(&self, r: &Row) -> Option<bool> {
        let ds = diffs(r)?;
        Some(ds.iter().all(|df| match self.at(df.to, df.from) {
            None => false,
            Some(b) => b.cmp(&df.bound) != Ordering::Greater,
        }))
    }
}
