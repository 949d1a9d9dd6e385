//! Exact two-phase simplex over non-negative variables, with Bland's rule.
//!
//! The tableau is fraction free: every row is an integer vector that stands
//! for the equation it spans up to a positive factor, and is divided by the
//! gcd of its entries after each pivot. Entries are `i128` with checked
//! arithmetic; on overflow the whole problem is solved again over big
//! integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// One constraint `coeffs · v + constant >= 0`, or `= 0` when `eq`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LpRow<'a> {
    pub coeffs: &'a [i128],
    pub constant: i128,
    pub eq: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal(BigRational),
}

trait Int: Clone + Sized {
    fn int(v: i128) -> Self;
    fn is_zero(&self) -> bool;
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn is_one(&self) -> bool;
    fn neg(&self) -> Self;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    /// Non-negative gcd.
    fn gcd(&self, o: &Self) -> Self;
    fn div_exact(&self, o: &Self) -> Self;
    fn big(&self) -> BigInt;
}

impl Int for i128 {
    fn int(v: i128) -> Self {
        v
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_pos(&self) -> bool {
        *self > 0
    }
    fn is_neg(&self) -> bool {
        *self < 0
    }
    fn is_one(&self) -> bool {
        *self == 1
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(*o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.unsigned_abs(), o.unsigned_abs());
        while b != 0 {
            (a, b) = (b, a % b);
        }
        i128::try_from(a).unwrap_or(i128::MAX)
    }
    fn div_exact(&self, o: &Self) -> Self {
        *self / *o
    }
    fn big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Int for BigInt {
    fn int(v: i128) -> Self {
        BigInt::from(v)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
    fn is_one(&self) -> bool {
        num_traits::One::is_one(self)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn gcd(&self, o: &Self) -> Self {
        Integer::gcd(self, o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
    fn big(&self) -> BigInt {
        self.clone()
    }
}

struct Overflow;

/// `a / b < c / d` for positive `b` and `d`.
fn frac_less<I: Int>(a: &I, b: &I, c: &I, d: &I) -> Result<bool, Overflow> {
    let l = a.mul(d).ok_or(Overflow)?;
    let r = c.mul(b).ok_or(Overflow)?;
    Ok(r.sub(&l).ok_or(Overflow)?.is_pos())
}

/// Divides `v` (and `extra`) by the gcd of all their entries.
fn reduce<I: Int>(v: &mut [I], extra: Option<&mut I>) {
    let mut g = extra.as_ref().map_or(I::int(0), |e| (*e).clone());
    for x in v.iter() {
        if !x.is_zero() {
            g = g.gcd(x);
        }
    }
    if g.is_zero() || g.is_one() {
        return;
    }
    for x in v.iter_mut() {
        if !x.is_zero() {
            *x = x.div_exact(&g);
        }
    }
    if let Some(e) = extra {
        *e = e.div_exact(&g);
    }
}

struct Tableau<I> {
    /// Each row has `ncols + 1` entries, the last being the right-hand side.
    /// The coefficient of the row's basic column is positive.
    rows: Vec<Vec<I>>,
    /// `den * z + obj · v = obj[ncols]`.
    obj: Vec<I>,
    den: I,
    basis: Vec<usize>,
    ncols: usize,
}

/// `row := p * row - f * pivot_row`.
fn eliminate<I: Int>(row: &mut [I], pivot_row: &[I], p: &I, f: &I) -> Result<(), Overflow> {
    for (v, pv) in row.iter_mut().zip(pivot_row) {
        let a = if v.is_zero() { I::int(0) } else { v.mul(p).ok_or(Overflow)? };
        *v = if pv.is_zero() {
            a
        } else {
            a.sub(&f.mul(pv).ok_or(Overflow)?).ok_or(Overflow)?
        };
    }
    Ok(())
}

impl<I: Int> Tableau<I> {
    fn pivot(&mut self, r: usize, c: usize) -> Result<(), Overflow> {
        if self.rows[r][c].is_neg() {
            for v in self.rows[r].iter_mut() {
                *v = v.neg();
            }
        }
        let p = self.rows[r][c].clone();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for row in self.rows.iter_mut() {
            if row.is_empty() || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            eliminate(row, &pivot_row, &p, &f)?;
            reduce(row, None);
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            eliminate(&mut self.obj, &pivot_row, &p, &f)?;
            self.den = self.den.mul(&p).ok_or(Overflow)?;
            reduce(&mut self.obj, Some(&mut self.den));
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
        Ok(())
    }

    /// Maximizes until optimal (`true`) or unbounded (`false`), entering
    /// only columns below `allowed`.
    fn run(&mut self, allowed: usize) -> Result<bool, Overflow> {
        let rhs = self.ncols;
        loop {
            let Some(c) = (0..allowed).find(|&j| self.obj[j].is_neg()) else {
                return Ok(true);
            };
            let mut best: Option<usize> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_pos() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some(bi) => {
                        let b = &self.rows[bi];
                        frac_less(&row[rhs], &row[c], &b[rhs], &b[c])?
                            || (!frac_less(&b[rhs], &b[c], &row[rhs], &row[c])?
                                && self.basis[i] < self.basis[bi])
                    }
                };
                if better {
                    best = Some(i);
                }
            }
            match best {
                None => return Ok(false),
                Some(r) => self.pivot(r, c)?,
            }
        }
    }
}

/// Values of the first `n` columns at the current basic solution.
fn point<I: Int>(tab: &Tableau<I>, n: usize) -> Vec<BigRational> {
    let mut v = vec![BigRational::zero(); n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            v[b] = BigRational::new(tab.rows[i][tab.ncols].big(), tab.rows[i][b].big());
        }
    }
    v
}

/// Maximizes `objective · v` (or only finds a feasible point when there is
/// no objective), also returning the optimal or feasible point.
fn solve_at<I: Int>(
    n: usize,
    rows: &[LpRow],
    objective: Option<&[i128]>,
) -> Result<(LpOutcome, Option<Vec<BigRational>>), Overflow> {
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| !r.eq).count();
    // artificial columns are allocated per row on demand
    let mut needs_art = Vec::with_capacity(m);
    for r in rows {
        needs_art.push(r.eq || -r.constant > 0);
    }
    let n_art = needs_art.iter().filter(|&&b| b).count();
    let ncols = n + n_slack + n_art;
    let zero = I::int(0);
    let mut tab = Tableau {
        rows: Vec::with_capacity(m),
        obj: vec![zero.clone(); ncols + 1],
        den: I::int(1),
        basis: Vec::with_capacity(m),
        ncols,
    };
    let (mut slack, mut art) = (n, n + n_slack);
    for (r, &with_art) in rows.iter().zip(&needs_art) {
        let mut row = vec![zero.clone(); ncols + 1];
        let b = -r.constant;
        // a.v - s = b; flip so that the right-hand side is non-negative
        let flip = b < 0 || (!r.eq && b == 0);
        let sign = if flip { -1 } else { 1 };
        for (j, &a) in r.coeffs.iter().enumerate().take(n) {
            if a != 0 {
                row[j] = I::int(sign * a);
            }
        }
        row[ncols] = I::int(sign * b);
        let basic = if r.eq {
            art += 1;
            row[art - 1] = I::int(1);
            art - 1
        } else {
            slack += 1;
            row[slack - 1] = I::int(-sign);
            if with_art {
                art += 1;
                row[art - 1] = I::int(1);
                art - 1
            } else {
                slack - 1
            }
        };
        tab.rows.push(row);
        tab.basis.push(basic);
    }

    // phase 1: maximize the negated sum of artificials
    let first_art = n + n_slack;
    if n_art > 0 {
        for j in first_art..ncols {
            tab.obj[j] = I::int(1);
        }
        for i in 0..m {
            if tab.basis[i] >= first_art {
                for j in 0..=ncols {
                    let v = tab.obj[j].sub(&tab.rows[i][j]).ok_or(Overflow)?;
                    tab.obj[j] = v;
                }
            }
        }
        tab.run(ncols)?;
        if tab.obj[ncols].is_neg() {
            return Ok((LpOutcome::Infeasible, None));
        }
        // drive the remaining (zero-valued) artificials out of the basis
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= first_art {
                match (0..first_art).find(|&j| !tab.rows[i][j].is_zero()) {
                    Some(j) => {
                        tab.pivot(i, j)?;
                        i += 1;
                    }
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }
    let Some(objective) = objective else {
        return Ok((LpOutcome::Optimal(BigRational::zero()), Some(point(&tab, n))));
    };

    // phase 2
    tab.obj = vec![zero; ncols + 1];
    tab.den = I::int(1);
    for (j, &c) in objective.iter().enumerate().take(n) {
        if c != 0 {
            tab.obj[j] = I::int(-c);
        }
    }
    for i in 0..tab.rows.len() {
        let b = tab.basis[i];
        if tab.obj[b].is_zero() {
            continue;
        }
        let f = tab.obj[b].clone();
        let p = tab.rows[i][b].clone();
        eliminate(&mut tab.obj, &tab.rows[i], &p, &f)?;
        tab.den = tab.den.mul(&p).ok_or(Overflow)?;
        reduce(&mut tab.obj, Some(&mut tab.den));
    }
    if !tab.run(first_art)? {
        return Ok((LpOutcome::Unbounded, None));
    }
    let value = BigRational::new(tab.obj[ncols].big(), tab.den.big());
    Ok((LpOutcome::Optimal(value), Some(point(&tab, n))))
}

fn solve_any(n: usize, rows: &[LpRow], objective: Option<&[i128]>) -> (LpOutcome, Option<Vec<BigRational>>) {
    match solve_at::<i128>(n, rows, objective) {
        Ok(o) => o,
        Err(Overflow) => match solve_at::<BigInt>(n, rows, objective) {
            Ok(o) => o,
            Err(Overflow) => unreachable!("big integers do not overflow"),
        },
    }
}

/// Like [`maximize`], also returning an optimal point.
pub(crate) fn maximize_at(n: usize, rows: &[LpRow], objective: &[i128]) -> (LpOutcome, Option<Vec<BigRational>>) {
    solve_any(n, rows, Some(objective))
}

/// Some point satisfying `rows` and `v >= 0`, if any.
pub(crate) fn feasible_point(n: usize, rows: &[LpRow]) -> Option<Vec<BigRational>> {
    solve_any(n, rows, None).1
}

/// Maximizes `objective · v` over `v >= 0` subject to `rows`.
pub(crate) fn maximize(n: usize, rows: &[LpRow], objective: &[i128]) -> LpOutcome {
    solve_any(n, rows, Some(objective)).0
}

/// Whether `rows` together with `v >= 0` have a solution.
pub(crate) fn feasible(n: usize, rows: &[LpRow]) -> bool {
    solve_any(n, rows, None).0 != LpOutcome::Infeasible
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(coeffs: &[i128], constant: i128, eq: bool) -> LpRow<'_> {
        LpRow {
            coeffs,
            constant,
            eq,
        }
    }

    fn big(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn feasible_point_satisfies_rows() {
        // x + y = 4, x - 2y >= 1, y >= 1
        let (a, b, c) = ([1, 1], [1, -2], [0, 1]);
        let rows = [row(&a, -4, true), row(&b, -1, false), row(&c, -1, false)];
        let p = feasible_point(2, &rows).unwrap();
        for r in &rows {
            let v = big(r.coeffs[0] as i64) * &p[0] + big(r.coeffs[1] as i64) * &p[1] + big(r.constant as i64);
            if r.eq {
                assert!(Zero::is_zero(&v));
            } else {
                assert!(!Signed::is_negative(&v));
            }
        }
        let (d,) = ([-1, 0],);
        let mut bad = rows.to_vec();
        bad.push(row(&d, 2, false));
        assert!(feasible_point(2, &bad).is_none());
    }

    #[test]
    fn bounded_maximum() {
        // x + y <= 4, x <= 3, maximize 2x + y => 7
        let rows = [row(&[-1, -1], 4, false), row(&[-1, 0], 3, false)];
        assert_eq!(maximize(2, &rows, &[2, 1]), LpOutcome::Optimal(big(7)));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let rows = [row(&[1], -3, false), row(&[-1], 2, false)];
        assert_eq!(maximize(1, &rows, &[1]), LpOutcome::Infeasible);
        assert!(!feasible(1, &rows));
        let rows = [row(&[1], -3, false)];
        assert_eq!(maximize(1, &rows, &[1]), LpOutcome::Unbounded);
        assert_eq!(maximize(1, &rows, &[-1]), LpOutcome::Optimal(big(-3)));
    }

    #[test]
    fn equalities_and_redundant_rows() {
        // x = y + 1, 2x = 2y + 2, y <= 5, max x => 6
        let rows = [
            row(&[1, -1], -1, true),
            row(&[2, -2], -2, true),
            row(&[0, -1], 5, false),
        ];
        assert_eq!(maximize(2, &rows, &[1, 0]), LpOutcome::Optimal(big(6)));
        // x = -1 has no non-negative solution
        assert!(!feasible(1, &[row(&[1], 1, true)]));
    }

    #[test]
    fn fractional_optimum() {
        // 3x <= 2 => max x = 2/3
        let rows = [row(&[-3], 2, false)];
        assert_eq!(
            maximize(1, &rows, &[1]),
            LpOutcome::Optimal(BigRational::new(BigInt::from(2), BigInt::from(3)))
        );
    }

    #[test]
    fn overflow_falls_back() {
        let huge = i128::MAX / 3;
        let (a, b) = ([huge, -7], [-huge + 1, 3]);
        let rows = [row(&a, 1, false), row(&b, 5, false)];
        assert!(solve_at::<i128>(2, &rows, Some(&[1, 1])).is_err());
        let Ok((want, _)) = solve_at::<BigInt>(2, &rows, Some(&[1, 1])) else {
            unreachable!()
        };
        assert_eq!(maximize(2, &rows, &[1, 1]), want);
    }

    #[test]
    fn backends_agree_on_small_programs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..500 {
            let n = rng.gen_range(1..4);
            let m = rng.gen_range(1..6);
            let data: Vec<(Vec<i128>, i128, bool)> = (0..m)
                .map(|_| {
                    let c = (0..n).map(|_| rng.gen_range(-5..=5)).collect();
                    (c, rng.gen_range(-9..=9), rng.gen_bool(0.2))
                })
                .collect();
            let rows: Vec<LpRow> = data.iter().map(|(c, k, e)| row(c, *k, *e)).collect();
            let obj: Vec<i128> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
            let Ok((small, p)) = solve_at::<i128>(n, &rows, Some(&obj)) else {
                unreachable!()
            };
            let Ok((wide, _)) = solve_at::<BigInt>(n, &rows, Some(&obj)) else {
                unreachable!()
            };
            assert_eq!(small, wide);
            if let (LpOutcome::Optimal(best), Some(p)) = (&small, p) {
                let value: BigRational = p.iter().zip(&obj).map(|(x, &c)| x * big(c as i64)).sum();
                assert_eq!(&value, best);
                for (c, k, e) in &data {
                    let lhs: BigRational =
                        p.iter().zip(c).map(|(x, &a)| x * big(a as i64)).sum::<BigRational>() + big(*k as i64);
                    assert!(if *e { lhs.is_zero() } else { !lhs.is_negative() });
                }
            }
        }
    }
}
