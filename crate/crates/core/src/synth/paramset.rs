use std::fmt;

use num_rational::Ratio;

use super::poly::{Polyhedron, Row, RowKind};
use crate::model::ParamId;
use crate::pta::Valuation;

/// Most inequalities of one disjunct that may fail on another when trying
/// to join them.
const JOIN_LIMIT: usize = 8;

/// A finite union of parameter polyhedra in canonical form: every disjunct
/// canonical, none included in another, no two with a convex union, sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParameterSet {
    params: Vec<ParamId>,
    disjuncts: Vec<Polyhedron>,
}

impl ParameterSet {
    /// The empty set.
    pub fn empty(params: Vec<ParamId>) -> Self {
        ParameterSet {
            params,
            disjuncts: vec![],
        }
    }

    pub fn params(&self) -> &[ParamId] {
        &self.params
    }

    pub fn disjuncts(&self) -> &[Polyhedron] {
        &self.disjuncts
    }

    pub fn is_empty(&self) -> bool {
        self.disjuncts.is_empty()
    }

    /// Adds a polyhedron over the parameters, keeping only maximal
    /// disjuncts and joining disjuncts whose union is convex.
    pub fn add(&mut self, p: &Polyhedron) {
        debug_assert_eq!(p.dim(), self.params.len());
        let mut p = p.canonicalize();
        if p.is_empty() || self.disjuncts.iter().any(|d| d.includes_nonempty(&p)) {
            return;
        }
        self.disjuncts.retain(|d| !p.includes_nonempty(d));
        loop {
            let e = p.entailer();
            let found = self
                .disjuncts
                .iter()
                .enumerate()
                .find_map(|(i, d)| Polyhedron::convex_union(&e, &d.entailer(), JOIN_LIMIT).map(|u| (i, u)));
            let Some((i, union)) = found else {
                break;
            };
            drop(e);
            self.disjuncts.remove(i);
            p = union.canonicalize();
            self.disjuncts.retain(|d| !p.includes_nonempty(d));
        }
        let at = self.disjuncts.binary_search(&p).unwrap_or_else(|i| i);
        self.disjuncts.insert(at, p);
    }

    pub fn contains_point(&self, point: &[Ratio<i128>]) -> bool {
        self.disjuncts.iter().any(|d| d.contains_point(point))
    }

    /// Membership of a valuation; missing parameters count as 0.
    pub fn contains(&self, v: &Valuation) -> bool {
        let point: Vec<Ratio<i128>> = self
            .params
            .iter()
            .map(|p| {
                let r = v.get(p).copied().unwrap_or_default();
                Ratio::new(*r.numer() as i128, *r.denom() as i128)
            })
            .collect();
        self.contains_point(&point)
    }

    /// Renders one row as `lead op rhs`, with the first parameter (in
    /// declaration order) on the left.
    pub fn render_row(&self, r: &Row) -> String {
        let Some(lead) = r.coeffs.iter().position(|&a| a != 0) else {
            return if r.holds_at(&[]) { "true" } else { "false" }.into();
        };
        let flip = r.coeffs[lead] < 0;
        let s = if flip { -1 } else { 1 };
        let op = match (r.kind, flip) {
            (RowKind::Eq, _) => "=",
            (RowKind::Ge, false) => ">=",
            (RowKind::Ge, true) => "<=",
            (RowKind::Gt, false) => ">",
            (RowKind::Gt, true) => "<",
        };
        let term = |k: i128, name: &ParamId| {
            if k == 1 {
                name.to_string()
            } else {
                format!("{k}*{name}")
            }
        };
        let lhs = term(s * r.coeffs[lead], &self.params[lead]);
        let mut rhs = String::new();
        for (j, &a) in r.coeffs.iter().enumerate().skip(lead + 1) {
            let k = -s * a;
            if k == 0 {
                continue;
            }
            if rhs.is_empty() {
                if k < 0 {
                    rhs.push('-');
                }
            } else {
                rhs.push_str(if k < 0 { " - " } else { " + " });
            }
            rhs.push_str(&term(k.abs(), &self.params[j]));
        }
        let c = -s * r.constant;
        if rhs.is_empty() {
            rhs = c.to_string();
        } else if c > 0 {
            rhs.push_str(&format!(" + {c}"));
        } else if c < 0 {
            rhs.push_str(&format!(" - {}", -c));
        }
        format!("{lhs} {op} {rhs}")
    }

    pub fn render_disjunct(&self, d: &Polyhedron) -> String {
        if d.rows().is_empty() {
            return "true".into();
        }
        d.rows()
            .iter()
            .map(|r| self.render_row(r))
            .collect::<Vec<_>>()
            .join(" && ")
    }
}

impl fmt::Display for ParameterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.disjuncts.as_slice() {
            [] => f.write_str("false"),
            [one] => f.write_str(&self.render_disjunct(one)),
            many => {
                let parts: Vec<String> = many
                    .iter()
                    .map(|d| format!("({})", self.render_disjunct(d)))
                    .collect();
                f.write_str(&parts.join(" || "))
            }
        }
    }
}
