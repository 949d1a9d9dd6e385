//! Networks of parametric timed automata with global discrete variables,
//! composed in parallel and synchronized on shared actions.
//!
//! Clocks, parameters, discrete variables and actions are interned in
//! network-wide tables and referred to by index.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::model::{CmpOp, ParamDecl, ParamId};
use crate::rational::{format_rational, Rational};

pub type ClockId = usize;
pub type ParamIdx = usize;
pub type VarId = usize;
pub type ActionId = usize;
pub type LocId = usize;

/// `Σ coeffs[p] * p + constant`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearTerm {
    pub coeffs: BTreeMap<ParamIdx, i64>,
    pub constant: Rational,
}

impl LinearTerm {
    pub fn constant(c: Rational) -> Self {
        LinearTerm {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn param(p: ParamIdx) -> Self {
        LinearTerm {
            coeffs: BTreeMap::from([(p, 1)]),
            constant: Rational::from_integer(0),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.values().all(|&c| c == 0)
    }
}

/// `clock op term`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomicConstraint {
    pub clock: ClockId,
    pub op: CmpOp,
    pub term: LinearTerm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PredOp {
    Eq,
    Ne,
}

/// `var == value` or `var != value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DiscretePred {
    pub var: VarId,
    pub op: PredOp,
    pub value: i64,
}

impl DiscretePred {
    pub fn eq(var: VarId, value: i64) -> Self {
        DiscretePred {
            var,
            op: PredOp::Eq,
            value,
        }
    }

    pub fn ne(var: VarId, value: i64) -> Self {
        DiscretePred {
            var,
            op: PredOp::Ne,
            value,
        }
    }

    pub fn holds(&self, vals: &[i64]) -> bool {
        match self.op {
            PredOp::Eq => vals[self.var] == self.value,
            PredOp::Ne => vals[self.var] != self.value,
        }
    }
}

/// A conjunction of clock constraints and discrete predicates. Also used for
/// location invariants, whose discrete part is always empty in practice.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Guard {
    pub clocks: Vec<AtomicConstraint>,
    pub discrete: Vec<DiscretePred>,
}

impl Guard {
    pub fn is_true(&self) -> bool {
        self.clocks.is_empty() && self.discrete.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub var: VarId,
    pub value: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub source: LocId,
    pub guard: Guard,
    pub action: ActionId,
    pub resets: Vec<ClockId>,
    pub updates: Vec<Assignment>,
    pub target: LocId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Location {
    pub name: String,
    pub invariant: Guard,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pta {
    pub name: String,
    pub alphabet: BTreeSet<ActionId>,
    pub locations: Vec<Location>,
    pub initial: LocId,
    pub finals: Vec<LocId>,
    /// Clocks this automaton reads or resets.
    pub clocks: Vec<ClockId>,
    pub edges: Vec<Edge>,
}

impl Pta {
    pub fn new(name: impl Into<String>) -> Self {
        Pta {
            name: name.into(),
            alphabet: BTreeSet::new(),
            locations: Vec::new(),
            initial: 0,
            finals: Vec::new(),
            clocks: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn add_location(&mut self, name: impl Into<String>, invariant: Guard) -> LocId {
        self.locations.push(Location {
            name: name.into(),
            invariant,
        });
        self.locations.len() - 1
    }

    pub fn add_edge(&mut self, edge: Edge) {
        self.alphabet.insert(edge.action);
        self.edges.push(edge);
    }

    pub fn is_final(&self, loc: LocId) -> bool {
        self.finals.contains(&loc)
    }

    /// Parameters occurring in any guard or invariant.
    pub fn params(&self) -> BTreeSet<ParamIdx> {
        let invs = self.locations.iter().map(|l| &l.invariant);
        let guards = self.edges.iter().map(|e| &e.guard);
        invs.chain(guards)
            .flat_map(|g| g.clocks.iter())
            .flat_map(|a| a.term.coeffs.keys().copied())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteVar {
    pub name: String,
    pub min: i64,
    pub max: i64,
    pub init: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PtaNetwork {
    pub components: Vec<Pta>,
    pub clocks: Vec<String>,
    pub params: Vec<ParamDecl>,
    pub vars: Vec<DiscreteVar>,
    pub actions: Vec<String>,
}

impl PtaNetwork {
    pub fn add_clock(&mut self, name: impl Into<String>) -> ClockId {
        self.clocks.push(name.into());
        self.clocks.len() - 1
    }

    pub fn add_var(&mut self, name: impl Into<String>, min: i64, max: i64, init: i64) -> VarId {
        self.vars.push(DiscreteVar {
            name: name.into(),
            min,
            max,
            init,
        });
        self.vars.len() - 1
    }

    pub fn add_action(&mut self, name: impl Into<String>) -> ActionId {
        self.actions.push(name.into());
        self.actions.len() - 1
    }

    pub fn initial_discretes(&self) -> Vec<i64> {
        self.vars.iter().map(|v| v.init).collect()
    }

    /// Indices of the components whose alphabet contains `a`, ascending.
    pub fn owners(&self, a: ActionId) -> Vec<usize> {
        self.components
            .iter()
            .enumerate()
            .filter(|(_, p)| p.alphabet.contains(&a))
            .map(|(i, _)| i)
            .collect()
    }
}

/// One well-formedness violation of a network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PtaIssue {
    /// Offending automaton, or `network`.
    pub component: String,
    pub message: String,
}

impl fmt::Display for PtaIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.component, self.message)
    }
}

/// Checks the structural invariants of a network: index ranges, initial and
/// final locations, alphabets, clock ownership and discrete ranges.
pub fn check_wellformed(net: &PtaNetwork) -> Vec<PtaIssue> {
    let mut issues = Vec::new();
    let mut used_actions = BTreeSet::new();
    for p in &net.components {
        let mut bad = |m: String| {
            issues.push(PtaIssue {
                component: p.name.clone(),
                message: m,
            })
        };
        let n = p.locations.len();
        if p.initial >= n {
            bad(format!("initial location {} out of range", p.initial));
        }
        if p.finals.is_empty() {
            bad("no final location".into());
        }
        for &f in &p.finals {
            if f >= n {
                bad(format!("final location {f} out of range"));
            }
        }
        for &c in &p.clocks {
            if c >= net.clocks.len() {
                bad(format!("clock {c} is not declared"));
            }
        }
        let owns = |c: ClockId| p.clocks.contains(&c);
        let check_guard = |g: &Guard, what: &str, bad: &mut dyn FnMut(String)| {
            for a in &g.clocks {
                if !owns(a.clock) {
                    bad(format!("{what} uses foreign clock {}", a.clock));
                }
                for &q in a.term.coeffs.keys() {
                    if q >= net.params.len() {
                        bad(format!("{what} uses undeclared parameter {q}"));
                    }
                }
            }
            for d in &g.discrete {
                match net.vars.get(d.var) {
                    None => bad(format!("{what} tests undeclared variable {}", d.var)),
                    Some(v) if d.value < v.min || d.value > v.max => {
                        bad(format!("{what} compares {} with out-of-range {}", v.name, d.value))
                    }
                    Some(_) => {}
                }
            }
        };
        for l in &p.locations {
            check_guard(&l.invariant, &format!("invariant of {}", l.name), &mut bad);
        }
        for (i, e) in p.edges.iter().enumerate() {
            let what = format!("edge #{i}");
            if e.source >= n || e.target >= n {
                bad(format!("{what} has an endpoint out of range"));
            }
            if !p.alphabet.contains(&e.action) {
                bad(format!("{what} action {} is not in the alphabet", e.action));
            }
            check_guard(&e.guard, &what, &mut bad);
            for &r in &e.resets {
                if !owns(r) {
                    bad(format!("{what} resets foreign clock {r}"));
                }
            }
            for u in &e.updates {
                match net.vars.get(u.var) {
                    None => bad(format!("{what} assigns undeclared variable {}", u.var)),
                    Some(v) if u.value < v.min || u.value > v.max => {
                        bad(format!("{what} assigns out-of-range {} to {}", u.value, v.name))
                    }
                    Some(_) => {}
                }
            }
        }
        for &a in &p.alphabet {
            if a >= net.actions.len() {
                bad(format!("action {a} is not declared"));
            }
        }
        used_actions.extend(p.alphabet.iter().copied());
    }
    for (a, name) in net.actions.iter().enumerate() {
        if !used_actions.contains(&a) {
            issues.push(PtaIssue {
                component: "network".into(),
                message: format!("action {name} belongs to no alphabet"),
            });
        }
    }
    for v in &net.vars {
        if v.min > v.max || v.init < v.min || v.init > v.max {
            issues.push(PtaIssue {
                component: "network".into(),
                message: format!("variable {} has an invalid range", v.name),
            });
        }
    }
    issues
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("ERR_PARTIAL_VALUATION: no value for parameter {0}")]
pub struct PartialValuation(pub ParamId);

/// A total assignment of values to parameters.
pub type Valuation = BTreeMap<ParamId, Rational>;

fn collapse(t: &LinearTerm, values: &[Rational]) -> LinearTerm {
    let mut c = t.constant;
    for (&p, &k) in &t.coeffs {
        c += values[p] * Rational::from_integer(k);
    }
    LinearTerm::constant(c)
}

/// Substitutes `v` into every term, yielding a parameter-free network with
/// otherwise identical structure.
pub fn valuate(net: &PtaNetwork, v: &Valuation) -> Result<PtaNetwork, PartialValuation> {
    let values = net
        .params
        .iter()
        .map(|p| v.get(&p.id).copied().ok_or_else(|| PartialValuation(p.id.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let sub = |g: &Guard| Guard {
        clocks: g
            .clocks
            .iter()
            .map(|a| AtomicConstraint {
                clock: a.clock,
                op: a.op,
                term: collapse(&a.term, &values),
            })
            .collect(),
        discrete: g.discrete.clone(),
    };
    let mut out = net.clone();
    out.params.clear();
    for p in &mut out.components {
        for l in &mut p.locations {
            l.invariant = sub(&l.invariant);
        }
        for e in &mut p.edges {
            e.guard = sub(&e.guard);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Textual dump
// ---------------------------------------------------------------------------

struct TermFmt<'a>(&'a LinearTerm, &'a [ParamDecl]);

impl fmt::Display for TermFmt<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (&p, &k) in &self.0.coeffs {
            if k == 0 {
                continue;
            }
            let name = self.1.get(p).map_or_else(|| format!("?{p}"), |d| d.id.to_string());
            let mag = k.unsigned_abs();
            let sign = match (first, k < 0) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            if mag == 1 {
                write!(f, "{sign}{name}")?;
            } else {
                write!(f, "{sign}{mag}*{name}")?;
            }
            first = false;
        }
        let c = self.0.constant;
        let zero = Rational::from_integer(0);
        if first {
            if c < zero {
                write!(f, "-{}", format_rational(&-c))
            } else {
                write!(f, "{}", format_rational(&c))
            }
        } else if c > zero {
            write!(f, " + {}", format_rational(&c))
        } else if c < zero {
            write!(f, " - {}", format_rational(&-c))
        } else {
            Ok(())
        }
    }
}

impl PtaNetwork {
    fn guard_text(&self, g: &Guard) -> String {
        let mut parts: Vec<String> = g
            .clocks
            .iter()
            .map(|a| {
                format!(
                    "{} {} {}",
                    self.clocks[a.clock],
                    a.op,
                    TermFmt(&a.term, &self.params)
                )
            })
            .collect();
        parts.extend(g.discrete.iter().map(|d| {
            let op = match d.op {
                PredOp::Eq => "==",
                PredOp::Ne => "!=",
            };
            format!("{} {op} {}", self.vars[d.var].name, d.value)
        }));
        parts.join(" && ")
    }
}

/// Stable line-oriented dump; see `docs/FORMAT.md`.
impl fmt::Display for PtaNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "network")?;
        writeln!(f, "  clocks: {}", self.clocks.join(", "))?;
        let params: Vec<String> = self.params.iter().map(|p| p.id.to_string()).collect();
        writeln!(f, "  params: {}", params.join(", "))?;
        for v in &self.vars {
            writeln!(f, "  var {} in [{}, {}] init {}", v.name, v.min, v.max, v.init)?;
        }
        for p in &self.components {
            writeln!(f)?;
            writeln!(f, "automaton {}", p.name)?;
            let clocks: Vec<&str> = p.clocks.iter().map(|&c| self.clocks[c].as_str()).collect();
            writeln!(f, "  clocks: {}", clocks.join(", "))?;
            let alphabet: Vec<&str> = p.alphabet.iter().map(|&a| self.actions[a].as_str()).collect();
            writeln!(f, "  alphabet: {}", alphabet.join(", "))?;
            writeln!(f, "  initial: {}", p.locations[p.initial].name)?;
            let finals: Vec<&str> = p.finals.iter().map(|&l| p.locations[l].name.as_str()).collect();
            writeln!(f, "  final: {}", finals.join(", "))?;
            for l in &p.locations {
                if l.invariant.is_true() {
                    writeln!(f, "  location {}", l.name)?;
                } else {
                    writeln!(f, "  location {} inv {}", l.name, self.guard_text(&l.invariant))?;
                }
            }
            for e in &p.edges {
                write!(
                    f,
                    "  edge {} -> {} on {}",
                    p.locations[e.source].name, p.locations[e.target].name, self.actions[e.action]
                )?;
                if !e.guard.is_true() {
                    write!(f, " when {}", self.guard_text(&e.guard))?;
                }
                if !e.resets.is_empty() {
                    let r: Vec<&str> = e.resets.iter().map(|&c| self.clocks[c].as_str()).collect();
                    write!(f, " reset {}", r.join(", "))?;
                }
                if !e.updates.is_empty() {
                    let u: Vec<String> = e
                        .updates
                        .iter()
                        .map(|u| format!("{} := {}", self.vars[u.var].name, u.value))
                        .collect();
                    write!(f, " do {}", u.join(", "))?;
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}
