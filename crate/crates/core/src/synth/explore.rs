use std::borrow::Cow;
use std::collections::{HashMap, VecDeque};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::paramset::ParameterSet;
use super::poly::{Entailer, Polyhedron, Row, RowKind};
use crate::model::CmpOp;
use crate::pta::*;
use crate::rational::Rational;
use crate::translate::SynthesisProblem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Order {
    #[default]
    Bfs,
    Dfs,
}

/// Deliberate defects, used to check that the validation harness notices
/// a broken engine.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    DropInvariantIntersection,
    DropGuardIntersection,
}

#[derive(Clone, Debug)]
pub struct SynthOptions {
    pub max_states: usize,
    pub max_depth: usize,
    /// Fail with `ERR_LIMIT` instead of returning a partial result.
    pub strict: bool,
    pub order: Order,
    /// Worker threads for successor computation in breadth-first mode.
    pub threads: usize,
    /// Check the segment occupancy invariant on every stored state.
    pub check_mutual_exclusion: bool,
    /// Replace two stored zones of one discrete state by their union when
    /// that union is convex.
    pub merge: bool,
    #[doc(hidden)]
    pub mutation: Mutation,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            max_states: 1_000_000,
            max_depth: 10_000,
            strict: false,
            order: Order::Bfs,
            threads: 1,
            check_mutual_exclusion: false,
            merge: true,
            mutation: Mutation::None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Complete,
    Bounded,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Complete => "complete",
            Status::Bounded => "bounded",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SynthStats {
    /// Symbolic states stored after inclusion pruning.
    pub states: usize,
    /// Successors discarded because an including state was already stored.
    pub pruned: usize,
    /// Stored states dropped because a later state includes them.
    pub subsumed: usize,
    /// Stored states replaced by a convex union with a later state.
    pub merged: usize,
    pub target_states: usize,
    pub max_depth: usize,
    pub violations: usize,
    pub first_violation: Option<String>,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct SynthOutcome {
    pub result: ParameterSet,
    pub status: Status,
    pub stats: SynthStats,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("ERR_LIMIT: exploration stopped after {states} states (depth {depth})")]
    Limit { states: usize, depth: usize },
    #[error(transparent)]
    PartialValuation(#[from] PartialValuation),
}

/// Clock constraint `x op term` as a row over clocks then parameters.
fn atom_row(a: &AtomicConstraint, n_clocks: usize, dim: usize) -> Row {
    let den = *a.term.constant.denom() as i128;
    let num = *a.term.constant.numer() as i128;
    let mut coeffs = vec![0i128; dim];
    coeffs[a.clock] = den;
    for (&p, &k) in &a.term.coeffs {
        coeffs[n_clocks + p] -= den * k as i128;
    }
    // x - term
    let (kind, negate) = match a.op {
        CmpOp::Lt => (RowKind::Gt, true),
        CmpOp::Le => (RowKind::Ge, true),
        CmpOp::Eq => (RowKind::Eq, false),
        CmpOp::Ge => (RowKind::Ge, false),
        CmpOp::Gt => (RowKind::Gt, false),
    };
    if negate {
        for c in &mut coeffs {
            *c = -*c;
        }
        Row::new(kind, coeffs, num)
    } else {
        Row::new(kind, coeffs, -num)
    }
}

fn bound_row(p: usize, value: Rational, upper: bool, n_clocks: usize, dim: usize) -> Row {
    let den = *value.denom() as i128;
    let num = *value.numer() as i128;
    let mut coeffs = vec![0i128; dim];
    if upper {
        coeffs[n_clocks + p] = -den;
        Row::new(RowKind::Ge, coeffs, num)
    } else {
        coeffs[n_clocks + p] = den;
        Row::new(RowKind::Ge, coeffs, -num)
    }
}

struct CompiledEdge {
    component: usize,
    edge: usize,
    guard: Vec<Row>,
}

/// Immutable lookup tables for exploring one network.
struct Compiled<'a> {
    problem: &'a SynthesisProblem,
    n_clocks: usize,
    dim: usize,
    /// `[component][location]` invariant rows.
    invariants: Vec<Vec<Vec<Row>>>,
    /// `[component][location]` outgoing edges by action.
    out: Vec<Vec<Vec<(ActionId, CompiledEdge)>>>,
    owners: Vec<Vec<usize>>,
    /// `[component][location]` clocks read before being reset.
    live: Vec<Vec<Vec<ClockId>>>,
    mutation: Mutation,
}

fn liveness(p: &Pta) -> Vec<Vec<ClockId>> {
    let reads = |g: &Guard| -> Vec<ClockId> { g.clocks.iter().map(|a| a.clock).collect() };
    let mut live: Vec<Vec<ClockId>> = p.locations.iter().map(|l| reads(&l.invariant)).collect();
    for l in &mut live {
        l.sort_unstable();
        l.dedup();
    }
    loop {
        let mut changed = false;
        for e in &p.edges {
            let mut add: Vec<ClockId> = reads(&e.guard);
            add.extend(live[e.target].iter().filter(|c| !e.resets.contains(c)));
            for c in add {
                if let Err(at) = live[e.source].binary_search(&c) {
                    live[e.source].insert(at, c);
                    changed = true;
                }
            }
        }
        if !changed {
            return live;
        }
    }
}

impl<'a> Compiled<'a> {
    fn new(problem: &'a SynthesisProblem, mutation: Mutation) -> Self {
        let net = &problem.network;
        let n_clocks = net.clocks.len();
        let dim = n_clocks + net.params.len();
        let rows = |g: &Guard| -> Vec<Row> { g.clocks.iter().map(|a| atom_row(a, n_clocks, dim)).collect() };
        let mut invariants = Vec::new();
        let mut out = Vec::new();
        let mut live = Vec::new();
        for (ci, p) in net.components.iter().enumerate() {
            invariants.push(p.locations.iter().map(|l| rows(&l.invariant)).collect());
            let mut by_loc: Vec<Vec<(ActionId, CompiledEdge)>> = p.locations.iter().map(|_| vec![]).collect();
            for (ei, e) in p.edges.iter().enumerate() {
                by_loc[e.source].push((
                    e.action,
                    CompiledEdge {
                        component: ci,
                        edge: ei,
                        guard: rows(&e.guard),
                    },
                ));
            }
            out.push(by_loc);
            live.push(liveness(p));
        }
        let owners = (0..net.actions.len()).map(|a| net.owners(a)).collect();
        Compiled {
            problem,
            n_clocks,
            dim,
            invariants,
            out,
            owners,
            live,
            mutation,
        }
    }

    fn live_clocks(&self, locs: &[LocId]) -> Vec<ClockId> {
        let mut v: Vec<ClockId> = locs
            .iter()
            .enumerate()
            .flat_map(|(c, &l)| self.live[c][l].iter().copied())
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    fn with_invariants(&self, z: &Polyhedron, locs: &[LocId]) -> Polyhedron {
        if self.mutation == Mutation::DropInvariantIntersection {
            return z.clone();
        }
        let rows = locs
            .iter()
            .enumerate()
            .flat_map(|(c, &l)| self.invariants[c][l].iter().cloned());
        z.intersect(&Polyhedron::from_rows(self.dim, rows))
    }

    /// Lets time pass in a zone that already satisfies the invariants.
    fn settle(&self, z: &Polyhedron, locs: &[LocId], live: &[ClockId]) -> Polyhedron {
        let e = z.elapse(live);
        self.with_invariants(&e, locs)
    }

    fn initial(&self) -> Option<State> {
        let net = &self.problem.network;
        let locs: Vec<LocId> = net.components.iter().map(|p| p.initial).collect();
        let live = self.live_clocks(&locs);
        let mut rows: Vec<Row> = live
            .iter()
            .map(|&c| Row::from_terms(self.dim, &[(c, 1)], 0, RowKind::Eq))
            .collect();
        for (i, p) in net.params.iter().enumerate() {
            if let Some(l) = p.lower {
                rows.push(bound_row(i, l, false, self.n_clocks, self.dim));
            }
            if let Some(u) = p.upper {
                rows.push(bound_row(i, u, true, self.n_clocks, self.dim));
            }
        }
        let z = self.with_invariants(&Polyhedron::from_rows(self.dim, rows), &locs);
        if z.is_empty() {
            return None;
        }
        let zone = self.settle(&z, &locs, &live);
        Some(State {
            locs,
            discretes: net.initial_discretes(),
            zone,
            depth: 0,
            id: 0,
        })
    }

    fn successors(&self, s: &State) -> Vec<State> {
        let net = &self.problem.network;
        let mut result = Vec::new();
        for (ci, &loc) in s.locs.iter().enumerate() {
            for (action, first) in &self.out[ci][loc] {
                let owners = &self.owners[*action];
                if owners[0] != ci {
                    continue;
                }
                // one edge per owner, cartesian product
                let mut combos: Vec<Vec<&CompiledEdge>> = vec![vec![first]];
                for &o in &owners[1..] {
                    let edges: Vec<&CompiledEdge> = self.out[o][s.locs[o]]
                        .iter()
                        .filter(|(a, _)| a == action)
                        .map(|(_, e)| e)
                        .collect();
                    if edges.is_empty() {
                        combos.clear();
                        break;
                    }
                    combos = combos
                        .into_iter()
                        .flat_map(|c| {
                            edges.iter().map(move |e| {
                                let mut c = c.clone();
                                c.push(e);
                                c
                            })
                        })
                        .collect();
                }
                for combo in combos {
                    if let Some(next) = self.fire(s, &combo, net) {
                        result.push(next);
                    }
                }
            }
        }
        result
    }

    fn fire(&self, s: &State, combo: &[&CompiledEdge], net: &PtaNetwork) -> Option<State> {
        let edges: Vec<&Edge> = combo
            .iter()
            .map(|c| &net.components[c.component].edges[c.edge])
            .collect();
        if !edges
            .iter()
            .all(|e| e.guard.discrete.iter().all(|d| d.holds(&s.discretes)))
        {
            return None;
        }
        let mut z = s.zone.clone();
        if self.mutation != Mutation::DropGuardIntersection {
            let guard = combo.iter().flat_map(|c| c.guard.iter().cloned());
            z = z.intersect(&Polyhedron::from_rows(self.dim, guard));
            if z.is_empty() {
                return None;
            }
        }
        let mut locs = s.locs.clone();
        let mut discretes = s.discretes.clone();
        let mut resets: Vec<ClockId> = Vec::new();
        for (c, e) in combo.iter().zip(&edges) {
            locs[c.component] = e.target;
            resets.extend(e.resets.iter().copied());
            for u in &e.updates {
                discretes[u.var] = u.value;
            }
        }
        resets.sort_unstable();
        resets.dedup();
        let live = self.live_clocks(&locs);
        // forget dead clocks and the old values of reset clocks
        let forget: Vec<ClockId> = (0..self.n_clocks)
            .filter(|c| resets.binary_search(c).is_ok() || live.binary_search(c).is_err())
            .collect();
        let mut z = z.eliminate(&forget);
        for &r in &resets {
            if live.binary_search(&r).is_ok() {
                z.add_row(Row::from_terms(self.dim, &[(r, 1)], 0, RowKind::Eq));
            }
        }
        let z = self.with_invariants(&z, &locs);
        if z.is_empty() {
            return None;
        }
        let zone = self.settle(&z, &locs, &live);
        Some(State {
            locs,
            discretes,
            zone,
            depth: s.depth + 1,
            id: 0,
        })
    }

    fn project(&self, z: &Polyhedron) -> Polyhedron {
        let clocks: Vec<usize> = (0..self.n_clocks).collect();
        z.eliminate(&clocks).tail(self.dim - self.n_clocks)
    }
}

#[derive(Clone, Debug)]
struct State {
    locs: Vec<LocId>,
    discretes: Vec<i64>,
    zone: Polyhedron,
    depth: usize,
    /// Index into `Explorer::phase`, set on insertion.
    id: usize,
}

type Key = (Vec<LocId>, Vec<i64>);

/// Most inequalities of one zone that may fail on the other for a merge
/// attempt; beyond this the exact test is skipped.
const MERGE_LIMIT: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Pending,
    Expanded,
    /// Dropped before expansion; a later pending state includes it.
    Covered,
}

struct Stored {
    id: usize,
    probe: Entailer<'static>,
}

struct Explorer<'a> {
    c: Compiled<'a>,
    opts: &'a SynthOptions,
    visited: HashMap<Key, Vec<Stored>>,
    phase: Vec<Phase>,
    result: ParameterSet,
    stats: SynthStats,
    bounded: bool,
}

impl Explorer<'_> {
    /// Stores `s` unless an including zone is known, dropping the stored
    /// zones it includes or merges with; returns whether the state is new.
    fn insert(&mut self, s: &mut State) -> bool {
        let key = (s.locs.clone(), s.discretes.clone());
        let zones = self.visited.entry(key).or_default();
        let mut probe = Entailer::new(Cow::Owned(s.zone.clone()));
        if zones.iter().any(|z| z.probe.poly().includes_via(&probe)) {
            self.stats.pruned += 1;
            return false;
        }
        let mut dropped = Vec::new();
        zones.retain(|z| {
            let gone = probe.poly().includes_via(&z.probe);
            if gone {
                dropped.push(z.id);
            }
            !gone
        });
        self.stats.subsumed += dropped.len();
        while self.opts.merge {
            let found = zones
                .iter()
                .enumerate()
                .find_map(|(i, z)| Polyhedron::convex_union(&probe, &z.probe, MERGE_LIMIT).map(|u| (i, u)));
            let Some((i, union)) = found else {
                break;
            };
            dropped.push(zones.remove(i).id);
            self.stats.merged += 1;
            probe = Entailer::new(Cow::Owned(union));
            let before = dropped.len();
            zones.retain(|z| {
                let gone = probe.poly().includes_via(&z.probe);
                if gone {
                    dropped.push(z.id);
                }
                !gone
            });
            self.stats.subsumed += dropped.len() - before;
        }
        // Expanded zones folded into the stored union need no second
        // expansion; only pending ones must be covered by what `s` explores.
        let mut cover = false;
        for id in dropped {
            if self.phase[id] == Phase::Pending {
                self.phase[id] = Phase::Covered;
                cover = true;
            }
        }
        if cover {
            s.zone = probe.poly().clone();
        }
        let target = self.c.problem.is_target(&s.locs).then(|| self.c.project(probe.poly()));
        s.id = self.phase.len();
        self.phase.push(Phase::Pending);
        zones.push(Stored { id: s.id, probe });
        self.stats.states += 1;
        self.stats.max_depth = self.stats.max_depth.max(s.depth);
        if self.opts.check_mutual_exclusion {
            if let Err(msg) = self.c.problem.check_mutual_exclusion(&s.locs, &s.discretes) {
                self.stats.violations += 1;
                self.stats.first_violation.get_or_insert(msg);
            }
        }
        if let Some(p) = target {
            self.stats.target_states += 1;
            self.result.add(&p);
        }
        true
    }

    fn full(&self) -> bool {
        self.stats.states >= self.opts.max_states
    }

    fn expandable(&mut self, s: &State) -> bool {
        if s.depth >= self.opts.max_depth {
            self.bounded = true;
            return false;
        }
        true
    }

    fn run_dfs(&mut self, init: State) {
        let mut stack = vec![init];
        while let Some(s) = stack.pop() {
            if self.phase[s.id] != Phase::Pending || !self.expandable(&s) {
                continue;
            }
            self.phase[s.id] = Phase::Expanded;
            let succs = self.c.successors(&s);
            // reversed so that the first successor is explored first
            for mut n in succs.into_iter().rev() {
                if self.full() {
                    self.bounded = true;
                    return;
                }
                if self.insert(&mut n) {
                    stack.push(n);
                }
            }
        }
    }

    fn run_bfs(&mut self, init: State, pool: Option<&rayon::ThreadPool>) {
        let mut level: VecDeque<State> = VecDeque::from([init]);
        while !level.is_empty() {
            let frontier: Vec<State> = level
                .drain(..)
                .filter(|s| self.phase[s.id] == Phase::Pending && self.expandable(s))
                .collect();
            for s in &frontier {
                self.phase[s.id] = Phase::Expanded;
            }
            let succs: Vec<Vec<State>> = match pool {
                Some(pool) => {
                    let c = &self.c;
                    pool.install(|| frontier.par_iter().map(|s| c.successors(s)).collect())
                }
                None => frontier.iter().map(|s| self.c.successors(s)).collect(),
            };
            for mut n in succs.into_iter().flatten() {
                if self.full() {
                    self.bounded = true;
                    return;
                }
                if self.insert(&mut n) {
                    level.push_back(n);
                }
            }
        }
    }
}

/// Reachability synthesis: the parameter valuations for which some run
/// reaches a state where every component is in a final location.
pub fn ef_synth(problem: &SynthesisProblem, opts: &SynthOptions) -> Result<SynthOutcome, SynthError> {
    let start = Instant::now();
    let params = problem.network.params.iter().map(|p| p.id.clone()).collect();
    let mut ex = Explorer {
        c: Compiled::new(problem, opts.mutation),
        opts,
        visited: HashMap::new(),
        phase: Vec::new(),
        result: ParameterSet::empty(params),
        stats: SynthStats::default(),
        bounded: false,
    };
    if let Some(mut init) = ex.c.initial() {
        if ex.insert(&mut init) {
            match opts.order {
                Order::Dfs => ex.run_dfs(init),
                Order::Bfs if opts.threads > 1 => {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(opts.threads)
                        .build()
                        .ok();
                    ex.run_bfs(init, pool.as_ref());
                }
                Order::Bfs => ex.run_bfs(init, None),
            }
        }
    }
    ex.stats.elapsed = start.elapsed();
    if ex.bounded && opts.strict {
        return Err(SynthError::Limit {
            states: ex.stats.states,
            depth: ex.stats.max_depth,
        });
    }
    Ok(SynthOutcome {
        result: ex.result,
        status: if ex.bounded {
            Status::Bounded
        } else {
            Status::Complete
        },
        stats: ex.stats,
    })
}

/// Whether the target is reachable for the concrete valuation `v`.
/// Valuations outside the declared parameter boxes are rejected.
pub fn check_concrete(
    problem: &SynthesisProblem,
    v: &Valuation,
    opts: &SynthOptions,
) -> Result<bool, SynthError> {
    let net = valuate(&problem.network, v)?;
    let zero = Rational::from_integer(0);
    for p in &problem.network.params {
        let x = v[&p.id];
        if x < zero || p.lower.is_some_and(|l| x < l) || p.upper.is_some_and(|u| x > u) {
            return Ok(false);
        }
    }
    let concrete = SynthesisProblem {
        network: net,
        ..problem.clone()
    };
    Ok(!ef_synth(&concrete, opts)?.result.is_empty())
}
