//! Compilation of a constrained railway system into a network of PTAs.
//!
//! Every train becomes one automaton with a single clock. Segment occupancy
//! is tracked by one global boolean per segment (`1` = free), and progress
//! along the connection by one bounded counter per train. Schedule
//! constraints become monitor automata synchronizing on visit actions;
//! monitors that share an action are merged into their product.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::model::*;
use crate::pta::*;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TranslateError {
    #[error("ERR_UNREACHABLE_CONNECTION: train {train} cannot reach {to} after {from}")]
    UnreachableConnection {
        train: TrainId,
        from: NodeId,
        to: NodeId,
    },
    #[error(transparent)]
    TwoParams(#[from] ResolveError),
    #[error("invalid system: {0}")]
    Invalid(String),
}

/// Injective map from visit events to action labels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ActionCatalog {
    map: BTreeMap<VisitEvent, ActionId>,
}

impl ActionCatalog {
    /// One arrival and one departure action for every (train, node).
    pub fn build(sys: &ConstrainedRailwaySystem, net: &mut PtaNetwork) -> Self {
        let mut map = BTreeMap::new();
        for t in &sys.trains {
            for n in &sys.graph.nodes {
                for kind in [VisitKind::Arrival, VisitKind::Departure] {
                    let ev = VisitEvent {
                        train: t.id.clone(),
                        node: n.id.clone(),
                        kind,
                    };
                    let id = net.add_action(ev.to_string());
                    map.insert(ev, id);
                }
            }
        }
        ActionCatalog { map }
    }

    pub fn get(&self, ev: &VisitEvent) -> Option<ActionId> {
        self.map.get(ev).copied()
    }

    fn action(&self, train: &TrainId, node: &NodeId, kind: VisitKind) -> ActionId {
        self.map[&VisitEvent {
            train: train.clone(),
            node: node.clone(),
            kind,
        }]
    }

    pub fn of_train<'a>(&'a self, train: &'a TrainId) -> impl Iterator<Item = ActionId> + 'a {
        self.map
            .iter()
            .filter(move |(e, _)| &e.train == train)
            .map(|(_, &a)| a)
    }
}

/// Which segments a train automaton holds in each of its locations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Occupancy {
    pub component: usize,
    /// Indexed by location; occupancy variables of the held segments.
    pub held: Vec<Vec<VarId>>,
}

#[derive(Clone, Debug)]
pub struct SynthesisProblem {
    pub network: PtaNetwork,
    pub catalog: ActionCatalog,
    /// Occupancy variable of every segment, in graph order.
    pub seg_free: Vec<(SegmentId, VarId)>,
    pub occupancy: Vec<Occupancy>,
}

impl SynthesisProblem {
    /// Target predicate: every component in one of its final locations.
    pub fn is_target(&self, locs: &[LocId]) -> bool {
        self.network
            .components
            .iter()
            .zip(locs)
            .all(|(p, &l)| p.is_final(l))
    }

    /// Checks that each segment is held by at most one train, and that its
    /// boolean is false exactly when it is held.
    pub fn check_mutual_exclusion(&self, locs: &[LocId], discretes: &[i64]) -> Result<(), String> {
        for (seg, var) in &self.seg_free {
            let holders = self
                .occupancy
                .iter()
                .filter(|o| o.held[locs[o.component]].contains(var))
                .count();
            if holders > 1 {
                return Err(format!("segment {seg} held by {holders} trains"));
            }
            if (discretes[*var] == 0) != (holders == 1) {
                return Err(format!(
                    "segment {seg}: free flag {} with {holders} holder(s)",
                    discretes[*var]
                ));
            }
        }
        Ok(())
    }
}

fn term_of(d: &DurationSpec, sys: &ConstrainedRailwaySystem) -> LinearTerm {
    match d {
        DurationSpec::Constant(c) => LinearTerm::constant(*c),
        DurationSpec::Parameter(p) => {
            LinearTerm::param(sys.param_index(p).expect("validated parameter"))
        }
    }
}

fn atom(clock: ClockId, op: CmpOp, term: LinearTerm) -> AtomicConstraint {
    AtomicConstraint { clock, op, term }
}

/// A location variant for a duration: its invariant and exit condition.
struct Case {
    suffix: &'static str,
    invariant: Vec<AtomicConstraint>,
    exit: Vec<AtomicConstraint>,
}

/// Exactly-`d` cases; `max(p, c)` splits into `p >= c` and `p <= c`.
fn exact_cases(d: &EffectiveDuration, x: ClockId, pidx: &dyn Fn(&ParamId) -> ParamIdx) -> Vec<Case> {
    let exact = |t: LinearTerm| Case {
        suffix: "",
        invariant: vec![atom(x, CmpOp::Le, t.clone())],
        exit: vec![atom(x, CmpOp::Eq, t)],
    };
    match d {
        EffectiveDuration::Constant(c) => vec![exact(LinearTerm::constant(*c))],
        EffectiveDuration::Param(p) => vec![exact(LinearTerm::param(pidx(p)))],
        EffectiveDuration::ParamVsConst(p, c) => {
            let tp = LinearTerm::param(pidx(p));
            let tc = LinearTerm::constant(*c);
            vec![
                Case {
                    suffix: "_p",
                    invariant: vec![atom(x, CmpOp::Le, tp.clone())],
                    exit: vec![atom(x, CmpOp::Eq, tp.clone()), atom(x, CmpOp::Ge, tc.clone())],
                },
                Case {
                    suffix: "_c",
                    invariant: vec![atom(x, CmpOp::Le, tc.clone())],
                    exit: vec![atom(x, CmpOp::Eq, tc), atom(x, CmpOp::Ge, tp)],
                },
            ]
        }
    }
}

/// At least `d`, no invariant: dwelling at a station of the connection.
fn dwell_case(d: &EffectiveDuration, x: ClockId, pidx: &dyn Fn(&ParamId) -> ParamIdx) -> Vec<Case> {
    let exit = match d {
        EffectiveDuration::Constant(c) => vec![atom(x, CmpOp::Ge, LinearTerm::constant(*c))],
        EffectiveDuration::Param(p) => vec![atom(x, CmpOp::Ge, LinearTerm::param(pidx(p)))],
        EffectiveDuration::ParamVsConst(p, c) => vec![
            atom(x, CmpOp::Ge, LinearTerm::param(pidx(p))),
            atom(x, CmpOp::Ge, LinearTerm::constant(*c)),
        ],
    };
    vec![Case {
        suffix: "",
        invariant: vec![],
        exit,
    }]
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    /// On a segment, heading to a node.
    Seg(SegmentId, NodeId),
    /// Inside a node, from one segment to the next.
    Node(SegmentId, NodeId, SegmentId),
}

/// Moves out of each node, grouped by incoming segment and node.
fn moves_by_entry(graph: &RailNetworkGraph) -> BTreeMap<(SegmentId, NodeId), Vec<SegmentId>> {
    let mut out: BTreeMap<(SegmentId, NodeId), Vec<SegmentId>> = BTreeMap::new();
    for (a, n, b) in traversable_pairs(graph) {
        out.entry((a, n)).or_default().push(b);
    }
    out
}

fn other_end(graph: &RailNetworkGraph, s: &SegmentId, n: &NodeId) -> NodeId {
    graph
        .segment(s)
        .and_then(|seg| seg.other_end(n))
        .expect("segment incident to node")
        .clone()
}

/// Static check that each connection node can be reached after the previous
/// one, following the (segment, heading) graph.
fn check_connection_reachable(train: &Train, graph: &RailNetworkGraph) -> Result<(), TranslateError> {
    let moves = moves_by_entry(graph);
    let start = &train.connection[0];
    let mut frontier: BTreeSet<(SegmentId, NodeId)> = graph
        .segments
        .iter()
        .filter(|s| s.touches(start))
        .map(|s| (s.id.clone(), other_end(graph, &s.id, start)))
        .collect();
    let mut prev = start;
    let steps = train.connection.iter().skip(1);
    for target in steps {
        let mut seen = frontier.clone();
        let mut queue: VecDeque<_> = frontier.iter().cloned().collect();
        while let Some((s, h)) = queue.pop_front() {
            for s2 in moves.get(&(s, h.clone())).into_iter().flatten() {
                let next = (s2.clone(), other_end(graph, s2, &h));
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        let arrivals: Vec<_> = seen.iter().filter(|(_, h)| h == target).cloned().collect();
        if arrivals.is_empty() {
            return Err(TranslateError::UnreachableConnection {
                train: train.id.clone(),
                from: prev.clone(),
                to: target.clone(),
            });
        }
        frontier = arrivals
            .into_iter()
            .flat_map(|(s, h)| {
                moves
                    .get(&(s, h.clone()))
                    .into_iter()
                    .flatten()
                    .map(move |s2| (s2.clone(), h.clone()))
                    .collect::<Vec<_>>()
            })
            .map(|(s2, h)| {
                let o = other_end(graph, &s2, &h);
                (s2, o)
            })
            .collect();
        prev = target;
    }
    Ok(())
}

/// Translates one train. `seg_free` maps segments to their occupancy
/// variables; `counter` is the train's connection counter.
pub fn translate_train(
    train: &Train,
    sys: &ConstrainedRailwaySystem,
    catalog: &ActionCatalog,
    x: ClockId,
    counter: VarId,
    seg_free: &BTreeMap<SegmentId, VarId>,
) -> Result<(Pta, Vec<Vec<VarId>>), TranslateError> {
    let graph = &sys.graph;
    check_connection_reachable(train, graph)?;
    let eff = resolve_effective_durations(train, graph)?;
    let pidx = |p: &ParamId| sys.param_index(p).expect("validated parameter");
    let moves = moves_by_entry(graph);
    let conn = &train.connection;
    let n = conn.len() as i64;
    let last_is_boundary = conn.len() >= 2 && graph.is_boundary(&conn[conn.len() - 1]);
    let dwell_stations: BTreeSet<&NodeId> = conn.iter().filter(|c| graph.is_station(c)).collect();

    let mut pta = Pta::new(format!("train_{}", train.id));
    pta.clocks.push(x);
    pta.alphabet.extend(catalog.of_train(&train.id));
    let mut held: Vec<Vec<VarId>> = Vec::new();

    let start = &conn[0];
    pta.initial = pta.add_location(format!("start_{start}"), Guard::default());
    held.push(vec![]);

    let mut copies: BTreeMap<Key, Vec<(LocId, Vec<AtomicConstraint>)>> = BTreeMap::new();
    let mut finals: BTreeMap<NodeId, LocId> = BTreeMap::new();
    let mut queue: VecDeque<Key> = VecDeque::new();

    let get = |key: Key,
                   copies: &mut BTreeMap<Key, Vec<(LocId, Vec<AtomicConstraint>)>>,
                   pta: &mut Pta,
                   held: &mut Vec<Vec<VarId>>,
                   queue: &mut VecDeque<Key>|
     -> Vec<(LocId, Vec<AtomicConstraint>)> {
        if let Some(c) = copies.get(&key) {
            return c.clone();
        }
        let (base, cases, hold) = match &key {
            Key::Seg(s, h) => (
                format!("seg_{s}_to_{h}"),
                exact_cases(&eff.segments[s], x, &pidx),
                vec![seg_free[s]],
            ),
            Key::Node(a, v, b) => {
                let d = &eff.pairs[&(a.clone(), b.clone())];
                let cases = if dwell_stations.contains(v) {
                    dwell_case(d, x, &pidx)
                } else {
                    exact_cases(d, x, &pidx)
                };
                (format!("node_{a}_{v}_{b}"), cases, vec![seg_free[a], seg_free[b]])
            }
        };
        let locs: Vec<_> = cases
            .into_iter()
            .map(|c| {
                let inv = Guard {
                    clocks: c.invariant,
                    discrete: vec![],
                };
                let l = pta.add_location(format!("{base}{}", c.suffix), inv);
                held.push(hold.clone());
                (l, c.exit)
            })
            .collect();
        copies.insert(key.clone(), locs.clone());
        queue.push_back(key);
        locs
    };

    for s in graph.segments.iter().filter(|s| s.touches(start)) {
        let head = other_end(graph, &s.id, start);
        let free = seg_free[&s.id];
        for (loc, _) in get(Key::Seg(s.id.clone(), head), &mut copies, &mut pta, &mut held, &mut queue) {
            pta.add_edge(Edge {
                source: pta.initial,
                guard: Guard {
                    clocks: vec![],
                    discrete: vec![DiscretePred::eq(free, 1)],
                },
                action: catalog.action(&train.id, start, VisitKind::Departure),
                resets: vec![x],
                updates: vec![
                    Assignment { var: free, value: 0 },
                    Assignment { var: counter, value: 1 },
                ],
                target: loc,
            });
        }
    }

    while let Some(key) = queue.pop_front() {
        let sources = copies[&key].clone();
        match &key {
            Key::Seg(s, h) if graph.is_boundary(h) => {
                let need = if last_is_boundary {
                    if h != &conn[conn.len() - 1] {
                        continue;
                    }
                    n - 1
                } else {
                    n
                };
                let fin = *finals.entry(h.clone()).or_insert_with(|| {
                    held.push(vec![]);
                    pta.add_location(format!("end_{h}"), Guard::default())
                });
                for (src, exit) in sources {
                    pta.add_edge(Edge {
                        source: src,
                        guard: Guard {
                            clocks: exit,
                            discrete: vec![DiscretePred::eq(counter, need)],
                        },
                        action: catalog.action(&train.id, h, VisitKind::Arrival),
                        resets: vec![],
                        updates: vec![
                            Assignment {
                                var: seg_free[s],
                                value: 1,
                            },
                            Assignment {
                                var: counter,
                                value: n,
                            },
                        ],
                        target: fin,
                    });
                }
            }
            Key::Seg(s, h) => {
                let positions: Vec<i64> = (1..conn.len())
                    .filter(|&i| &conn[i] == h)
                    .map(|i| i as i64)
                    .collect();
                let mut variants: Vec<(Vec<DiscretePred>, Vec<Assignment>)> = positions
                    .iter()
                    .map(|&i| {
                        (
                            vec![DiscretePred::eq(counter, i)],
                            vec![Assignment {
                                var: counter,
                                value: i + 1,
                            }],
                        )
                    })
                    .collect();
                variants.push((
                    positions.iter().map(|&i| DiscretePred::ne(counter, i)).collect(),
                    vec![],
                ));
                for s2 in moves.get(&(s.clone(), h.clone())).into_iter().flatten() {
                    let free2 = seg_free[s2];
                    let targets = get(
                        Key::Node(s.clone(), h.clone(), s2.clone()),
                        &mut copies,
                        &mut pta,
                        &mut held,
                        &mut queue,
                    );
                    for (src, exit) in &sources {
                        for (tgt, _) in &targets {
                            for (preds, ups) in &variants {
                                let mut discrete = vec![DiscretePred::eq(free2, 1)];
                                discrete.extend(preds.iter().copied());
                                let mut updates = vec![Assignment { var: free2, value: 0 }];
                                updates.extend(ups.iter().copied());
                                pta.add_edge(Edge {
                                    source: *src,
                                    guard: Guard {
                                        clocks: exit.clone(),
                                        discrete,
                                    },
                                    action: catalog.action(&train.id, h, VisitKind::Arrival),
                                    resets: vec![x],
                                    updates,
                                    target: *tgt,
                                });
                            }
                        }
                    }
                }
            }
            Key::Node(a, v, b) => {
                let head = other_end(graph, b, v);
                let targets = get(Key::Seg(b.clone(), head), &mut copies, &mut pta, &mut held, &mut queue);
                for (src, exit) in &sources {
                    for (tgt, _) in &targets {
                        pta.add_edge(Edge {
                            source: *src,
                            guard: Guard {
                                clocks: exit.clone(),
                                discrete: vec![],
                            },
                            action: catalog.action(&train.id, v, VisitKind::Departure),
                            resets: vec![x],
                            updates: vec![Assignment {
                                var: seg_free[a],
                                value: 1,
                            }],
                            target: *tgt,
                        });
                    }
                }
            }
        }
    }
    pta.finals = finals.into_values().collect();
    pta.finals.sort_unstable();
    Ok((pta, held))
}

struct Monitor<'a> {
    name: String,
    catalog: &'a ActionCatalog,
    pta: Pta,
}

impl<'a> Monitor<'a> {
    fn new(name: String, catalog: &'a ActionCatalog, n_locs: usize) -> Self {
        let mut pta = Pta::new(name.clone());
        for i in 1..=n_locs {
            pta.add_location(format!("l{i}"), Guard::default());
        }
        pta.finals.push(n_locs - 1);
        Monitor { name, catalog, pta }
    }

    fn edge(&mut self, from: LocId, ev: &VisitEvent, clocks: Vec<AtomicConstraint>, resets: Vec<ClockId>, to: LocId) {
        let action = self.catalog.get(ev).expect("catalogued event");
        self.pta.add_edge(Edge {
            source: from,
            guard: Guard {
                clocks,
                discrete: vec![],
            },
            action,
            resets,
            updates: vec![],
            target: to,
        });
    }

    fn finish(mut self, clocks: Vec<ClockId>) -> Pta {
        self.pta.clocks = clocks;
        self.pta.name = self.name;
        self.pta
    }
}

/// Translates one schedule constraint into a monitor. `x_abs` is the shared
/// absolute clock; `fresh_clock` allocates a local clock on demand.
pub fn translate_constraint(
    index: usize,
    c: &ScheduleConstraint,
    sys: &ConstrainedRailwaySystem,
    catalog: &ActionCatalog,
    x_abs: Option<ClockId>,
    fresh_clock: &mut dyn FnMut(String) -> ClockId,
) -> Pta {
    let zero = || LinearTerm::constant(Rational::from_integer(0));
    match c {
        ScheduleConstraint::Absolute { event, op, bound } => {
            let xa = x_abs.expect("absolute clock allocated");
            let mut m = Monitor::new(format!("c{index}_abs"), catalog, 2);
            m.edge(0, event, vec![atom(xa, *op, term_of(bound, sys))], vec![], 1);
            m.edge(1, event, vec![], vec![], 1);
            m.finish(vec![xa])
        }
        ScheduleConstraint::Relative {
            from,
            to,
            op,
            bound,
        } => {
            let x = fresh_clock(format!("x_c{index}"));
            let mut m = Monitor::new(format!("c{index}_rel"), catalog, 3);
            m.edge(0, from, vec![], vec![x], 1);
            m.edge(1, to, vec![atom(x, *op, term_of(bound, sys))], vec![], 2);
            m.edge(2, from, vec![], vec![], 2);
            if to != from {
                m.edge(2, to, vec![], vec![], 2);
            }
            m.finish(vec![x])
        }
        ScheduleConstraint::Ordering { first, second, op } => {
            let (a1, a2, op) = match op {
                CmpOp::Ge | CmpOp::Gt => (second, first, op.flipped()),
                _ => (first, second, *op),
            };
            let mut m = Monitor::new(format!("c{index}_order"), catalog, 3);
            let clocks = match op {
                CmpOp::Le => {
                    m.edge(0, a1, vec![], vec![], 1);
                    m.edge(1, a2, vec![], vec![], 2);
                    vec![]
                }
                _ => {
                    let x = fresh_clock(format!("x_c{index}"));
                    let gate = if op == CmpOp::Lt { CmpOp::Gt } else { CmpOp::Eq };
                    m.edge(0, a1, vec![], vec![x], 1);
                    m.edge(1, a2, vec![atom(x, gate, zero())], vec![], 2);
                    vec![x]
                }
            };
            m.edge(2, a1, vec![], vec![], 2);
            if a2 != a1 {
                m.edge(2, a2, vec![], vec![], 2);
            }
            m.finish(clocks)
        }
    }
}

/// Synchronized product of monitors (no discrete variables, no invariants).
fn product(parts: Vec<Pta>) -> Pta {
    if parts.len() == 1 {
        return parts.into_iter().next().expect("one part");
    }
    let name = parts.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join("+");
    let mut out = Pta::new(name);
    for p in &parts {
        out.alphabet.extend(p.alphabet.iter().copied());
        for &c in &p.clocks {
            if !out.clocks.contains(&c) {
                out.clocks.push(c);
            }
        }
    }
    let loc_name = |s: &[LocId]| {
        s.iter()
            .zip(&parts)
            .map(|(&l, p)| p.locations[l].name.as_str())
            .collect::<Vec<_>>()
            .join(".")
    };
    let init: Vec<LocId> = parts.iter().map(|p| p.initial).collect();
    let mut index: BTreeMap<Vec<LocId>, LocId> = BTreeMap::new();
    index.insert(init.clone(), out.add_location(loc_name(&init), Guard::default()));
    let mut queue = VecDeque::from([init]);
    let alphabet: Vec<ActionId> = out.alphabet.iter().copied().collect();
    while let Some(state) = queue.pop_front() {
        let src = index[&state];
        for &a in &alphabet {
            // every part owning `a` takes one of its `a`-edges
            let mut combos: Vec<(Vec<LocId>, Guard, Vec<ClockId>)> =
                vec![(state.clone(), Guard::default(), vec![])];
            for (i, p) in parts.iter().enumerate() {
                if !p.alphabet.contains(&a) {
                    continue;
                }
                let edges: Vec<&Edge> = p
                    .edges
                    .iter()
                    .filter(|e| e.source == state[i] && e.action == a)
                    .collect();
                let mut next = Vec::new();
                for (s, g, r) in &combos {
                    for e in &edges {
                        let mut s = s.clone();
                        s[i] = e.target;
                        let mut g = g.clone();
                        g.clocks.extend(e.guard.clocks.iter().cloned());
                        let mut r = r.clone();
                        r.extend(e.resets.iter().copied());
                        next.push((s, g, r));
                    }
                }
                combos = next;
            }
            for (s, guard, resets) in combos {
                let tgt = match index.get(&s) {
                    Some(&l) => l,
                    None => {
                        let l = out.add_location(loc_name(&s), Guard::default());
                        index.insert(s.clone(), l);
                        queue.push_back(s.clone());
                        l
                    }
                };
                out.add_edge(Edge {
                    source: src,
                    guard,
                    action: a,
                    resets,
                    updates: vec![],
                    target: tgt,
                });
            }
        }
    }
    for (s, &l) in &index {
        if s.iter().zip(&parts).all(|(&q, p)| p.is_final(q)) {
            out.finals.push(l);
        }
    }
    out.finals.sort_unstable();
    out
}

/// Groups monitors into classes connected by shared actions, keeping the
/// order of first appearance.
fn merge_monitors(monitors: Vec<Pta>) -> Vec<Pta> {
    let n = monitors.len();
    let mut class: Vec<usize> = (0..n).collect();
    fn find(class: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while class[r] != r {
            r = class[r];
        }
        class[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if !monitors[i].alphabet.is_disjoint(&monitors[j].alphabet) {
                let (a, b) = (find(&mut class, i), find(&mut class, j));
                class[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<Pta>> = BTreeMap::new();
    for (i, m) in monitors.into_iter().enumerate() {
        let r = find(&mut class, i);
        groups.entry(r).or_default().push(m);
    }
    groups.into_values().map(product).collect()
}

/// Translates a whole system: one automaton per train, then the monitors.
pub fn translate_system(sys: &ConstrainedRailwaySystem) -> Result<SynthesisProblem, TranslateError> {
    let report = validate_system(sys);
    if let Some(first) = report.issues.first() {
        return Err(TranslateError::Invalid(first.to_string()));
    }
    let mut net = PtaNetwork {
        params: sys.params.clone(),
        ..Default::default()
    };
    let catalog = ActionCatalog::build(sys, &mut net);
    let mut seg_free = BTreeMap::new();
    let mut seg_order = Vec::new();
    for s in &sys.graph.segments {
        let v = net.add_var(format!("free_{}", s.id), 0, 1, 1);
        seg_free.insert(s.id.clone(), v);
        seg_order.push((s.id.clone(), v));
    }
    let mut occupancy = Vec::new();
    for t in &sys.trains {
        let x = net.add_clock(format!("x_{}", t.id));
        let n = t.connection.len() as i64;
        let counter = net.add_var(format!("count_{}", t.id), 0, n, 0);
        let (pta, held) = translate_train(t, sys, &catalog, x, counter, &seg_free)?;
        occupancy.push(Occupancy {
            component: net.components.len(),
            held,
        });
        net.components.push(pta);
    }
    let needs_abs = sys
        .constraints
        .iter()
        .any(|c| matches!(c, ScheduleConstraint::Absolute { .. }));
    let x_abs = needs_abs.then(|| net.add_clock("x_abs"));
    let mut monitors = Vec::new();
    for (i, c) in sys.constraints.iter().enumerate() {
        let mut fresh = |name: String| net.add_clock(name);
        monitors.push(translate_constraint(i + 1, c, sys, &catalog, x_abs, &mut fresh));
    }
    net.components.extend(merge_monitors(monitors));
    Ok(SynthesisProblem {
        network: net,
        catalog,
        seg_free: seg_order,
        occupancy,
    })
}
