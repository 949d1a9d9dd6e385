//! Unit-delay breadth-first search over concrete configurations.
//!
//! The railway system is simulated directly: trains wait at their start
//! boundary as long as they like, leave a segment exactly when its duration
//! has elapsed, pass nodes in exactly the pair duration (or at least that
//! long at a station of their connection) and hold the segment they come
//! from until they depart. Schedule constraints act as gates on visit
//! events. Time advances in unit steps, so all constants must be integers.
//!
//! When some constraint is strict, every constant is doubled first and the
//! search runs on half units.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use railsynth::model::*;
use railsynth::pta::Valuation;
use railsynth::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("ERR_NON_INTEGER: {0} is not an integer")]
    NonInteger(String),
    #[error("ERR_MISSING_PARAM: no value for parameter {0}")]
    MissingParam(ParamId),
    #[error("ERR_NEGATIVE: parameter {0} is negative")]
    Negative(ParamId),
    #[error("invalid system: {0}")]
    Invalid(String),
}

/// Outcome of one search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleReport {
    pub feasible: bool,
    /// Some run was cut off at the horizon.
    pub saturated: bool,
    /// Horizon actually used, in search units.
    pub horizon: i64,
    /// Whether constants were doubled for strict constraints.
    pub half_units: bool,
    pub configs: usize,
}

/// Whether every train can complete its connection with all schedule
/// constraints met, using integer delays only. `horizon` defaults to
/// [`default_horizon`].
pub fn integer_time_reachable(
    sys: &ConstrainedRailwaySystem,
    v: &Valuation,
    horizon: Option<i64>,
) -> Result<bool, OracleError> {
    search(sys, v, horizon).map(|r| r.feasible)
}

/// Sum of the effective durations of every segment and pair for every
/// train, plus the largest constraint constant, plus the number of trains.
/// In the caller's time units.
pub fn default_horizon(sys: &ConstrainedRailwaySystem, v: &Valuation) -> Result<i64, OracleError> {
    let plan = Plan::build(sys, v, 1)?;
    Ok(plan.default_horizon())
}

/// Full search with statistics. An explicit `horizon` is given in the
/// caller's time units and doubled along with everything else. Valuations
/// outside the declared parameter bounds are infeasible.
pub fn search(
    sys: &ConstrainedRailwaySystem,
    v: &Valuation,
    horizon: Option<i64>,
) -> Result<OracleReport, OracleError> {
    let issues = validate_system(sys);
    if !issues.is_empty() {
        let msgs: Vec<String> = issues.issues.iter().map(|i| i.to_string()).collect();
        return Err(OracleError::Invalid(msgs.join("; ")));
    }
    let outside = sys.params.iter().any(|p| {
        v.get(&p.id)
            .is_some_and(|&x| p.lower.is_some_and(|l| x < l) || p.upper.is_some_and(|u| x > u))
    });
    let half = has_strict(sys);
    let scale = if half { 2 } else { 1 };
    let plan = Plan::build(sys, v, scale)?;
    let horizon = match horizon {
        Some(h) => h.max(0) * scale,
        None => plan.default_horizon(),
    };
    let mut report = if outside {
        OracleReport {
            feasible: false,
            saturated: false,
            horizon,
            half_units: false,
            configs: 0,
        }
    } else {
        plan.run(horizon)
    };
    report.half_units = half;
    Ok(report)
}

fn has_strict(sys: &ConstrainedRailwaySystem) -> bool {
    sys.constraints.iter().any(|c| match c {
        ScheduleConstraint::Ordering { op, .. }
        | ScheduleConstraint::Absolute { op, .. }
        | ScheduleConstraint::Relative { op, .. } => op.is_strict(),
    })
}

fn integer(r: Rational, what: impl FnOnce() -> String) -> Result<i64, OracleError> {
    if r.is_integer() {
        Ok(r.to_integer())
    } else {
        Err(OracleError::NonInteger(what()))
    }
}

/// A visit event as (train, node, is arrival).
type Event = (usize, usize, bool);

struct TrainPlan {
    /// Connection as node indices.
    conn: Vec<usize>,
    seg_dur: Vec<i64>,
    pair_dur: HashMap<(usize, usize), i64>,
    /// Stations of the connection, where the train may stay longer.
    dwell: BTreeSet<usize>,
    last_boundary: bool,
}

#[derive(Clone, Copy, Debug)]
enum Gate {
    Absolute { event: Event, op: CmpOp, bound: i64 },
    Relative { from: Event, to: Event, op: CmpOp, bound: i64 },
    /// `first` then `second`, with `op` one of `<=`, `<`, `=` on their times.
    Order { first: Event, second: Event, op: CmpOp },
}

/// Progress of one gate: stage and the time of its reference event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct GateState {
    stage: u8,
    stamp: i64,
}

impl Gate {
    fn done(&self, s: GateState) -> bool {
        match self {
            Gate::Absolute { .. } => s.stage == 1,
            _ => s.stage == 2,
        }
    }

    /// Reaction to `ev` at time `t`; `None` blocks the event.
    fn step(&self, s: GateState, ev: Event, t: i64) -> Option<GateState> {
        let at = |stage, stamp| Some(GateState { stage, stamp });
        match *self {
            Gate::Absolute { event, op, bound } => {
                if ev != event || s.stage == 1 {
                    return Some(s);
                }
                op.holds(t, bound).then_some(GateState { stage: 1, stamp: 0 })
            }
            Gate::Relative { from, to, op, bound } => {
                if ev != from && ev != to {
                    return Some(s);
                }
                match s.stage {
                    0 if ev == from => at(1, t),
                    1 if ev == to => op.holds(t - s.stamp, bound).then_some(GateState { stage: 2, stamp: 0 }),
                    2 => Some(s),
                    _ => None,
                }
            }
            Gate::Order { first, second, op } => {
                if ev != first && ev != second {
                    return Some(s);
                }
                match s.stage {
                    0 if ev == first => at(1, t),
                    1 if ev == second => {
                        let ok = match op {
                            CmpOp::Lt => t > s.stamp,
                            CmpOp::Eq => t == s.stamp,
                            _ => true,
                        };
                        ok.then_some(GateState { stage: 2, stamp: 0 })
                    }
                    2 => Some(s),
                    _ => None,
                }
            }
        }
    }

    /// Whether the gate can no longer be satisfied at time `t` or later.
    fn expired(&self, s: GateState, t: i64) -> bool {
        let late = |op: CmpOp, elapsed: i64, bound: i64| match op {
            CmpOp::Lt => elapsed >= bound,
            CmpOp::Le | CmpOp::Eq => elapsed > bound,
            CmpOp::Ge | CmpOp::Gt => false,
        };
        match *self {
            Gate::Absolute { op, bound, .. } => s.stage == 0 && late(op, t, bound),
            Gate::Relative { op, bound, .. } => s.stage == 1 && late(op, t - s.stamp, bound),
            Gate::Order { op, .. } => s.stage == 1 && op == CmpOp::Eq && t > s.stamp,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Pos {
    Start,
    /// On segment `seg`, heading to node `head`.
    Seg { seg: usize, head: usize },
    /// Passing node `via` from segment `from` to segment `to`.
    Node { from: usize, via: usize, to: usize },
    Done,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct TrainState {
    pos: Pos,
    elapsed: i64,
    counter: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Config {
    trains: Vec<TrainState>,
    /// Holder of each segment.
    occupied: Vec<Option<usize>>,
    gates: Vec<GateState>,
}

struct Plan {
    ends: Vec<(usize, usize)>,
    boundary: Vec<bool>,
    /// Segments reachable from (segment, node) through that node.
    moves: HashMap<(usize, usize), Vec<usize>>,
    trains: Vec<TrainPlan>,
    gates: Vec<Gate>,
    max_constant: i64,
}

impl Plan {
    fn build(sys: &ConstrainedRailwaySystem, v: &Valuation, scale: i64) -> Result<Plan, OracleError> {
        let g = &sys.graph;
        for p in &sys.params {
            let val = *v.get(&p.id).ok_or_else(|| OracleError::MissingParam(p.id.clone()))?;
            if val < Rational::from_integer(0) {
                return Err(OracleError::Negative(p.id.clone()));
            }
        }
        let value = |d: &DurationSpec, what: &dyn Fn() -> String| -> Result<i64, OracleError> {
            let r = match d {
                DurationSpec::Constant(c) => *c,
                DurationSpec::Parameter(p) => *v.get(p).ok_or_else(|| OracleError::MissingParam(p.clone()))?,
            };
            Ok(integer(r, what)? * scale)
        };
        let node_ix: BTreeMap<&NodeId, usize> = g.nodes.iter().enumerate().map(|(i, n)| (&n.id, i)).collect();
        let seg_ix: BTreeMap<&SegmentId, usize> = g.segments.iter().enumerate().map(|(i, s)| (&s.id, i)).collect();
        let ends: Vec<(usize, usize)> = g
            .segments
            .iter()
            .map(|s| (node_ix[&s.ends.0], node_ix[&s.ends.1]))
            .collect();
        let boundary: Vec<bool> = g.nodes.iter().map(|n| n.kind == NodeKind::Boundary).collect();
        let station: Vec<bool> = g.nodes.iter().map(|n| n.kind == NodeKind::Station).collect();

        let mut moves: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for tr in &g.transitions {
            let v = node_ix[&tr.node];
            for l in &tr.left {
                for r in &tr.right {
                    let (l, r) = (seg_ix[l], seg_ix[r]);
                    if l != r {
                        moves.entry((l, v)).or_default().push(r);
                        moves.entry((r, v)).or_default().push(l);
                    }
                }
            }
        }
        for m in moves.values_mut() {
            m.sort_unstable();
            m.dedup();
        }

        let mut trains = Vec::new();
        for t in &sys.trains {
            let mut seg_dur = Vec::new();
            for s in &g.segments {
                let what = || format!("duration of segment {} for train {}", s.id, t.id);
                let mut d = value(&s.dur, &what)?;
                if let Some(o) = t.seg_dur.get(&s.id) {
                    d = d.max(value(o, &what)?);
                }
                seg_dur.push(d);
            }
            let mut pair_dur = HashMap::new();
            for ((a, b), d) in &g.pair_dur {
                let what = || format!("duration of pair {a} -> {b} for train {}", t.id);
                let mut x = value(d, &what)?;
                if let Some(o) = t.pair_dur.get(&(a.clone(), b.clone())) {
                    x = x.max(value(o, &what)?);
                }
                pair_dur.insert((seg_ix[a], seg_ix[b]), x);
            }
            let conn: Vec<usize> = t.connection.iter().map(|n| node_ix[n]).collect();
            let dwell = conn.iter().copied().filter(|&n| station[n]).collect();
            let last_boundary = conn.len() >= 2 && boundary[conn[conn.len() - 1]];
            trains.push(TrainPlan {
                conn,
                seg_dur,
                pair_dur,
                dwell,
                last_boundary,
            });
        }

        let train_ix: BTreeMap<&TrainId, usize> = sys.trains.iter().enumerate().map(|(i, t)| (&t.id, i)).collect();
        let event = |e: &VisitEvent| -> Event { (train_ix[&e.train], node_ix[&e.node], e.kind == VisitKind::Arrival) };
        let mut gates = Vec::new();
        let mut max_constant = 0;
        for (i, c) in sys.constraints.iter().enumerate() {
            let what = || format!("bound of constraint {}", i + 1);
            gates.push(match c {
                ScheduleConstraint::Absolute { event: e, op, bound } => {
                    let bound = value(bound, &what)?;
                    max_constant = max_constant.max(bound);
                    Gate::Absolute {
                        event: event(e),
                        op: *op,
                        bound,
                    }
                }
                ScheduleConstraint::Relative { from, to, op, bound } => {
                    let bound = value(bound, &what)?;
                    max_constant = max_constant.max(bound);
                    Gate::Relative {
                        from: event(from),
                        to: event(to),
                        op: *op,
                        bound,
                    }
                }
                ScheduleConstraint::Ordering { first, second, op } => {
                    let (a, b, op) = match op {
                        CmpOp::Ge | CmpOp::Gt => (second, first, op.flipped()),
                        _ => (first, second, *op),
                    };
                    Gate::Order {
                        first: event(a),
                        second: event(b),
                        op,
                    }
                }
            });
        }
        Ok(Plan {
            ends,
            boundary,
            moves,
            trains,
            gates,
            max_constant,
        })
    }

    fn default_horizon(&self) -> i64 {
        let per_train: i64 = self
            .trains
            .iter()
            .map(|t| t.seg_dur.iter().sum::<i64>() + t.pair_dur.values().sum::<i64>())
            .sum();
        per_train + self.max_constant + self.trains.len() as i64
    }

    fn other_end(&self, seg: usize, node: usize) -> usize {
        let (a, b) = self.ends[seg];
        if a == node {
            b
        } else {
            a
        }
    }

    fn initial(&self) -> Config {
        Config {
            trains: vec![
                TrainState {
                    pos: Pos::Start,
                    elapsed: 0,
                    counter: 0,
                };
                self.trains.len()
            ],
            occupied: vec![None; self.ends.len()],
            gates: vec![GateState { stage: 0, stamp: 0 }; self.gates.len()],
        }
    }

    fn is_goal(&self, c: &Config) -> bool {
        c.trains.iter().all(|t| t.pos == Pos::Done) && self.gates.iter().zip(&c.gates).all(|(g, &s)| g.done(s))
    }

    /// Fires `ev` through every gate, or `None` if one blocks it.
    fn fire(&self, c: &mut Config, ev: Event, t: i64) -> bool {
        let mut next = c.gates.clone();
        for (g, s) in self.gates.iter().zip(next.iter_mut()) {
            match g.step(*s, ev, t) {
                Some(n) => *s = n,
                None => return false,
            }
        }
        c.gates = next;
        true
    }

    /// Instantaneous moves of all trains.
    fn moves_from(&self, c: &Config, t: i64, out: &mut Vec<Config>) {
        for (i, (tp, ts)) in self.trains.iter().zip(&c.trains).enumerate() {
            let n = tp.conn.len() as i64;
            match ts.pos {
                Pos::Start => {
                    let start = tp.conn[0];
                    for (s, &(a, b)) in self.ends.iter().enumerate() {
                        if (a != start && b != start) || c.occupied[s].is_some() {
                            continue;
                        }
                        let mut next = c.clone();
                        if !self.fire(&mut next, (i, start, false), t) {
                            continue;
                        }
                        next.occupied[s] = Some(i);
                        next.trains[i] = TrainState {
                            pos: Pos::Seg {
                                seg: s,
                                head: self.other_end(s, start),
                            },
                            elapsed: 0,
                            counter: 1,
                        };
                        out.push(next);
                    }
                }
                Pos::Seg { seg, head } if ts.elapsed == tp.seg_dur[seg] => {
                    if self.boundary[head] {
                        let ok = if tp.last_boundary {
                            head == tp.conn[tp.conn.len() - 1] && ts.counter == n - 1
                        } else {
                            ts.counter == n
                        };
                        if !ok {
                            continue;
                        }
                        let mut next = c.clone();
                        if !self.fire(&mut next, (i, head, true), t) {
                            continue;
                        }
                        next.occupied[seg] = None;
                        next.trains[i] = TrainState {
                            pos: Pos::Done,
                            elapsed: 0,
                            counter: n,
                        };
                        out.push(next);
                        continue;
                    }
                    let k = ts.counter as usize;
                    let counter = if k >= 1 && k < tp.conn.len() && tp.conn[k] == head {
                        ts.counter + 1
                    } else {
                        ts.counter
                    };
                    for &s2 in self.moves.get(&(seg, head)).into_iter().flatten() {
                        if c.occupied[s2].is_some() {
                            continue;
                        }
                        let mut next = c.clone();
                        if !self.fire(&mut next, (i, head, true), t) {
                            continue;
                        }
                        next.occupied[s2] = Some(i);
                        next.trains[i] = TrainState {
                            pos: Pos::Node {
                                from: seg,
                                via: head,
                                to: s2,
                            },
                            elapsed: 0,
                            counter,
                        };
                        out.push(next);
                    }
                }
                Pos::Node { from, via, to } => {
                    let d = tp.pair_dur[&(from, to)];
                    let ready = if tp.dwell.contains(&via) {
                        ts.elapsed >= d
                    } else {
                        ts.elapsed == d
                    };
                    if !ready {
                        continue;
                    }
                    let mut next = c.clone();
                    if !self.fire(&mut next, (i, via, false), t) {
                        continue;
                    }
                    next.occupied[from] = None;
                    next.trains[i] = TrainState {
                        pos: Pos::Seg {
                            seg: to,
                            head: self.other_end(to, via),
                        },
                        elapsed: 0,
                        counter: ts.counter,
                    };
                    out.push(next);
                }
                _ => {}
            }
        }
    }

    /// The configuration one time unit later, or `None` if some train must
    /// move now or some gate can no longer be met.
    fn delay(&self, c: &Config, t: i64) -> Option<Config> {
        let mut next = c.clone();
        for (tp, ts) in self.trains.iter().zip(next.trains.iter_mut()) {
            match ts.pos {
                Pos::Seg { seg, .. } => {
                    if ts.elapsed >= tp.seg_dur[seg] {
                        return None;
                    }
                    ts.elapsed += 1;
                }
                Pos::Node { from, via, to } => {
                    let d = tp.pair_dur[&(from, to)];
                    if tp.dwell.contains(&via) {
                        ts.elapsed = (ts.elapsed + 1).min(d);
                    } else if ts.elapsed >= d {
                        return None;
                    } else {
                        ts.elapsed += 1;
                    }
                }
                Pos::Start | Pos::Done => {}
            }
        }
        if self.gates.iter().zip(&next.gates).any(|(g, &s)| g.expired(s, t + 1)) {
            return None;
        }
        Some(next)
    }

    fn run(&self, horizon: i64) -> OracleReport {
        let mut report = OracleReport {
            feasible: false,
            saturated: false,
            horizon,
            half_units: false,
            configs: 0,
        };
        let mut layer: HashSet<Config> = HashSet::from([self.initial()]);
        let mut t = 0;
        loop {
            // close the layer under instantaneous moves
            let mut seen: HashSet<Config> = layer.clone();
            let mut stack: Vec<Config> = layer.into_iter().collect();
            let mut buf = Vec::new();
            let mut next_layer = HashSet::new();
            while let Some(c) = stack.pop() {
                if self.is_goal(&c) {
                    report.feasible = true;
                    report.configs += seen.len();
                    return report;
                }
                buf.clear();
                self.moves_from(&c, t, &mut buf);
                for n in buf.drain(..) {
                    if !seen.contains(&n) {
                        seen.insert(n.clone());
                        stack.push(n);
                    }
                }
                if let Some(d) = self.delay(&c, t) {
                    if t >= horizon {
                        report.saturated = true;
                    } else {
                        next_layer.insert(d);
                    }
                }
            }
            report.configs += seen.len();
            if next_layer.is_empty() {
                return report;
            }
            layer = next_layer;
            t += 1;
        }
    }
}
