//! Rail network graphs, trains, schedule constraints and whole constrained
//! railway systems, together with well-formedness validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::rational::Rational;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }
    };
}

id_type!(
    /// Identifier of a node of the rail network.
    NodeId
);
id_type!(
    /// Identifier of a segment of the rail network.
    SegmentId
);
id_type!(TrainId);
id_type!(
    /// Name of a timing parameter.
    ParamId
);

/// A traversal duration: either a known non-negative constant or a parameter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DurationSpec {
    Constant(Rational),
    Parameter(ParamId),
}

impl DurationSpec {
    pub fn constant(n: i64) -> Self {
        DurationSpec::Constant(Rational::from_integer(n))
    }

    pub fn param(name: &str) -> Self {
        DurationSpec::Parameter(ParamId::from(name))
    }
}

impl fmt::Display for DurationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DurationSpec::Constant(c) => write!(f, "{}", crate::rational::format_rational(c)),
            DurationSpec::Parameter(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Normal,
    Boundary,
    Station,
}

impl NodeKind {
    pub fn keyword(self) -> &'static str {
        match self {
            NodeKind::Normal => "normal",
            NodeKind::Boundary => "boundary",
            NodeKind::Station => "station",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
}

/// A bidirectional segment between two distinct nodes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Segment {
    pub id: SegmentId,
    pub ends: (NodeId, NodeId),
    pub dur: DurationSpec,
}

impl Segment {
    pub fn touches(&self, node: &NodeId) -> bool {
        &self.ends.0 == node || &self.ends.1 == node
    }

    /// The endpoint opposite to `node`, if `node` is an endpoint.
    pub fn other_end(&self, node: &NodeId) -> Option<&NodeId> {
        if &self.ends.0 == node {
            Some(&self.ends.1)
        } else if &self.ends.1 == node {
            Some(&self.ends.0)
        } else {
            None
        }
    }
}

/// A train may move from any segment of `left` to any segment of `right`
/// through `node`, or the opposite way.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Transition {
    pub left: BTreeSet<SegmentId>,
    pub node: NodeId,
    pub right: BTreeSet<SegmentId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RailNetworkGraph {
    pub nodes: Vec<Node>,
    pub segments: Vec<Segment>,
    /// Handover durations keyed on ordered segment pairs.
    pub pair_dur: BTreeMap<(SegmentId, SegmentId), DurationSpec>,
    pub transitions: Vec<Transition>,
}

impl RailNetworkGraph {
    pub fn node(&self, id: &NodeId) -> Option<&Node> {
        self.nodes.iter().find(|n| &n.id == id)
    }

    pub fn segment(&self, id: &SegmentId) -> Option<&Segment> {
        self.segments.iter().find(|s| &s.id == id)
    }

    pub fn is_boundary(&self, id: &NodeId) -> bool {
        self.node(id).is_some_and(|n| n.kind == NodeKind::Boundary)
    }

    pub fn is_station(&self, id: &NodeId) -> bool {
        self.node(id).is_some_and(|n| n.kind == NodeKind::Station)
    }

    pub fn boundaries(&self) -> impl Iterator<Item = &NodeId> {
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Boundary)
            .map(|n| &n.id)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Train {
    pub id: TrainId,
    /// Per-train segment durations; absent entries defer to the network.
    pub seg_dur: BTreeMap<SegmentId, DurationSpec>,
    pub pair_dur: BTreeMap<(SegmentId, SegmentId), DurationSpec>,
    /// Nodes to visit in order; the first one is the start boundary.
    pub connection: Vec<NodeId>,
}

impl Train {
    pub fn new(id: &str, connection: &[&str]) -> Self {
        Train {
            id: TrainId::from(id),
            seg_dur: BTreeMap::new(),
            pair_dur: BTreeMap::new(),
            connection: connection.iter().map(|&n| NodeId::from(n)).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VisitKind {
    Arrival,
    Departure,
}

impl VisitKind {
    pub fn keyword(self) -> &'static str {
        match self {
            VisitKind::Arrival => "arrival",
            VisitKind::Departure => "departure",
        }
    }
}

/// The time at which a train arrives at, or departs from, a node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VisitEvent {
    pub train: TrainId,
    pub node: NodeId,
    pub kind: VisitKind,
}

impl VisitEvent {
    pub fn arrival(train: &str, node: &str) -> Self {
        VisitEvent {
            train: TrainId::from(train),
            node: NodeId::from(node),
            kind: VisitKind::Arrival,
        }
    }

    pub fn departure(train: &str, node: &str) -> Self {
        VisitEvent {
            train: TrainId::from(train),
            node: NodeId::from(node),
            kind: VisitKind::Departure,
        }
    }
}

impl fmt::Display for VisitEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {})", self.kind.keyword(), self.train, self.node)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    /// The operator obtained by swapping the operands.
    pub fn flipped(self) -> Self {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Eq => CmpOp::Eq,
            CmpOp::Ge => CmpOp::Le,
            CmpOp::Gt => CmpOp::Lt,
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, CmpOp::Lt | CmpOp::Gt)
    }

    pub fn holds<T: PartialOrd>(self, lhs: T, rhs: T) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Schedule constraints over visit events. `wait(t, n)` is the relative
/// constraint from `arrival(t, n)` to `departure(t, n)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ScheduleConstraint {
    Ordering {
        first: VisitEvent,
        second: VisitEvent,
        op: CmpOp,
    },
    Absolute {
        event: VisitEvent,
        op: CmpOp,
        bound: DurationSpec,
    },
    Relative {
        from: VisitEvent,
        to: VisitEvent,
        op: CmpOp,
        bound: DurationSpec,
    },
}

impl ScheduleConstraint {
    pub fn wait(train: &str, node: &str, op: CmpOp, bound: DurationSpec) -> Self {
        ScheduleConstraint::Relative {
            from: VisitEvent::arrival(train, node),
            to: VisitEvent::departure(train, node),
            op,
            bound,
        }
    }

    pub fn events(&self) -> Vec<&VisitEvent> {
        match self {
            ScheduleConstraint::Ordering { first, second, .. } => vec![first, second],
            ScheduleConstraint::Absolute { event, .. } => vec![event],
            ScheduleConstraint::Relative { from, to, .. } => vec![from, to],
        }
    }

    pub fn bound(&self) -> Option<&DurationSpec> {
        match self {
            ScheduleConstraint::Ordering { .. } => None,
            ScheduleConstraint::Absolute { bound, .. } | ScheduleConstraint::Relative { bound, .. } => {
                Some(bound)
            }
        }
    }
}

/// A declared parameter with optional box bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamDecl {
    pub id: ParamId,
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl ParamDecl {
    pub fn free(name: &str) -> Self {
        ParamDecl {
            id: ParamId::from(name),
            lower: None,
            upper: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstrainedRailwaySystem {
    pub graph: RailNetworkGraph,
    pub trains: Vec<Train>,
    pub constraints: Vec<ScheduleConstraint>,
    pub params: Vec<ParamDecl>,
}

impl ConstrainedRailwaySystem {
    pub fn train(&self, id: &TrainId) -> Option<&Train> {
        self.trains.iter().find(|t| &t.id == id)
    }

    pub fn param_index(&self, id: &ParamId) -> Option<usize> {
        self.params.iter().position(|p| &p.id == id)
    }

    /// Copy with nodes, segments, transitions, trains and constraints in
    /// canonical order. Parameter order is significant and kept.
    pub fn normalized(&self) -> Self {
        let mut sys = self.clone();
        sys.graph.nodes.sort();
        sys.graph.segments.sort();
        sys.graph.transitions.sort();
        sys.trains.sort_by(|a, b| a.id.cmp(&b.id));
        sys.constraints.sort();
        sys
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValidationCode {
    DuplicateNode,
    DuplicateSegment,
    DuplicateTrain,
    DuplicateParam,
    SegSelfLoop,
    UnknownNode,
    UnknownSegment,
    UnknownTrain,
    UnknownParam,
    NegativeConstant,
    InvalidParamBounds,
    TransitionNotIncident,
    TransitionSegmentBothSides,
    MissingPairDuration,
    EmptyConnection,
    ConnectionStartNotBoundary,
    ConnectionInteriorBoundary,
}

impl ValidationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ValidationCode::DuplicateNode => "DUPLICATE_NODE",
            ValidationCode::DuplicateSegment => "DUPLICATE_SEGMENT",
            ValidationCode::DuplicateTrain => "DUPLICATE_TRAIN",
            ValidationCode::DuplicateParam => "DUPLICATE_PARAM",
            ValidationCode::SegSelfLoop => "SEG_SELF_LOOP",
            ValidationCode::UnknownNode => "UNKNOWN_NODE",
            ValidationCode::UnknownSegment => "UNKNOWN_SEGMENT",
            ValidationCode::UnknownTrain => "UNKNOWN_TRAIN",
            ValidationCode::UnknownParam => "UNKNOWN_PARAM",
            ValidationCode::NegativeConstant => "NEGATIVE_CONSTANT",
            ValidationCode::InvalidParamBounds => "INVALID_PARAM_BOUNDS",
            ValidationCode::TransitionNotIncident => "TRANSITION_NOT_INCIDENT",
            ValidationCode::TransitionSegmentBothSides => "TRANSITION_SEGMENT_BOTH_SIDES",
            ValidationCode::MissingPairDuration => "MISSING_PAIR_DURATION",
            ValidationCode::EmptyConnection => "EMPTY_CONNECTION",
            ValidationCode::ConnectionStartNotBoundary => "CONNECTION_START_NOT_BOUNDARY",
            ValidationCode::ConnectionInteriorBoundary => "CONNECTION_INTERIOR_BOUNDARY",
        }
    }
}

impl fmt::Display for ValidationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationIssue {
    pub code: ValidationCode,
    pub message: String,
    /// Offending entity, e.g. `segment 3` or `train red`.
    pub entity: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: {}", self.code, self.entity, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn codes(&self) -> Vec<ValidationCode> {
        self.issues.iter().map(|i| i.code).collect()
    }

    fn push(&mut self, code: ValidationCode, entity: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ValidationIssue {
            code,
            message: message.into(),
            entity: entity.into(),
        });
    }
}

struct Checker<'a> {
    report: ValidationReport,
    nodes: BTreeSet<&'a NodeId>,
    segments: BTreeSet<&'a SegmentId>,
    trains: BTreeSet<&'a TrainId>,
    params: BTreeSet<&'a ParamId>,
}

impl<'a> Checker<'a> {
    fn duration(&mut self, d: &DurationSpec, entity: &str) {
        match d {
            DurationSpec::Constant(c) if *c < Rational::from_integer(0) => self.report.push(
                ValidationCode::NegativeConstant,
                entity,
                format!("negative duration {c}"),
            ),
            DurationSpec::Parameter(p) if !self.params.contains(p) => self.report.push(
                ValidationCode::UnknownParam,
                entity,
                format!("undeclared parameter {p}"),
            ),
            _ => {}
        }
    }

    fn node_ref(&mut self, n: &NodeId, entity: &str) -> bool {
        if self.nodes.contains(n) {
            true
        } else {
            self.report
                .push(ValidationCode::UnknownNode, entity, format!("unknown node {n}"));
            false
        }
    }

    fn segment_ref(&mut self, s: &SegmentId, entity: &str) -> bool {
        if self.segments.contains(s) {
            true
        } else {
            self.report.push(
                ValidationCode::UnknownSegment,
                entity,
                format!("unknown segment {s}"),
            );
            false
        }
    }

    fn event(&mut self, e: &VisitEvent, entity: &str) {
        if !self.trains.contains(&e.train) {
            self.report.push(
                ValidationCode::UnknownTrain,
                entity,
                format!("unknown train {}", e.train),
            );
        }
        self.node_ref(&e.node, entity);
    }
}

/// Checks every well-formedness invariant of a constrained railway system.
/// Returns an empty report iff the system is well formed.
pub fn validate_system(sys: &ConstrainedRailwaySystem) -> ValidationReport {
    let mut c = Checker {
        report: ValidationReport::default(),
        nodes: BTreeSet::new(),
        segments: BTreeSet::new(),
        trains: BTreeSet::new(),
        params: BTreeSet::new(),
    };
    let zero = Rational::from_integer(0);

    for p in &sys.params {
        if !c.params.insert(&p.id) {
            c.report.push(
                ValidationCode::DuplicateParam,
                format!("param {}", p.id),
                "parameter declared twice",
            );
        }
        let bad_lower = p.lower.is_some_and(|l| l < zero);
        let bad_order = matches!((p.lower, p.upper), (Some(l), Some(u)) if l > u);
        if bad_lower || bad_order || p.upper.is_some_and(|u| u < zero) {
            c.report.push(
                ValidationCode::InvalidParamBounds,
                format!("param {}", p.id),
                "bounds must satisfy 0 <= lower <= upper",
            );
        }
    }
    for n in &sys.graph.nodes {
        if !c.nodes.insert(&n.id) {
            c.report.push(
                ValidationCode::DuplicateNode,
                format!("node {}", n.id),
                "node declared twice",
            );
        }
    }
    for s in &sys.graph.segments {
        let entity = format!("segment {}", s.id);
        if !c.segments.insert(&s.id) {
            c.report
                .push(ValidationCode::DuplicateSegment, &entity, "segment declared twice");
        }
        if s.ends.0 == s.ends.1 {
            c.report.push(
                ValidationCode::SegSelfLoop,
                &entity,
                format!("both endpoints are {}", s.ends.0),
            );
        }
        c.node_ref(&s.ends.0, &entity);
        c.node_ref(&s.ends.1, &entity);
        c.duration(&s.dur, &entity);
    }
    for t in &sys.trains {
        if !c.trains.insert(&t.id) {
            c.report.push(
                ValidationCode::DuplicateTrain,
                format!("train {}", t.id),
                "train declared twice",
            );
        }
    }

    for ((a, b), d) in &sys.graph.pair_dur {
        let entity = format!("pairdur {a} -> {b}");
        c.segment_ref(a, &entity);
        c.segment_ref(b, &entity);
        c.duration(d, &entity);
    }

    for (i, tr) in sys.graph.transitions.iter().enumerate() {
        let entity = format!("transition #{} at {}", i + 1, tr.node);
        if !c.node_ref(&tr.node, &entity) {
            continue;
        }
        for s in tr.left.iter().chain(&tr.right) {
            if !c.segment_ref(s, &entity) {
                continue;
            }
            let seg = sys.graph.segment(s).expect("checked above");
            if !seg.touches(&tr.node) {
                c.report.push(
                    ValidationCode::TransitionNotIncident,
                    &entity,
                    format!("segment {s} does not touch node {}", tr.node),
                );
            }
        }
        for s in tr.left.intersection(&tr.right) {
            c.report.push(
                ValidationCode::TransitionSegmentBothSides,
                &entity,
                format!("segment {s} appears on both sides"),
            );
        }
    }

    if c.report.is_empty() {
        for (a, n, b) in traversable_pairs(&sys.graph) {
            if !sys.graph.pair_dur.contains_key(&(a.clone(), b.clone())) {
                c.report.push(
                    ValidationCode::MissingPairDuration,
                    format!("pairdur {a} -> {b}"),
                    format!("no duration for moving from {a} to {b} via {n}"),
                );
            }
        }
    }

    for t in &sys.trains {
        let entity = format!("train {}", t.id);
        for (s, d) in &t.seg_dur {
            c.segment_ref(s, &entity);
            c.duration(d, &entity);
        }
        for ((a, b), d) in &t.pair_dur {
            c.segment_ref(a, &entity);
            c.segment_ref(b, &entity);
            c.duration(d, &entity);
        }
        if t.connection.is_empty() {
            c.report
                .push(ValidationCode::EmptyConnection, &entity, "connection is empty");
            continue;
        }
        let known: Vec<bool> = t
            .connection
            .iter()
            .map(|n| c.node_ref(n, &entity))
            .collect();
        if known[0] && !sys.graph.is_boundary(&t.connection[0]) {
            c.report.push(
                ValidationCode::ConnectionStartNotBoundary,
                &entity,
                format!("connection starts at non-boundary node {}", t.connection[0]),
            );
        }
        let last = t.connection.len() - 1;
        for (i, n) in t.connection.iter().enumerate() {
            if i != 0 && i != last && known[i] && sys.graph.is_boundary(n) {
                c.report.push(
                    ValidationCode::ConnectionInteriorBoundary,
                    &entity,
                    format!("boundary node {n} inside the connection"),
                );
            }
        }
    }

    for (i, sc) in sys.constraints.iter().enumerate() {
        let entity = format!("constraint #{}", i + 1);
        for e in sc.events() {
            c.event(e, &entity);
        }
        if let Some(b) = sc.bound() {
            c.duration(b, &entity);
        }
    }

    c.report
}

/// All ordered moves `(from, via, to)` permitted by the transitions, in both
/// directions of every transition.
pub fn traversable_pairs(graph: &RailNetworkGraph) -> BTreeSet<(SegmentId, NodeId, SegmentId)> {
    let mut out = BTreeSet::new();
    for t in &graph.transitions {
        for l in &t.left {
            for r in &t.right {
                if l == r {
                    continue;
                }
                out.insert((l.clone(), t.node.clone(), r.clone()));
                out.insert((r.clone(), t.node.clone(), l.clone()));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Effective durations
// ---------------------------------------------------------------------------

/// A train's duration for one segment or segment pair, i.e. the maximum of
/// the network and train values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EffectiveDuration {
    Constant(Rational),
    Param(ParamId),
    /// `max(p, c)`; the translation splits this into the cases `p >= c` and
    /// `p <= c`.
    ParamVsConst(ParamId, Rational),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EffectiveDurations {
    pub segments: BTreeMap<SegmentId, EffectiveDuration>,
    pub pairs: BTreeMap<(SegmentId, SegmentId), EffectiveDuration>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ResolveError {
    #[error("ERR_TWO_PARAMS: {slot} is bounded by both {network} (network) and {train} (train)")]
    TwoParams {
        slot: String,
        network: ParamId,
        train: ParamId,
    },
}

fn merge(
    network: &DurationSpec,
    train: Option<&DurationSpec>,
    slot: impl FnOnce() -> String,
) -> Result<EffectiveDuration, ResolveError> {
    use DurationSpec::{Constant, Parameter};
    let zero = Rational::from_integer(0);
    Ok(match (network, train) {
        (Constant(c), None) => EffectiveDuration::Constant(*c),
        (Parameter(p), None) => EffectiveDuration::Param(p.clone()),
        (Constant(a), Some(Constant(b))) => EffectiveDuration::Constant(*a.max(b)),
        // parameters are non-negative, so max(p, 0) = p
        (Parameter(p), Some(Constant(c))) | (Constant(c), Some(Parameter(p))) => {
            if *c <= zero {
                EffectiveDuration::Param(p.clone())
            } else {
                EffectiveDuration::ParamVsConst(p.clone(), *c)
            }
        }
        (Parameter(p), Some(Parameter(q))) if p == q => EffectiveDuration::Param(p.clone()),
        (Parameter(p), Some(Parameter(q))) => {
            return Err(ResolveError::TwoParams {
                slot: slot(),
                network: p.clone(),
                train: q.clone(),
            })
        }
    })
}

/// Merges network and train durations for every segment and every
/// traversable ordered pair that has a network duration.
pub fn resolve_effective_durations(
    train: &Train,
    graph: &RailNetworkGraph,
) -> Result<EffectiveDurations, ResolveError> {
    let mut out = EffectiveDurations::default();
    for s in &graph.segments {
        let d = merge(&s.dur, train.seg_dur.get(&s.id), || {
            format!("segment {} of train {}", s.id, train.id)
        })?;
        out.segments.insert(s.id.clone(), d);
    }
    for (a, _, b) in traversable_pairs(graph) {
        let key = (a, b);
        if out.pairs.contains_key(&key) {
            continue;
        }
        if let Some(net) = graph.pair_dur.get(&key) {
            let d = merge(net, train.pair_dur.get(&key), || {
                format!("pair {} -> {} of train {}", key.0, key.1, train.id)
            })?;
            out.pairs.insert(key, d);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(id: &str, a: &str, b: &str, d: DurationSpec) -> Segment {
        Segment {
            id: SegmentId::from(id),
            ends: (NodeId::from(a), NodeId::from(b)),
            dur: d,
        }
    }

    fn node(id: &str, kind: NodeKind) -> Node {
        Node {
            id: NodeId::from(id),
            kind,
        }
    }

    fn set(ids: &[&str]) -> BTreeSet<SegmentId> {
        ids.iter().map(|&s| SegmentId::from(s)).collect()
    }

    fn transition(l: &[&str], n: &str, r: &[&str]) -> Transition {
        Transition {
            left: set(l),
            node: NodeId::from(n),
            right: set(r),
        }
    }

    /// A -1- N -2- B, with both pair durations defined.
    fn line() -> ConstrainedRailwaySystem {
        let mut g = RailNetworkGraph {
            nodes: vec![
                node("A", NodeKind::Boundary),
                node("N", NodeKind::Normal),
                node("B", NodeKind::Boundary),
            ],
            segments: vec![
                seg("1", "A", "N", DurationSpec::constant(8)),
                seg("2", "N", "B", DurationSpec::constant(5)),
            ],
            ..Default::default()
        };
        g.transitions.push(transition(&["1"], "N", &["2"]));
        g.pair_dur
            .insert(("1".into(), "2".into()), DurationSpec::constant(1));
        g.pair_dur
            .insert(("2".into(), "1".into()), DurationSpec::constant(1));
        ConstrainedRailwaySystem {
            graph: g,
            trains: vec![Train::new("t", &["A", "B"])],
            constraints: vec![],
            params: vec![],
        }
    }

    #[test]
    fn empty_system_is_valid() {
        assert!(validate_system(&ConstrainedRailwaySystem::default()).is_empty());
    }

    #[test]
    fn line_is_valid() {
        assert!(validate_system(&line()).is_empty());
    }

    fn single_code(sys: &ConstrainedRailwaySystem) -> ValidationCode {
        let r = validate_system(sys);
        assert_eq!(r.issues.len(), 1, "{:?}", r.issues);
        r.issues[0].code
    }

    #[test]
    fn one_violation_per_code() {
        let mut s = line();
        s.graph.nodes.push(node("A", NodeKind::Normal));
        assert_eq!(single_code(&s), ValidationCode::DuplicateNode);

        let mut s = line();
        s.graph
            .segments
            .push(seg("1", "A", "N", DurationSpec::constant(1)));
        assert_eq!(single_code(&s), ValidationCode::DuplicateSegment);

        let mut s = line();
        s.trains.push(Train::new("t", &["A", "B"]));
        assert_eq!(single_code(&s), ValidationCode::DuplicateTrain);

        let mut s = line();
        s.params = vec![ParamDecl::free("p"), ParamDecl::free("p")];
        assert_eq!(single_code(&s), ValidationCode::DuplicateParam);

        let mut s = line();
        s.graph
            .segments
            .push(seg("9", "B", "B", DurationSpec::constant(1)));
        assert_eq!(single_code(&s), ValidationCode::SegSelfLoop);

        let mut s = line();
        s.graph
            .segments
            .push(seg("9", "B", "Z", DurationSpec::constant(1)));
        assert_eq!(single_code(&s), ValidationCode::UnknownNode);

        let mut s = line();
        s.trains[0]
            .seg_dur
            .insert("42".into(), DurationSpec::constant(1));
        assert_eq!(single_code(&s), ValidationCode::UnknownSegment);

        let mut s = line();
        s.constraints.push(ScheduleConstraint::Absolute {
            event: VisitEvent::arrival("ghost", "B"),
            op: CmpOp::Le,
            bound: DurationSpec::constant(3),
        });
        assert_eq!(single_code(&s), ValidationCode::UnknownTrain);

        let mut s = line();
        s.graph.segments[0].dur = DurationSpec::param("q");
        assert_eq!(single_code(&s), ValidationCode::UnknownParam);

        let mut s = line();
        s.graph.segments[0].dur = DurationSpec::Constant(Rational::new(-1, 2));
        assert_eq!(single_code(&s), ValidationCode::NegativeConstant);

        let mut s = line();
        s.params = vec![ParamDecl {
            id: "p".into(),
            lower: Some(Rational::from_integer(5)),
            upper: Some(Rational::from_integer(2)),
        }];
        assert_eq!(single_code(&s), ValidationCode::InvalidParamBounds);

        let mut s = line();
        s.graph
            .segments
            .push(seg("3", "A", "B", DurationSpec::constant(1)));
        s.graph.transitions[0].right.insert("3".into());
        assert_eq!(single_code(&s), ValidationCode::TransitionNotIncident);

        let mut s = line();
        s.graph.pair_dur.remove(&("2".into(), "1".into()));
        assert_eq!(single_code(&s), ValidationCode::MissingPairDuration);

        let mut s = line();
        s.trains[0].connection.clear();
        assert_eq!(single_code(&s), ValidationCode::EmptyConnection);

        let mut s = line();
        s.trains[0] = Train::new("t", &["N", "B"]);
        assert_eq!(single_code(&s), ValidationCode::ConnectionStartNotBoundary);

        let mut s = line();
        s.trains[0] = Train::new("t", &["A", "B", "N"]);
        assert_eq!(single_code(&s), ValidationCode::ConnectionInteriorBoundary);
    }

    #[test]
    fn transition_both_sides_alone() {
        let mut s = line();
        s.graph.transitions[0] = transition(&["1", "2"], "N", &["2"]);
        assert_eq!(single_code(&s), ValidationCode::TransitionSegmentBothSides);
    }

    #[test]
    fn traversable_pairs_both_directions() {
        let g = RailNetworkGraph {
            transitions: vec![transition(&["1"], "N1", &["2", "3"])],
            ..Default::default()
        };
        let got: Vec<(String, String, String)> = traversable_pairs(&g)
            .into_iter()
            .map(|(a, n, b)| (a.0, n.0, b.0))
            .collect();
        let want: Vec<(String, String, String)> = [
            ("1", "N1", "2"),
            ("1", "N1", "3"),
            ("2", "N1", "1"),
            ("3", "N1", "1"),
        ]
        .iter()
        .map(|(a, n, b)| (a.to_string(), n.to_string(), b.to_string()))
        .collect();
        assert_eq!(got, want);
        assert!(traversable_pairs(&RailNetworkGraph::default()).is_empty());
    }

    #[test]
    fn effective_duration_cases() {
        let net = DurationSpec::constant(8);
        assert_eq!(
            merge(&net, Some(&DurationSpec::constant(10)), String::new).unwrap(),
            EffectiveDuration::Constant(Rational::from_integer(10))
        );
        assert_eq!(
            merge(&net, None, String::new).unwrap(),
            EffectiveDuration::Constant(Rational::from_integer(8))
        );
        assert_eq!(
            merge(&DurationSpec::param("p2"), Some(&DurationSpec::constant(3)), String::new)
                .unwrap(),
            EffectiveDuration::ParamVsConst("p2".into(), Rational::from_integer(3))
        );
        assert_eq!(
            merge(&DurationSpec::param("p"), Some(&DurationSpec::param("p")), String::new)
                .unwrap(),
            EffectiveDuration::Param("p".into())
        );
        assert!(matches!(
            merge(&DurationSpec::param("p"), Some(&DurationSpec::param("q")), || "x".into()),
            Err(ResolveError::TwoParams { .. })
        ));
    }

    #[test]
    fn resolve_is_idempotent_and_uses_train_overrides() {
        let mut s = line();
        s.trains[0]
            .seg_dur
            .insert("1".into(), DurationSpec::constant(10));
        let a = resolve_effective_durations(&s.trains[0], &s.graph).unwrap();
        let b = resolve_effective_durations(&s.trains[0], &s.graph).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            a.segments[&SegmentId::from("1")],
            EffectiveDuration::Constant(Rational::from_integer(10))
        );
        assert_eq!(
            a.segments[&SegmentId::from("2")],
            EffectiveDuration::Constant(Rational::from_integer(5))
        );
        assert_eq!(a.pairs.len(), 2);
    }
}
