//! Serial-parallel benchmark networks.
//!
//! `ns` groups are chained between the boundaries `S` and `E`. Group `g`
//! has an entry node `S<g>`, an exit node `E<g>` and `np` parallel tracks,
//! each passing through a station `M<g>_<k>`. Every train runs from `S` to
//! `E` without stopping.

use std::fmt;
use std::str::FromStr;

use crate::model::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Deadline `J` on the arrival of the last train.
    Nop,
    /// `Nop` plus a bound `bnd` on the travel time of the last train.
    Last,
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioKind::Nop => "nop",
            ScenarioKind::Last => "last",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown scenario `{0}` (expected nop or last)")]
pub struct UnknownScenario(String);

impl FromStr for ScenarioKind {
    type Err = UnknownScenario;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nop" => Ok(ScenarioKind::Nop),
            "last" => Ok(ScenarioKind::Last),
            other => Err(UnknownScenario(other.to_string())),
        }
    }
}

/// Integer durations used for every segment and every handover.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DurationProfile {
    pub segment: i64,
    pub pair: i64,
}

impl Default for DurationProfile {
    fn default() -> Self {
        DurationProfile {
            segment: 10,
            pair: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScenarioSpec {
    pub ns: usize,
    pub np: usize,
    pub nt: usize,
    pub kind: ScenarioKind,
    pub profile: DurationProfile,
}

impl ScenarioSpec {
    pub fn new(ns: usize, np: usize, nt: usize, kind: ScenarioKind) -> Self {
        ScenarioSpec {
            ns,
            np,
            nt,
            kind,
            profile: DurationProfile::default(),
        }
    }
}

fn ids(names: &[String]) -> std::collections::BTreeSet<SegmentId> {
    names.iter().map(|n| SegmentId::from(n.as_str())).collect()
}

/// Builds the benchmark system. Counts of zero are treated as one.
pub fn gen_serial_parallel(spec: &ScenarioSpec) -> ConstrainedRailwaySystem {
    let (ns, np, nt) = (spec.ns.max(1), spec.np.max(1), spec.nt.max(1));
    let mut g = RailNetworkGraph::default();
    let node = |g: &mut RailNetworkGraph, id: &str, kind| {
        g.nodes.push(Node {
            id: NodeId::from(id),
            kind,
        })
    };
    let seg = |g: &mut RailNetworkGraph, id: &str, a: &str, b: &str| {
        g.segments.push(Segment {
            id: SegmentId::from(id),
            ends: (NodeId::from(a), NodeId::from(b)),
            dur: DurationSpec::constant(spec.profile.segment),
        })
    };
    let transition = |g: &mut RailNetworkGraph, left: Vec<String>, at: &str, right: Vec<String>| {
        for l in &left {
            for r in &right {
                let (l, r) = (SegmentId::from(l.as_str()), SegmentId::from(r.as_str()));
                let d = DurationSpec::constant(spec.profile.pair);
                g.pair_dur.insert((l.clone(), r.clone()), d.clone());
                g.pair_dur.insert((r, l), d);
            }
        }
        g.transitions.push(Transition {
            left: ids(&left),
            node: NodeId::from(at),
            right: ids(&right),
        });
    };

    node(&mut g, "S", NodeKind::Boundary);
    node(&mut g, "E", NodeKind::Boundary);
    seg(&mut g, "s0", "S", "S1");
    let mut incoming = "s0".to_string();
    for gi in 1..=ns {
        let (entry, exit) = (format!("S{gi}"), format!("E{gi}"));
        node(&mut g, &entry, NodeKind::Normal);
        node(&mut g, &exit, NodeKind::Normal);
        let mut ins = vec![];
        let mut outs = vec![];
        for k in 1..=np {
            let mid = format!("M{gi}_{k}");
            node(&mut g, &mid, NodeKind::Station);
            let (i, o) = (format!("g{gi}_in{k}"), format!("g{gi}_out{k}"));
            seg(&mut g, &i, &entry, &mid);
            seg(&mut g, &o, &mid, &exit);
            transition(&mut g, vec![i.clone()], &mid, vec![o.clone()]);
            ins.push(i);
            outs.push(o);
        }
        transition(&mut g, vec![incoming.clone()], &entry, ins);
        let (next, next_node) = if gi == ns {
            ("s_end".to_string(), "E".to_string())
        } else {
            (format!("c{gi}"), format!("S{}", gi + 1))
        };
        seg(&mut g, &next, &exit, &next_node);
        transition(&mut g, outs, &exit, vec![next.clone()]);
        incoming = next;
    }

    let trains: Vec<Train> = (1..=nt)
        .map(|i| Train::new(&format!("t{i}"), &["S", "E"]))
        .collect();
    let last = format!("t{nt}");
    let mut params = vec![ParamDecl::free("J")];
    let mut constraints = vec![ScheduleConstraint::Absolute {
        event: VisitEvent::arrival(&last, "E"),
        op: CmpOp::Le,
        bound: DurationSpec::param("J"),
    }];
    if spec.kind == ScenarioKind::Last {
        params.push(ParamDecl::free("bnd"));
        constraints.push(ScheduleConstraint::Relative {
            from: VisitEvent::departure(&last, "S"),
            to: VisitEvent::arrival(&last, "E"),
            op: CmpOp::Le,
            bound: DurationSpec::param("bnd"),
        });
    }
    ConstrainedRailwaySystem {
        graph: g,
        trains,
        constraints,
        params,
    }
}
