use crate::model::*;
use crate::rational::format_rational;

fn event(e: &VisitEvent) -> String {
    format!("{}({}, {})", e.kind.keyword(), e.train, e.node)
}

fn constraint(c: &ScheduleConstraint) -> String {
    match c {
        ScheduleConstraint::Ordering { first, second, op } => {
            format!("constraint order {} {op} {}", event(first), event(second))
        }
        ScheduleConstraint::Absolute { event: e, op, bound } => {
            format!("constraint abs {} {op} {bound}", event(e))
        }
        ScheduleConstraint::Relative {
            from,
            to,
            op,
            bound,
        } => {
            let is_wait = from.train == to.train
                && from.node == to.node
                && from.kind == VisitKind::Arrival
                && to.kind == VisitKind::Departure;
            if is_wait {
                format!("constraint rel wait({}, {}) {op} {bound}", from.train, from.node)
            } else {
                format!(
                    "constraint rel transfer({}, {}) {op} {bound}",
                    event(from),
                    event(to)
                )
            }
        }
    }
}

fn seg_list<'a>(it: impl IntoIterator<Item = &'a SegmentId>) -> String {
    it.into_iter()
        .map(|s| s.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Renders a system in canonical form: sections in a fixed order, entries
/// sorted, parameters in declaration order. Parsing the output yields a
/// system equal to the input up to [`ConstrainedRailwaySystem::normalized`].
pub fn render_system(sys: &ConstrainedRailwaySystem) -> String {
    let sys = sys.normalized();
    let mut out = String::from("# railsynth model\n");
    let section = |out: &mut String, lines: Vec<String>| {
        if !lines.is_empty() {
            out.push('\n');
            for l in lines {
                out.push_str(&l);
                out.push('\n');
            }
        }
    };

    section(
        &mut out,
        sys.params
            .iter()
            .map(|p| match (p.lower, p.upper) {
                (Some(l), Some(u)) => format!(
                    "param {} in [{}, {}]",
                    p.id,
                    format_rational(&l),
                    format_rational(&u)
                ),
                // half-open boxes have no syntax; these come only from code
                (Some(l), None) => format!("param {} in [{}, {}]", p.id, format_rational(&l), i64::MAX),
                (None, Some(u)) => format!("param {} in [0, {}]", p.id, format_rational(&u)),
                (None, None) => format!("param {}", p.id),
            })
            .collect(),
    );
    section(
        &mut out,
        sys.graph
            .nodes
            .iter()
            .map(|n| format!("node {} {}", n.id, n.kind.keyword()))
            .collect(),
    );
    section(
        &mut out,
        sys.graph
            .segments
            .iter()
            .map(|s| format!("segment {} = {} -- {} dur {}", s.id, s.ends.0, s.ends.1, s.dur))
            .collect(),
    );
    section(
        &mut out,
        sys.graph
            .pair_dur
            .iter()
            .map(|((a, b), d)| format!("pairdur {a} -> {b} dur {d}"))
            .collect(),
    );
    section(
        &mut out,
        sys.graph
            .transitions
            .iter()
            .map(|t| {
                format!(
                    "transition at {} : {{{}}} | {{{}}}",
                    t.node,
                    seg_list(&t.left),
                    seg_list(&t.right)
                )
            })
            .collect(),
    );
    for t in &sys.trains {
        let mut lines = Vec::new();
        let conn: Vec<&str> = t.connection.iter().map(|n| n.as_str()).collect();
        lines.push(format!("train {} connection [{}]", t.id, conn.join(", ")));
        for (s, d) in &t.seg_dur {
            lines.push(format!("train {} segdur {s} dur {d}", t.id));
        }
        for ((a, b), d) in &t.pair_dur {
            lines.push(format!("train {} pairdur {a} -> {b} dur {d}", t.id));
        }
        section(&mut out, lines);
    }
    section(&mut out, sys.constraints.iter().map(constraint).collect());
    out
}
