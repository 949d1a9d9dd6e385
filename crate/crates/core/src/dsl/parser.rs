use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::lexer::{lex_line, Tok, Token};
use super::{ParseError, ParseErrorCode, SourceSpan};
use crate::model::*;
use crate::rational::{parse_rational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RefKind {
    Node,
    Segment,
    Train,
    Param,
}

impl RefKind {
    fn noun(self) -> &'static str {
        match self {
            RefKind::Node => "node",
            RefKind::Segment => "segment",
            RefKind::Train => "train",
            RefKind::Param => "parameter",
        }
    }
}

#[derive(Default)]
struct TrainOverrides {
    seg_dur: BTreeMap<SegmentId, DurationSpec>,
    pair_dur: BTreeMap<(SegmentId, SegmentId), DurationSpec>,
}

#[derive(Default)]
struct Builder {
    sys: ConstrainedRailwaySystem,
    overrides: BTreeMap<TrainId, TrainOverrides>,
    refs: Vec<(RefKind, String, SourceSpan)>,
    errors: Vec<ParseError>,
}

struct Line<'a> {
    toks: &'a [Token],
    pos: usize,
    end: SourceSpan,
}

type PResult<T> = Result<T, ParseError>;

fn err(span: SourceSpan, code: ParseErrorCode, message: impl Into<String>) -> ParseError {
    ParseError {
        span,
        code,
        message: message.into(),
    }
}

impl<'a> Line<'a> {
    fn next(&mut self, what: &str) -> PResult<&'a Token> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t)
            }
            None => Err(err(
                self.end,
                ParseErrorCode::UnexpectedEnd,
                format!("expected {what}, found end of line"),
            )),
        }
    }

    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn expect(&mut self, tok: Tok) -> PResult<SourceSpan> {
        let what = tok.describe();
        let t = self.next(&what)?;
        if t.tok == tok {
            Ok(t.span)
        } else {
            Err(err(
                t.span,
                ParseErrorCode::UnexpectedToken,
                format!("expected {what}, found {}", t.tok.describe()),
            ))
        }
    }

    fn word(&mut self, what: &str) -> PResult<(&'a str, SourceSpan)> {
        let t = self.next(what)?;
        match &t.tok {
            Tok::Word(w) => Ok((w.as_str(), t.span)),
            other => Err(err(
                t.span,
                ParseErrorCode::UnexpectedToken,
                format!("expected {what}, found {}", other.describe()),
            )),
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<SourceSpan> {
        let (w, span) = self.word(&format!("`{kw}`"))?;
        if w == kw {
            Ok(span)
        } else {
            Err(err(
                span,
                ParseErrorCode::UnexpectedToken,
                format!("expected `{kw}`, found `{w}`"),
            ))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        let (w, span) = self.word(what)?;
        if w.contains('.') {
            return Err(err(
                span,
                ParseErrorCode::UnexpectedToken,
                format!("`{w}` is not a valid {what}"),
            ));
        }
        Ok((w.to_string(), span))
    }

    /// A literal `a`, `a.b` or `a/b`.
    fn number(&mut self) -> PResult<(Rational, SourceSpan)> {
        let (w, span) = self.word("number")?;
        let mut text = w.to_string();
        if self.peek() == Some(&Tok::Slash) {
            self.pos += 1;
            let (d, _) = self.word("denominator")?;
            text = format!("{text}/{d}");
        }
        parse_rational(&text)
            .map(|r| (r, span))
            .ok_or_else(|| err(span, ParseErrorCode::InvalidNumber, format!("invalid number `{text}`")))
    }

    fn op(&mut self) -> PResult<CmpOp> {
        let t = self.next("comparison operator")?;
        Ok(match t.tok {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Assign => CmpOp::Eq,
            Tok::Ge => CmpOp::Ge,
            Tok::Gt => CmpOp::Gt,
            ref other => {
                return Err(err(
                    t.span,
                    ParseErrorCode::UnexpectedToken,
                    format!("expected comparison operator, found {}", other.describe()),
                ))
            }
        })
    }

    fn finish(&self) -> PResult<()> {
        match self.toks.get(self.pos) {
            None => Ok(()),
            Some(t) => Err(err(
                t.span,
                ParseErrorCode::UnexpectedToken,
                format!("unexpected trailing {}", t.tok.describe()),
            )),
        }
    }
}

fn starts_like_name(w: &str) -> bool {
    w.bytes()
        .next()
        .is_some_and(|b| b.is_ascii_alphabetic() || b == b'_')
}

impl Builder {
    fn reference(&mut self, kind: RefKind, name: &str, span: SourceSpan) {
        self.refs.push((kind, name.to_string(), span));
    }

    /// A duration or bound: numeric literal or parameter name.
    fn duration(&mut self, line: &mut Line) -> PResult<DurationSpec> {
        let starts_name = matches!(line.peek(), Some(Tok::Word(w)) if starts_like_name(w));
        if starts_name {
            let (name, span) = line.ident("parameter")?;
            self.reference(RefKind::Param, &name, span);
            Ok(DurationSpec::Parameter(ParamId(name)))
        } else {
            Ok(DurationSpec::Constant(line.number()?.0))
        }
    }

    fn event(&mut self, line: &mut Line) -> PResult<VisitEvent> {
        let (kw, span) = line.word("`arrival` or `departure`")?;
        let kind = match kw {
            "arrival" => VisitKind::Arrival,
            "departure" => VisitKind::Departure,
            _ => {
                return Err(err(
                    span,
                    ParseErrorCode::UnknownKeyword,
                    format!("expected `arrival` or `departure`, found `{kw}`"),
                ))
            }
        };
        let (train, node) = self.train_node_args(line)?;
        Ok(VisitEvent { train, node, kind })
    }

    fn train_node_args(&mut self, line: &mut Line) -> PResult<(TrainId, NodeId)> {
        line.expect(Tok::LParen)?;
        let (t, ts) = line.ident("train name")?;
        line.expect(Tok::Comma)?;
        let (n, ns) = line.ident("node id")?;
        line.expect(Tok::RParen)?;
        self.reference(RefKind::Train, &t, ts);
        self.reference(RefKind::Node, &n, ns);
        Ok((TrainId(t), NodeId(n)))
    }

    fn segment_set(&mut self, line: &mut Line) -> PResult<BTreeSet<SegmentId>> {
        line.expect(Tok::LBrace)?;
        let mut out = BTreeSet::new();
        if line.peek() == Some(&Tok::RBrace) {
            line.pos += 1;
            return Ok(out);
        }
        loop {
            let (s, span) = line.ident("segment id")?;
            self.reference(RefKind::Segment, &s, span);
            out.insert(SegmentId(s));
            let t = line.next("`,` or `}`")?;
            match t.tok {
                Tok::Comma => continue,
                Tok::RBrace => break,
                ref other => {
                    return Err(err(
                        t.span,
                        ParseErrorCode::UnexpectedToken,
                        format!("expected `,` or `}}`, found {}", other.describe()),
                    ))
                }
            }
        }
        Ok(out)
    }

    /// `a -> b` or `a <-> b`, returning the ordered pairs it denotes.
    fn pair(&mut self, line: &mut Line) -> PResult<Vec<(SegmentId, SegmentId)>> {
        let (a, sa) = line.ident("segment id")?;
        let t = line.next("`->` or `<->`")?;
        let both = match t.tok {
            Tok::Arrow => false,
            Tok::BiArrow => true,
            ref other => {
                return Err(err(
                    t.span,
                    ParseErrorCode::UnexpectedToken,
                    format!("expected `->` or `<->`, found {}", other.describe()),
                ))
            }
        };
        let (b, sb) = line.ident("segment id")?;
        self.reference(RefKind::Segment, &a, sa);
        self.reference(RefKind::Segment, &b, sb);
        let (a, b) = (SegmentId(a), SegmentId(b));
        let mut out = vec![(a.clone(), b.clone())];
        if both && a != b {
            out.push((b, a));
        }
        Ok(out)
    }

    fn statement(&mut self, line: &mut Line) -> PResult<()> {
        let (kw, kw_span) = line.word("statement keyword")?;
        match kw {
            "param" => self.param(line),
            "node" => self.node(line),
            "segment" => self.segment(line),
            "pairdur" => {
                let pairs = self.pair(line)?;
                line.keyword("dur")?;
                let d = self.duration(line)?;
                line.finish()?;
                for p in pairs {
                    if self.sys.graph.pair_dur.contains_key(&p) {
                        return Err(err(
                            kw_span,
                            ParseErrorCode::DuplicateDuration,
                            format!("pair {} -> {} already has a duration", p.0, p.1),
                        ));
                    }
                    self.sys.graph.pair_dur.insert(p, d.clone());
                }
                Ok(())
            }
            "transition" => {
                line.keyword("at")?;
                let (n, ns) = line.ident("node id")?;
                self.reference(RefKind::Node, &n, ns);
                line.expect(Tok::Colon)?;
                let left = self.segment_set(line)?;
                line.expect(Tok::Pipe)?;
                let right = self.segment_set(line)?;
                line.finish()?;
                self.sys.graph.transitions.push(Transition {
                    left,
                    node: NodeId(n),
                    right,
                });
                Ok(())
            }
            "train" => self.train(line),
            "constraint" => self.constraint(line),
            other => Err(err(
                kw_span,
                ParseErrorCode::UnknownKeyword,
                format!("unknown statement `{other}`"),
            )),
        }
    }

    fn param(&mut self, line: &mut Line) -> PResult<()> {
        let (name, span) = line.ident("parameter name")?;
        if !starts_like_name(&name) {
            return Err(err(
                span,
                ParseErrorCode::UnexpectedToken,
                "parameter names must start with a letter or `_`",
            ));
        }
        let mut decl = ParamDecl {
            id: ParamId(name),
            lower: None,
            upper: None,
        };
        if line.peek().is_some() {
            line.keyword("in")?;
            line.expect(Tok::LBracket)?;
            decl.lower = Some(line.number()?.0);
            line.expect(Tok::Comma)?;
            decl.upper = Some(line.number()?.0);
            line.expect(Tok::RBracket)?;
        }
        line.finish()?;
        if self.sys.params.iter().any(|p| p.id == decl.id) {
            return Err(err(
                span,
                ParseErrorCode::DuplicateId,
                format!("parameter {} declared twice", decl.id),
            ));
        }
        self.sys.params.push(decl);
        Ok(())
    }

    fn node(&mut self, line: &mut Line) -> PResult<()> {
        let (id, span) = line.ident("node id")?;
        let (kind, kspan) = line.word("node kind")?;
        let kind = match kind {
            "boundary" => NodeKind::Boundary,
            "station" => NodeKind::Station,
            "normal" => NodeKind::Normal,
            other => {
                return Err(err(
                    kspan,
                    ParseErrorCode::UnknownKeyword,
                    format!("unknown node kind `{other}`"),
                ))
            }
        };
        line.finish()?;
        let id = NodeId(id);
        if self.sys.graph.node(&id).is_some() {
            return Err(err(
                span,
                ParseErrorCode::DuplicateId,
                format!("node {id} declared twice"),
            ));
        }
        self.sys.graph.nodes.push(Node { id, kind });
        Ok(())
    }

    fn segment(&mut self, line: &mut Line) -> PResult<()> {
        let (id, span) = line.ident("segment id")?;
        line.expect(Tok::Assign)?;
        let (a, sa) = line.ident("node id")?;
        line.expect(Tok::DashDash)?;
        let (b, sb) = line.ident("node id")?;
        line.keyword("dur")?;
        let dur = self.duration(line)?;
        line.finish()?;
        if a == b {
            return Err(err(
                sb,
                ParseErrorCode::SegSelfLoop,
                format!("segment {id} connects node {a} to itself"),
            ));
        }
        let id = SegmentId(id);
        if self.sys.graph.segment(&id).is_some() {
            return Err(err(
                span,
                ParseErrorCode::DuplicateId,
                format!("segment {id} declared twice"),
            ));
        }
        self.reference(RefKind::Node, &a, sa);
        self.reference(RefKind::Node, &b, sb);
        self.sys.graph.segments.push(Segment {
            id,
            ends: (NodeId(a), NodeId(b)),
            dur,
        });
        Ok(())
    }

    fn train(&mut self, line: &mut Line) -> PResult<()> {
        let (name, span) = line.ident("train name")?;
        let (kw, kspan) = line.word("`connection`, `segdur` or `pairdur`")?;
        let id = TrainId(name);
        match kw {
            "connection" => {
                line.expect(Tok::LBracket)?;
                let mut nodes = Vec::new();
                if line.peek() != Some(&Tok::RBracket) {
                    loop {
                        let (n, ns) = line.ident("node id")?;
                        self.reference(RefKind::Node, &n, ns);
                        nodes.push(NodeId(n));
                        if line.peek() == Some(&Tok::Comma) {
                            line.pos += 1;
                        } else {
                            break;
                        }
                    }
                }
                line.expect(Tok::RBracket)?;
                line.finish()?;
                if self.sys.train(&id).is_some() {
                    return Err(err(
                        span,
                        ParseErrorCode::DuplicateId,
                        format!("train {id} declared twice"),
                    ));
                }
                self.sys.trains.push(Train {
                    id,
                    seg_dur: BTreeMap::new(),
                    pair_dur: BTreeMap::new(),
                    connection: nodes,
                });
            }
            "segdur" => {
                let (s, ss) = line.ident("segment id")?;
                line.keyword("dur")?;
                let d = self.duration(line)?;
                line.finish()?;
                self.reference(RefKind::Train, &id.0, span);
                self.reference(RefKind::Segment, &s, ss);
                let ov = self.overrides.entry(id.clone()).or_default();
                if ov.seg_dur.insert(SegmentId(s.clone()), d).is_some() {
                    return Err(err(
                        ss,
                        ParseErrorCode::DuplicateDuration,
                        format!("train {id} already overrides segment {s}"),
                    ));
                }
            }
            "pairdur" => {
                let pairs = self.pair(line)?;
                line.keyword("dur")?;
                let d = self.duration(line)?;
                line.finish()?;
                self.reference(RefKind::Train, &id.0, span);
                let ov = self.overrides.entry(id.clone()).or_default();
                for p in pairs {
                    if ov.pair_dur.contains_key(&p) {
                        return Err(err(
                            kspan,
                            ParseErrorCode::DuplicateDuration,
                            format!("train {id} already overrides pair {} -> {}", p.0, p.1),
                        ));
                    }
                    ov.pair_dur.insert(p, d.clone());
                }
            }
            other => {
                return Err(err(
                    kspan,
                    ParseErrorCode::UnknownKeyword,
                    format!("unknown train attribute `{other}`"),
                ))
            }
        }
        Ok(())
    }

    fn constraint(&mut self, line: &mut Line) -> PResult<()> {
        let (kind, kspan) = line.word("`order`, `abs` or `rel`")?;
        let c = match kind {
            "order" => {
                let first = self.event(line)?;
                let op = line.op()?;
                let second = self.event(line)?;
                ScheduleConstraint::Ordering { first, second, op }
            }
            "abs" => {
                let event = self.event(line)?;
                let op = line.op()?;
                let bound = self.duration(line)?;
                ScheduleConstraint::Absolute { event, op, bound }
            }
            "rel" => {
                let (form, fspan) = line.word("`transfer` or `wait`")?;
                let (from, to) = match form {
                    "transfer" => {
                        line.expect(Tok::LParen)?;
                        let from = self.event(line)?;
                        line.expect(Tok::Comma)?;
                        let to = self.event(line)?;
                        line.expect(Tok::RParen)?;
                        (from, to)
                    }
                    "wait" => {
                        let (train, node) = self.train_node_args(line)?;
                        (
                            VisitEvent {
                                train: train.clone(),
                                node: node.clone(),
                                kind: VisitKind::Arrival,
                            },
                            VisitEvent {
                                train,
                                node,
                                kind: VisitKind::Departure,
                            },
                        )
                    }
                    other => {
                        return Err(err(
                            fspan,
                            ParseErrorCode::UnknownKeyword,
                            format!("expected `transfer` or `wait`, found `{other}`"),
                        ))
                    }
                };
                let op = line.op()?;
                let bound = self.duration(line)?;
                ScheduleConstraint::Relative {
                    from,
                    to,
                    op,
                    bound,
                }
            }
            other => {
                return Err(err(
                    kspan,
                    ParseErrorCode::UnknownKeyword,
                    format!("unknown constraint kind `{other}`"),
                ))
            }
        };
        line.finish()?;
        self.sys.constraints.push(c);
        Ok(())
    }

    fn resolve(mut self) -> Result<ConstrainedRailwaySystem, Vec<ParseError>> {
        let nodes: HashSet<&str> = self.sys.graph.nodes.iter().map(|n| n.id.as_str()).collect();
        let segs: HashSet<&str> = self
            .sys
            .graph
            .segments
            .iter()
            .map(|s| s.id.as_str())
            .collect();
        let trains: HashSet<&str> = self.sys.trains.iter().map(|t| t.id.as_str()).collect();
        let params: HashSet<&str> = self.sys.params.iter().map(|p| p.id.as_str()).collect();
        for (kind, name, span) in &self.refs {
            let known = match kind {
                RefKind::Node => nodes.contains(name.as_str()),
                RefKind::Segment => segs.contains(name.as_str()),
                RefKind::Train => trains.contains(name.as_str()),
                RefKind::Param => params.contains(name.as_str()),
            };
            if !known {
                self.errors.push(err(
                    *span,
                    ParseErrorCode::UnknownReference,
                    format!("unknown {} `{name}`", kind.noun()),
                ));
            }
        }
        if !self.errors.is_empty() {
            self.errors.sort_by_key(|e| e.span);
            return Err(self.errors);
        }
        for (id, ov) in std::mem::take(&mut self.overrides) {
            if let Some(t) = self.sys.trains.iter_mut().find(|t| t.id == id) {
                t.seg_dur = ov.seg_dur;
                t.pair_dur = ov.pair_dur;
            }
        }
        Ok(self.sys)
    }
}

/// Parses a model file. Only references are resolved here; semantic checks
/// belong to [`crate::model::validate_system`].
pub fn parse_system(text: &str) -> Result<ConstrainedRailwaySystem, Vec<ParseError>> {
    let mut b = Builder::default();
    let mut offset = 0;
    for (i, raw) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let content = raw.strip_suffix('\r').unwrap_or(raw);
        match lex_line(content, line_no, offset) {
            Ok(toks) if toks.is_empty() => {}
            Ok(toks) => {
                let end = SourceSpan {
                    line: line_no,
                    column: content.chars().count() + 1,
                    offset: offset + content.len(),
                    len: 0,
                };
                let mut line = Line {
                    toks: &toks,
                    pos: 0,
                    end,
                };
                if let Err(e) = b.statement(&mut line) {
                    b.errors.push(e);
                }
            }
            Err(e) => b.errors.push(e),
        }
        offset += raw.len() + 1;
    }
    b.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
# one segment, one train
param pR in [0, 100]

node A boundary
node B boundary

segment 1 = A -- B dur 5

train t connection [A, B]

constraint abs arrival(t, B) <= pR
# end
";

    #[test]
    fn minimal_file() {
        assert_eq!(MINIMAL.lines().count(), 12);
        let sys = parse_system(MINIMAL).unwrap();
        assert_eq!(sys.graph.nodes.len(), 2);
        assert_eq!(sys.graph.segments.len(), 1);
        assert_eq!(sys.trains.len(), 1);
        assert_eq!(sys.params[0].upper, Some(Rational::from_integer(100)));
        assert!(validate_system(&sys).is_empty());
    }

    #[test]
    fn self_loop_segment() {
        let errs = parse_system("segment 1 = A -- A dur 5").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].code, ParseErrorCode::SegSelfLoop);
        assert_eq!(errs[0].span.line, 1);
    }

    #[test]
    fn forward_references_resolve() {
        let text = "\
train g connection [A, B]
train g segdur 1 dur 7
segment 1 = A -- B dur 5
node A boundary
node B boundary
";
        let sys = parse_system(text).unwrap();
        assert_eq!(
            sys.trains[0].seg_dur[&SegmentId::from("1")],
            DurationSpec::constant(7)
        );
    }

    #[test]
    fn unknown_reference_points_at_token() {
        let text = "node A boundary\nsegment 1 = A -- Zed dur 5\n";
        let errs = parse_system(text).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].code, ParseErrorCode::UnknownReference);
        let sp = errs[0].span;
        assert_eq!(&text[sp.offset..sp.offset + sp.len], "Zed");
        assert_eq!((sp.line, sp.column), (2, 18));
    }

    #[test]
    fn duplicates() {
        let errs = parse_system("node A boundary\nnode A station\n").unwrap_err();
        assert_eq!(errs[0].code, ParseErrorCode::DuplicateId);
        assert_eq!(errs[0].span.line, 2);

        let text = "node A boundary\nnode B normal\nsegment 1 = A -- B dur 1\npairdur 1 <-> 1 dur 2\npairdur 1 -> 1 dur 3\n";
        let errs = parse_system(text).unwrap_err();
        assert_eq!(errs[0].code, ParseErrorCode::DuplicateDuration);
    }

    #[test]
    fn symmetric_pair_sugar() {
        let text = "node A boundary\nnode N normal\nnode B boundary\nsegment 1 = A -- N dur 1\nsegment 2 = N -- B dur 1\npairdur 1 <-> 2 dur 3/2\n";
        let sys = parse_system(text).unwrap();
        assert_eq!(sys.graph.pair_dur.len(), 2);
        assert_eq!(
            sys.graph.pair_dur[&("2".into(), "1".into())],
            DurationSpec::Constant(Rational::new(3, 2))
        );
    }

    #[test]
    fn constraint_forms() {
        let text = "\
param p
node A boundary
node 3 station
node D boundary
segment 1 = A -- 3 dur 1
segment 2 = 3 -- D dur 1
train g connection [A, 3]
train r connection [D, A]
constraint order departure(r, D) <= departure(g, A)
constraint abs arrival(r, A) < 0.5
constraint rel transfer(departure(r, D), arrival(r, A)) <= 10
constraint rel wait(g, 3) >= p
";
        let sys = parse_system(text).unwrap();
        assert_eq!(sys.constraints.len(), 4);
        assert_eq!(
            sys.constraints[3],
            ScheduleConstraint::wait("g", "3", CmpOp::Ge, DurationSpec::param("p"))
        );
        assert_eq!(
            sys.constraints[1].bound(),
            Some(&DurationSpec::Constant(Rational::new(1, 2)))
        );
    }

    #[test]
    fn syntax_errors_have_spans() {
        for (text, code) in [
            ("node A", ParseErrorCode::UnexpectedEnd),
            ("node A terminal", ParseErrorCode::UnknownKeyword),
            ("frobnicate", ParseErrorCode::UnknownKeyword),
            ("param p in [1, x]", ParseErrorCode::InvalidNumber),
            ("node A boundary extra", ParseErrorCode::UnexpectedToken),
            ("param p in [1/0, 2]", ParseErrorCode::InvalidNumber),
        ] {
            let errs = parse_system(text).unwrap_err();
            assert_eq!(errs[0].code, code, "{text}");
            let sp = errs[0].span;
            assert!(sp.offset <= text.len(), "{text}");
        }
    }

    #[test]
    fn errors_continue_past_bad_lines() {
        let errs = parse_system("node A\nnode B boundary\nsegment 1 = A -- A dur 1\n").unwrap_err();
        assert_eq!(errs.len(), 2);
    }
}
