use railsynth::dsl::parse_system;
use railsynth::model::ConstrainedRailwaySystem;
use railsynth::pta::Valuation;
use railsynth::synth::{Mutation, SynthOptions};
use railsynth::Rational;
use railsynth_oracle::*;

fn sys(text: &str) -> ConstrainedRailwaySystem {
    parse_system(text).unwrap_or_else(|e| panic!("{e:?}"))
}

fn val(pairs: &[(&str, i64)]) -> Valuation {
    pairs
        .iter()
        .map(|&(p, x)| (p.into(), Rational::from_integer(x)))
        .collect()
}

fn fixture(name: &str) -> ConstrainedRailwaySystem {
    let path = format!("{}/../../data/{name}.rail", env!("CARGO_MANIFEST_DIR"));
    sys(&std::fs::read_to_string(path).unwrap())
}

const ONE_SEGMENT: &str = "
node A boundary
node B boundary
segment 1 = A -- B dur 5
train t connection [A, B]
";

#[test]
fn one_segment_deadline() {
    let s = sys(&format!("{ONE_SEGMENT}constraint abs arrival(t, B) <= 5\n"));
    assert!(integer_time_reachable(&s, &Valuation::new(), None).unwrap());
    let s = sys(&format!("{ONE_SEGMENT}constraint abs arrival(t, B) <= 4\n"));
    assert!(!integer_time_reachable(&s, &Valuation::new(), None).unwrap());
}

/// Two trains over one segment of duration 3: the second can only enter
/// once the first has left, so both arrive by 6 at the earliest.
fn shared(deadline: i64) -> ConstrainedRailwaySystem {
    sys(&format!(
        "node A boundary
node B boundary
segment 1 = A -- B dur 3
train u connection [A, B]
train w connection [A, B]
constraint abs arrival(u, B) <= {deadline}
constraint abs arrival(w, B) <= {deadline}
"
    ))
}

#[test]
fn shared_segment_contention() {
    let v = Valuation::new();
    assert!(!integer_time_reachable(&shared(5), &v, None).unwrap());
    assert!(integer_time_reachable(&shared(6), &v, None).unwrap());
    assert!(integer_time_reachable(&shared(9), &v, None).unwrap());
}

#[test]
fn ordering_forbids_the_only_schedule() {
    let base = "node A boundary
node B boundary
segment 1 = A -- B dur 3
train blue connection [A, B]
train green connection [A, B]
constraint abs arrival(green, B) <= 3
constraint abs arrival(blue, B) <= 6
";
    let v = Valuation::new();
    assert!(integer_time_reachable(&sys(base), &v, None).unwrap());
    let ordered = format!("{base}constraint order departure(blue, A) <= departure(green, A)\n");
    assert!(!integer_time_reachable(&sys(&ordered), &v, None).unwrap());
}

#[test]
fn strict_ordering_uses_half_units() {
    let base = "node A boundary
node B boundary
node C boundary
node D boundary
segment 1 = A -- B dur 3
segment 2 = C -- D dur 3
train blue connection [A, B]
train green connection [C, D]
constraint order departure(blue, A) < departure(green, C)
";
    let v = Valuation::new();
    let tight = sys(&format!("{base}constraint abs arrival(green, D) <= 3\n"));
    let r = search(&tight, &v, None).unwrap();
    assert!(r.half_units);
    assert!(!r.feasible);
    let loose = sys(&format!("{base}constraint abs arrival(green, D) <= 4\n"));
    assert!(integer_time_reachable(&loose, &v, None).unwrap());
}

const STATION: &str = "node A boundary
node S station
node B boundary
segment 1 = A -- S dur 2
segment 2 = S -- B dur 2
transition at S : {1} | {2}
pairdur 1 <-> 2 dur 1
train t connection [A, S, B]
constraint rel wait(t, S) >= 20
";

#[test]
fn default_horizon_covers_lower_bounds() {
    let s = sys(&format!("{STATION}constraint abs arrival(t, B) <= 30\n"));
    let v = Valuation::new();
    // 4 + 2 + 30 + 1
    assert_eq!(default_horizon(&s, &v).unwrap(), 37);
    let r = search(&s, &v, None).unwrap();
    assert!(r.feasible && !r.saturated);
    let exact = sys(&format!("{STATION}constraint abs arrival(t, B) <= 24\n"));
    assert!(integer_time_reachable(&exact, &v, None).unwrap());
    let late = sys(&format!("{STATION}constraint abs arrival(t, B) <= 23\n"));
    let r = search(&late, &v, None).unwrap();
    assert!(!r.feasible && !r.saturated);
}

#[test]
fn short_horizon_saturates() {
    let s = sys(STATION);
    let v = Valuation::new();
    let r = search(&s, &v, Some(10)).unwrap();
    assert!(!r.feasible);
    assert!(r.saturated);
    assert!(integer_time_reachable(&s, &v, Some(24)).unwrap());
    assert!(!integer_time_reachable(&s, &v, Some(23)).unwrap());
}

#[test]
fn waiting_at_the_start_is_free() {
    let s = sys(&format!(
        "{ONE_SEGMENT}constraint abs departure(t, A) >= 40\nconstraint abs arrival(t, B) <= 45\n"
    ));
    assert!(integer_time_reachable(&s, &Valuation::new(), None).unwrap());
}

#[test]
fn errors() {
    let s = sys("node A boundary
node B boundary
segment 1 = A -- B dur 5/2
train t connection [A, B]
");
    assert!(matches!(
        search(&s, &Valuation::new(), None),
        Err(OracleError::NonInteger(_))
    ));
    let s = fixture("one_segment");
    assert!(matches!(
        search(&s, &Valuation::new(), None),
        Err(OracleError::MissingParam(_))
    ));
    let half: Valuation = [("pR".into(), Rational::new(9, 2))].into_iter().collect();
    assert!(matches!(search(&s, &half, None), Err(OracleError::NonInteger(_))));
}

#[test]
fn parametric_duration_takes_the_larger_value() {
    let s = sys("param p
node A boundary
node B boundary
segment 1 = A -- B dur p
train t connection [A, B]
train t segdur 1 dur 3
constraint abs arrival(t, B) <= 4
");
    for p in 0..=10 {
        let want = p.max(3) <= 4;
        assert_eq!(integer_time_reachable(&s, &val(&[("p", p)]), None).unwrap(), want, "p = {p}");
    }
}

#[test]
fn grid_one_segment() {
    let r = grid_compare(
        &fixture("one_segment"),
        &[GridAxis::new("pR", 0, 10, 1)],
        &SynthOptions::default(),
    )
    .unwrap();
    assert_eq!(r.points, 11);
    assert!(r.is_clean(), "{:?}", r.disagreements);
    assert_eq!(r.result, "pR >= 5");
}

#[test]
fn grid_detects_dropped_guards() {
    let opts = SynthOptions {
        mutation: Mutation::DropGuardIntersection,
        ..SynthOptions::default()
    };
    let r = grid_compare(&fixture("one_segment"), &[GridAxis::new("pR", 0, 10, 1)], &opts).unwrap();
    assert!(!r.is_clean());
}

#[test]
fn grid_requires_every_axis() {
    assert!(matches!(
        grid_compare(&fixture("one_segment"), &[], &SynthOptions::default()),
        Err(GridError::MissingAxis(_))
    ));
}
