//! End-to-end runs of the library: parse, translate, synthesize.

use std::path::PathBuf;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use railsynth::dsl::{parse_system, render_system};
use railsynth::pta::{check_wellformed, Valuation};
use railsynth::scenario::{gen_serial_parallel, ScenarioKind, ScenarioSpec};
use railsynth::synth::{check_concrete, ef_synth, Order, Status, SynthOptions};
use railsynth::translate::translate_system;
use railsynth::{ConstrainedRailwaySystem, Rational};

fn fixture(name: &str) -> ConstrainedRailwaySystem {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    let text = std::fs::read_to_string(&path).unwrap();
    parse_system(&text).unwrap()
}

fn synth(sys: &ConstrainedRailwaySystem, opts: &SynthOptions) -> (Status, String) {
    let problem = translate_system(sys).unwrap();
    let out = ef_synth(&problem, opts).unwrap();
    (out.status, out.result.to_string())
}

#[test]
fn fixtures_round_trip_through_text() {
    for name in ["fig1.rail", "fig1_pr.rail", "fig1_p2p7.rail", "one_segment.rail"] {
        let sys = fixture(name);
        let again = parse_system(&render_system(&sys)).unwrap();
        assert_eq!(again.normalized(), sys.normalized(), "{name}");
    }
}

#[test]
fn known_results() {
    let opts = SynthOptions::default();
    assert_eq!(synth(&fixture("one_segment.rail"), &opts), (Status::Complete, "pR >= 5".into()));
    assert_eq!(synth(&fixture("fig1.rail"), &opts), (Status::Complete, "true".into()));
    assert_eq!(synth(&fixture("fig1_pr.rail"), &opts), (Status::Complete, "pR >= 10".into()));
}

#[test]
fn merging_does_not_change_the_result() {
    let sys = fixture("fig1_pr.rail");
    let merged = synth(&sys, &SynthOptions::default());
    let plain = synth(&sys, &SynthOptions { merge: false, ..Default::default() });
    assert_eq!(merged, plain);
    let dfs = synth(&sys, &SynthOptions { merge: false, order: Order::Dfs, ..Default::default() });
    assert_eq!(merged, dfs);
}

#[test]
fn tight_state_limit_reports_bounded() {
    let sys = fixture("fig1_pr.rail");
    let opts = SynthOptions { max_states: 50, ..Default::default() };
    assert_eq!(synth(&sys, &opts).0, Status::Bounded);
    let strict = SynthOptions { strict: true, ..opts };
    let err = ef_synth(&translate_system(&sys).unwrap(), &strict).unwrap_err();
    assert!(err.to_string().starts_with("ERR_LIMIT"));
}

/// Membership in the synthesized set agrees with a run of the engine on
/// the concrete valuation, including non-integer values.
#[test]
fn concrete_checks_agree_with_synthesis() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for (name, ranges) in [
        ("fig1_pr.rail", vec![("pR", 40)]),
        ("fig1_p2p7.rail", vec![("p2", 12), ("p7", 12), ("pR", 40)]),
    ] {
        let problem = translate_system(&fixture(name)).unwrap();
        let opts = SynthOptions::default();
        let set = ef_synth(&problem, &opts).unwrap().result;
        for _ in 0..50 {
            let v: Valuation = ranges
                .iter()
                .map(|&(p, hi)| (p.into(), Rational::new(rng.gen_range(0..=2 * hi), 2)))
                .collect();
            let concrete = check_concrete(&problem, &v, &opts).unwrap();
            assert_eq!(set.contains(&v), concrete, "{name} at {v:?}");
        }
    }
}

#[test]
fn scenario_component_counts() {
    for (ns, nt, kind, automata, clocks, params) in [
        (1, 1, ScenarioKind::Nop, 2, 2, 1),
        (2, 2, ScenarioKind::Nop, 3, 3, 1),
        (2, 2, ScenarioKind::Last, 3, 4, 2),
        (2, 3, ScenarioKind::Last, 4, 5, 2),
    ] {
        let sys = gen_serial_parallel(&ScenarioSpec::new(ns, ns, nt, kind));
        let problem = translate_system(&sys).unwrap();
        let net = &problem.network;
        assert!(check_wellformed(net).is_empty());
        let got = (net.components.len(), net.clocks.len(), net.params.len());
        assert_eq!(got, (automata, clocks, params), "{kind} {ns}/{nt}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Raising the deadline never loses feasibility.
    #[test]
    fn one_segment_threshold(d in 0i64..20, v in 0i64..40) {
        let text = format!(
            "param pR\nnode A boundary\nnode B boundary\nsegment 1 = A -- B dur {d}\n\
             train t connection [A, B]\nconstraint abs arrival(t, B) <= pR\n"
        );
        let problem = translate_system(&parse_system(&text).unwrap()).unwrap();
        let out = ef_synth(&problem, &SynthOptions::default()).unwrap();
        let val: Valuation = [("pR".into(), Rational::from_integer(v))].into();
        prop_assert_eq!(out.result.contains(&val), v >= d);
    }
}
