mod support;

use std::collections::BTreeSet;

use qmap_core::circuit::displacement_fixture;
use qmap_core::oracle::{brute_force_schedule, OracleOptions};
use qmap_core::verify::{check_mapping, ViolationCode};
use qmap_core::{build_grid, GridTopology, MappingResult, QuantumCircuit, TechnologyParams};

fn fixture_schedules() -> (QuantumCircuit, GridTopology, TechnologyParams, MappingResult, MappingResult) {
    let c = displacement_fixture();
    let g = build_grid(2, 3).unwrap();
    let p = TechnologyParams::with_runtimes(1, 1);
    let run = |displacements| {
        let opts = OracleOptions {
            displacements,
            ..OracleOptions::default()
        };
        brute_force_schedule(&c, &g, &p, &opts).unwrap()
    };
    let (disp, swap) = (run(true), run(false));
    (c, g, p, disp, swap)
}

#[test]
fn unmutated_schedules_pass() {
    let (c, g, p, disp, swap) = fixture_schedules();
    assert!(!disp.displacements.is_empty());
    assert!(!swap.swaps.is_empty());
    for res in [&disp, &swap] {
        let report = check_mapping(res, &c, &g, &p);
        assert!(report.is_empty(), "{}", report.summary());
    }
}

#[test]
fn every_mutant_is_caught() {
    let (c, g, p, disp, swap) = fixture_schedules();
    let mutants = support::fixture_mutants(&disp, &swap);
    assert!(mutants.len() >= 8);
    let mut seen = BTreeSet::new();
    for m in &mutants {
        let report = check_mapping(&m.result, &c, &g, &p);
        assert!(
            report.has(m.expected),
            "{}: expected {:?}, got {:?}",
            m.name,
            m.expected,
            report.codes()
        );
        seen.insert(m.expected);
    }
    assert_eq!(seen.len(), 10, "catalog should cover every violation code");
}

#[test]
fn json_round_trip_keeps_verdict() {
    let (c, g, p, disp, _) = fixture_schedules();
    let back = MappingResult::from_json(&disp.to_json()).unwrap();
    assert_eq!(back, disp);
    assert!(check_mapping(&back, &c, &g, &p).is_empty());
}

#[test]
fn wrong_grid_is_a_record_mismatch() {
    let (c, _, p, disp, _) = fixture_schedules();
    let g = build_grid(3, 2).unwrap();
    assert!(check_mapping(&disp, &c, &g, &p).has(ViolationCode::RecordMismatch));
}

#[test]
fn stale_displacement_list_is_a_record_mismatch() {
    let (c, g, p, mut disp, _) = fixture_schedules();
    disp.displacements.pop();
    assert!(check_mapping(&disp, &c, &g, &p).has(ViolationCode::RecordMismatch));
}
