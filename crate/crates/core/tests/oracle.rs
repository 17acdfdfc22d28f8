use qmap_core::circuit::displacement_fixture;
use qmap_core::oracle::{
    brute_force_max_fidelity, brute_force_max_fidelity_schedule, brute_force_optimal_depth,
    brute_force_schedule, OracleOptions,
};
use qmap_core::verify::check_mapping;
use qmap_core::{build_grid, GateOp, QuantumCircuit, TechnologyParams};

fn opts(displacements: bool) -> OracleOptions {
    OracleOptions {
        displacements,
        ..OracleOptions::default()
    }
}

#[test]
fn fixture_depths() {
    let c = displacement_fixture();
    let g = build_grid(2, 3).unwrap();
    for t in [1, 2] {
        let p = TechnologyParams::with_runtimes(t, t);
        assert_eq!(brute_force_optimal_depth(&c, &g, &p, &opts(false)).unwrap(), 3 + 2 * t);
        assert_eq!(brute_force_optimal_depth(&c, &g, &p, &opts(true)).unwrap(), 3 + t);
    }
}

#[test]
fn distant_pair_on_a_line() {
    let mut c = QuantumCircuit::empty(3);
    c.push(GateOp::new("cx", &[0, 2]));
    let g = build_grid(1, 3).unwrap();
    for (t_swap, depth) in [(1, 2), (2, 3), (3, 4)] {
        let p = TechnologyParams::with_runtimes(t_swap, 1);
        assert_eq!(brute_force_optimal_depth(&c, &g, &p, &opts(true)).unwrap(), depth);
    }
}

#[test]
fn schedules_verify() {
    let c = displacement_fixture();
    let g = build_grid(2, 3).unwrap();
    for (t_swap, t_disp) in [(1, 1), (1, 2), (2, 1)] {
        let p = TechnologyParams::with_runtimes(t_swap, t_disp);
        for d in [false, true] {
            let res = brute_force_schedule(&c, &g, &p, &opts(d)).unwrap();
            let report = check_mapping(&res, &c, &g, &p);
            assert!(report.is_empty(), "{}", report.summary());
            assert_eq!(res.makespan, res.horizon);
        }
    }
}

#[test]
fn fixture_fidelity_prefers_displacements() {
    let c = displacement_fixture();
    let g = build_grid(2, 3).unwrap();
    let mut p = TechnologyParams::with_runtimes(1, 1);
    p.f_swap = 0.95;
    p.f_disp = 1.0;
    let res = brute_force_max_fidelity_schedule(&c, &g, &p, 6, &opts(true)).unwrap();
    assert!(res.swaps.is_empty());
    assert!((res.fidelity - 1.0).abs() < 1e-12);
    let swap_only = brute_force_max_fidelity(&c, &g, &p, 6, &opts(false)).unwrap();
    assert!((swap_only - 0.95 * 0.95).abs() < 1e-12);
}

#[test]
fn horizon_below_optimum_is_refused() {
    let c = displacement_fixture();
    let g = build_grid(2, 3).unwrap();
    let p = TechnologyParams::with_runtimes(1, 1);
    assert!(brute_force_max_fidelity(&c, &g, &p, 3, &opts(true)).is_err());
}

#[test]
fn wide_grid_is_refused() {
    let c = displacement_fixture();
    let g = build_grid(3, 3).unwrap();
    let p = TechnologyParams::with_runtimes(1, 1);
    assert!(brute_force_optimal_depth(&c, &g, &p, &opts(true)).is_err());
}
