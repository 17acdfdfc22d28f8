//! Helpers shared by the integration tests: seeded random circuits,
//! hand-built assignments for the displacement model, and a catalog of
//! single-field schedule mutations with the violation each must raise.

#![allow(dead_code)]

use std::collections::HashMap;

use qmap_core::displacement::{edge_enabled, encode_displacement_model};
use qmap_core::mapping::SwapEvent;
use qmap_core::model::{names, Value};
use qmap_core::oracle::OracleOptions;
use qmap_core::verify::ViolationCode;
use qmap_core::{extend_topology, Edge, Error, GateOp, GridTopology, MappingResult, QuantumCircuit, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 2-4 qubits, 2-5 CX gates on random distinct operand pairs.
pub fn random_cx_circuit(seed: u64) -> QuantumCircuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=4);
    let k = rng.gen_range(2..=5);
    let mut c = QuantumCircuit::empty(n);
    for _ in 0..k {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        c.push(GateOp::new("cx", &[a, b]));
    }
    c
}

/// Grid and runtimes cycled by seed so a run of consecutive seeds covers
/// 2x2 and 2x3 with every (t_swap, t_disp) in {1,2}^2.
pub fn instance_shape(seed: u64) -> ((usize, usize), (usize, usize)) {
    let grid = if seed % 2 == 0 { (2, 2) } else { (2, 3) };
    let runtimes = ((seed / 2 % 2 + 1) as usize, (seed / 4 % 2 + 1) as usize);
    (grid, runtimes)
}

pub fn oracle(displacements: bool) -> OracleOptions {
    OracleOptions {
        displacements,
        ..OracleOptions::default()
    }
}

/// `None` when the exhaustive search gave up on its state budget; any other
/// error is a bug.
pub fn certified<T>(r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(Error::Capacity(_)) => None,
        Err(e) => panic!("oracle failed: {e}"),
    }
}

/// Every vector over `[lo, hi]` of length `n`.
pub fn all_vectors(n: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (lo..=hi).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// A two-step assignment: zero offsets at step 1, `offsets` at step 2, and
/// enable/busy flags derived from the semantic helpers.
pub fn assignment(g: &GridTopology, offsets: &[i64]) -> HashMap<String, Value> {
    let ext = extend_topology(g);
    let zero = vec![0; g.num_sites()];
    let mut a = HashMap::new();
    for (t, step) in [(1, &zero[..]), (2, offsets)] {
        for p in 0..g.num_sites() {
            a.insert(names::eta(p, t), Value::Int(step[p]));
        }
        for &e in ext.ext_edges() {
            a.insert(names::en(e.0, e.1, t), Value::Bool(edge_enabled(g, step, e)));
        }
    }
    for p in 0..g.num_sites() {
        a.insert(names::dbusy(p, 1), Value::Bool(offsets[p] != 0));
    }
    a
}

pub fn model_accepts(g: &GridTopology, a: &HashMap<String, Value>) -> bool {
    let m = encode_displacement_model(g, 2, 1, true);
    m.satisfied_by(&|name| a.get(name).copied())
        .expect("assignment covers every variable")
}

pub struct Mutant {
    pub name: &'static str,
    pub result: MappingResult,
    pub expected: ViolationCode,
}

fn set_offsets(res: &mut MappingResult, step: usize, sites: &[usize], values: &[i64]) {
    for (&s, &v) in sites.iter().zip(values) {
        res.offsets[step - 1][s] = v;
    }
    res.displacements = res.derived_displacements();
}

/// Mutations of the fixture schedules. `disp` must use displacements and
/// `swap` must contain at least one swap; both are for the 2x3 grid.
pub fn fixture_mutants(disp: &MappingResult, swap: &MappingResult) -> Vec<Mutant> {
    let mut out = Vec::new();
    let gate = |res: &MappingResult, id: usize| res.gates.iter().position(|g| g.gate == id).unwrap();

    // CX(1,3) waits for CX(0,1); start both together.
    let mut m = disp.clone();
    let (g0, g2) = (gate(&m, 0), gate(&m, 2));
    m.gates[g2].start = m.gates[g0].start;
    out.push(Mutant {
        name: "gate-before-predecessor",
        result: m,
        expected: ViolationCode::DependencyOrder,
    });

    // Without the row shift the diagonal CX(1,3) has no usable edge.
    let mut m = disp.clone();
    for row in &mut m.offsets {
        row.iter_mut().for_each(|o| *o = 0);
    }
    m.displacements.clear();
    out.push(Mutant {
        name: "displacements-removed",
        result: m,
        expected: ViolationCode::EdgeDisabled,
    });

    let mut m = disp.clone();
    let g0 = gate(&m, 0);
    m.gates[g0].sites.reverse();
    out.push(Mutant {
        name: "operands-reversed",
        result: m,
        expected: ViolationCode::LocationMismatch,
    });

    let mut m = disp.clone();
    m.placement[1] = m.placement[0];
    out.push(Mutant {
        name: "placement-collision",
        result: m,
        expected: ViolationCode::Injectivity,
    });

    // A swap on the pair CX(0,1) is using at the same step.
    let mut m = swap.clone();
    let g0 = gate(&m, 0);
    let (a, b) = (m.gates[g0].sites[0], m.gates[g0].sites[1]);
    m.swaps.push(SwapEvent {
        edge: Edge::new(a, b),
        step: m.gates[g0].start,
    });
    out.push(Mutant {
        name: "swap-during-gate",
        result: m,
        expected: ViolationCode::OccupancyOverlap,
    });

    let mut m = disp.clone();
    let last = m.horizon;
    set_offsets(&mut m, last, &[0, 1, 2], &[1, -1, 0]);
    out.push(Mutant {
        name: "row-order-crossed",
        result: m,
        expected: ViolationCode::DisplacementOrder,
    });

    let mut m = disp.clone();
    let last = m.horizon;
    set_offsets(&mut m, last, &[3, 4, 5], &[3, 3, 3]);
    out.push(Mutant {
        name: "offset-out-of-range",
        result: m,
        expected: ViolationCode::DisplacementBound,
    });

    let mut m = disp.clone();
    set_offsets(&mut m, 1, &[0, 1, 2], &[1, 1, 1]);
    out.push(Mutant {
        name: "nonzero-start-offset",
        result: m,
        expected: ViolationCode::InitialOffset,
    });

    let mut m = disp.clone();
    let g5 = gate(&m, 5);
    m.gates[g5].start = m.horizon + 1;
    m.makespan = m.horizon + 1;
    out.push(Mutant {
        name: "gate-after-horizon",
        result: m,
        expected: ViolationCode::HorizonExceeded,
    });

    let mut m = disp.clone();
    m.makespan += 1;
    out.push(Mutant {
        name: "makespan-misreported",
        result: m,
        expected: ViolationCode::RecordMismatch,
    });

    let mut m = swap.clone();
    m.swaps[0].edge = Edge::new(0, 2);
    out.push(Mutant {
        name: "swap-off-grid",
        result: m,
        expected: ViolationCode::EdgeDisabled,
    });

    let mut m = swap.clone();
    m.swaps.remove(0);
    out.push(Mutant {
        name: "swap-dropped",
        result: m,
        expected: ViolationCode::LocationMismatch,
    });

    out
}
