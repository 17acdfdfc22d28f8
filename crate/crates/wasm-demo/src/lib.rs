//! Browser bindings: grid edges, offset validity and a solver-free scheduler
//! for small circuits. Every export takes and returns JSON strings; the plain
//! functions underneath are what the tests exercise.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use qmap_core::displacement::{edge_enabled, offsets_valid};
use qmap_core::oracle::{brute_force_schedule, OracleOptions};
use qmap_core::{build_grid, extend_topology, parse_circuit, MappingResult, QuantumCircuit, TechnologyParams};

#[derive(Serialize)]
struct GridView {
    rows: usize,
    cols: usize,
    base: Vec<[usize; 2]>,
    extended: Vec<[usize; 2]>,
}

#[derive(Serialize)]
struct DisplacementView {
    rows_valid: Vec<bool>,
    /// Horizontal position `col + offset` of every site.
    positions: Vec<i64>,
    enabled: Vec<[usize; 2]>,
}

#[derive(Serialize)]
struct Frame {
    step: usize,
    offsets: Vec<i64>,
    /// Logical qubit on each site; `null` for ancillas.
    occupant: Vec<Option<usize>>,
    gates: Vec<Vec<usize>>,
    swaps: Vec<[usize; 2]>,
}

#[derive(Serialize)]
struct ScheduleView {
    result: MappingResult,
    frames: Vec<Frame>,
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("views serialize")
}

pub fn grid_json(rows: usize, cols: usize) -> Result<String, String> {
    let g = build_grid(rows, cols).map_err(|e| e.to_string())?;
    let ext = extend_topology(&g);
    let pairs = |edges: &[qmap_core::Edge]| edges.iter().map(|e| [e.0, e.1]).collect();
    Ok(to_json(&GridView {
        rows,
        cols,
        base: pairs(g.base_edges()),
        extended: pairs(ext.ext_edges()),
    }))
}

pub fn displacement_json(rows: usize, cols: usize, offsets: &[i64]) -> Result<String, String> {
    let g = build_grid(rows, cols).map_err(|e| e.to_string())?;
    if offsets.len() != g.num_sites() {
        return Err(format!("expected {} offsets, got {}", g.num_sites(), offsets.len()));
    }
    let ext = extend_topology(&g);
    Ok(to_json(&DisplacementView {
        rows_valid: (0..rows)
            .map(|r| offsets_valid(&offsets[g.row_sites(r)], cols))
            .collect(),
        positions: (0..g.num_sites()).map(|p| g.col(p) as i64 + offsets[p]).collect(),
        enabled: ext
            .ext_edges()
            .iter()
            .filter(|&&e| edge_enabled(&g, offsets, e))
            .map(|e| [e.0, e.1])
            .collect(),
    }))
}

fn frames(res: &MappingResult, c: &QuantumCircuit, p: &TechnologyParams) -> Vec<Frame> {
    let n = res.rows * res.cols;
    let mut occupant = vec![None; n];
    for (q, &site) in res.placement.iter().enumerate().take(c.qubit_count) {
        occupant[site] = Some(q);
    }
    let mut out = Vec::new();
    for t in 1..=res.makespan {
        let gates = res
            .gates
            .iter()
            .filter(|g| (g.start..g.start + c.gates[g.gate].duration).contains(&t))
            .map(|g| g.sites.clone())
            .collect();
        let swaps = res
            .swaps
            .iter()
            .filter(|s| t <= s.step && s.step < t + p.t_swap)
            .map(|s| [s.edge.0, s.edge.1])
            .collect();
        out.push(Frame {
            step: t,
            offsets: res.offsets[t - 1].clone(),
            occupant: occupant.clone(),
            gates,
            swaps,
        });
        for s in res.swaps.iter().filter(|s| s.step == t) {
            occupant.swap(s.edge.0, s.edge.1);
        }
    }
    out
}

pub fn schedule_json(
    circuit: &str,
    rows: usize,
    cols: usize,
    t_swap: usize,
    t_disp: usize,
    displacements: bool,
) -> Result<String, String> {
    let c = parse_circuit(circuit).map_err(|e| e.to_string())?;
    let g = build_grid(rows, cols).map_err(|e| e.to_string())?;
    let p = TechnologyParams::with_runtimes(t_swap, t_disp);
    let opts = OracleOptions {
        displacements,
        ..OracleOptions::default()
    };
    let result = brute_force_schedule(&c, &g, &p, &opts).map_err(|e| e.to_string())?;
    let frames = frames(&result, &c, &p);
    Ok(to_json(&ScheduleView { result, frames }))
}

/// Base and displacement-reachable edges of a grid.
#[wasm_bindgen(js_name = gridEdges)]
pub fn grid_edges(rows: usize, cols: usize) -> Result<String, JsError> {
    grid_json(rows, cols).map_err(|e| JsError::new(&e))
}

/// Row validity, atom positions and enabled edges for per-site offsets.
#[wasm_bindgen(js_name = displace)]
pub fn displace(rows: usize, cols: usize, offsets: Vec<i32>) -> Result<String, JsError> {
    let offsets: Vec<i64> = offsets.into_iter().map(i64::from).collect();
    displacement_json(rows, cols, &offsets).map_err(|e| JsError::new(&e))
}

/// Depth-optimal schedule by exhaustive search, with per-step frames.
#[wasm_bindgen(js_name = schedule)]
pub fn schedule(
    circuit: &str,
    rows: usize,
    cols: usize,
    t_swap: usize,
    t_disp: usize,
    displacements: bool,
) -> Result<String, JsError> {
    schedule_json(circuit, rows, cols, t_swap, t_disp, displacements).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_lists_both_edge_sets() {
        let v: serde_json::Value = serde_json::from_str(&grid_json(2, 3).unwrap()).unwrap();
        assert_eq!(v["base"].as_array().unwrap().len(), 7);
        assert_eq!(v["extended"].as_array().unwrap().len(), 13);
    }

    #[test]
    fn shifted_row_enables_diagonals() {
        let v: serde_json::Value =
            serde_json::from_str(&displacement_json(2, 3, &[0, 0, 0, 1, 1, 1]).unwrap()).unwrap();
        assert_eq!(v["rows_valid"], serde_json::json!([true, true]));
        assert_eq!(v["positions"], serde_json::json!([0, 1, 2, 1, 2, 3]));
        let enabled: Vec<[usize; 2]> = serde_json::from_value(v["enabled"].clone()).unwrap();
        assert!(enabled.contains(&[1, 3]) && enabled.contains(&[2, 4]));
        assert!(!enabled.contains(&[0, 3]));
    }

    #[test]
    fn crossed_row_is_invalid() {
        let v: serde_json::Value =
            serde_json::from_str(&displacement_json(1, 3, &[1, -1, 0]).unwrap()).unwrap();
        assert_eq!(v["rows_valid"], serde_json::json!([false]));
        assert!(displacement_json(1, 3, &[0]).is_err());
    }

    #[test]
    fn schedule_frames_follow_swaps() {
        let circuit = r#"{"qubits":3,"gates":[{"kind":"cx","operands":[0,2]}]}"#;
        let v: serde_json::Value =
            serde_json::from_str(&schedule_json(circuit, 1, 3, 1, 1, false).unwrap()).unwrap();
        assert_eq!(v["result"]["makespan"], 2);
        let frames = v["frames"].as_array().unwrap();
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[0]["swaps"].as_array().unwrap().len(), 1);
        assert_eq!(frames[1]["gates"].as_array().unwrap().len(), 1);
        let occ = &frames[1]["occupant"];
        let gate_sites: Vec<usize> = serde_json::from_value(frames[1]["gates"][0].clone()).unwrap();
        assert_eq!(occ[gate_sites[0]], 0);
        assert_eq!(occ[gate_sites[1]], 2);
    }

    #[test]
    fn oversized_circuit_is_refused() {
        let circuit = r#"{"qubits":2,"gates":[{"kind":"cx","operands":[0,1]}]}"#;
        assert!(schedule_json(circuit, 3, 3, 1, 1, true).is_err());
    }
}
