//! One-dimensional row displacements: offset validity, the edges a given set
//! of offsets enables, and the offset part of the constraint model.
//!
//! Every physical qubit `p` carries an integer offset. Qubits of one row keep
//! their relative order, so offsets are non-decreasing along a row. A qubit at
//! column `c` with offset `o` sits at horizontal position `c + o`.

use crate::model::{names, SymbolicModel, Term};
use crate::topology::{extend_topology, Edge, GridTopology};

/// True iff one row's offsets (in column order) keep the row order and stay
/// within `[-(cols-1), cols-1]`.
pub fn offsets_valid(row_offsets: &[i64], cols: usize) -> bool {
    let bound = cols as i64 - 1;
    row_offsets.iter().all(|o| o.abs() <= bound) && row_offsets.windows(2).all(|w| w[0] <= w[1])
}

/// Checks every row of a full per-site offset vector.
pub fn all_rows_valid(g: &GridTopology, offsets: &[i64]) -> bool {
    offsets.len() == g.num_sites()
        && (0..g.rows()).all(|r| offsets_valid(&offsets[g.row_sites(r)], g.cols()))
}

/// Whether `edge` of the extended topology is usable under `offsets`.
pub fn edge_enabled(g: &GridTopology, offsets: &[i64], edge: Edge) -> bool {
    let Edge(p, u) = edge;
    let (rp, ru) = (g.row(p), g.row(u));
    if rp == ru {
        g.col(p).abs_diff(g.col(u)) == 1 && offsets[p] == offsets[u]
    } else if rp.abs_diff(ru) == 1 {
        g.col(p) as i64 + offsets[p] == g.col(u) as i64 + offsets[u]
    } else {
        false
    }
}

/// Edges of the extended topology enabled by one time step's offsets.
pub fn enabled_edges(offsets: &[i64], g: &GridTopology) -> Vec<Edge> {
    extend_topology(g)
        .ext_edges()
        .iter()
        .copied()
        .filter(|&e| edge_enabled(g, offsets, e))
        .collect()
}

/// Offset variables, enabled-edge indicators and displacement-busy
/// indicators over steps `1..=horizon`.
///
/// `dbusy_p_t` marks an offset change of `p` between `t` and `t + 1`; the
/// displacement occupies `p` during `t - t_disp + 1 ..= t`. Occupancy
/// exclusion against gates and swaps is added by the coupling fragment.
pub fn encode_displacement_model(
    g: &GridTopology,
    horizon: usize,
    t_disp: usize,
    enabled: bool,
) -> SymbolicModel {
    let g = extend_topology(g);
    let mut m = SymbolicModel::new(horizon);
    let bound = g.cols() as i64 - 1;
    for t in 1..=horizon {
        for p in 0..g.num_sites() {
            let (lo, hi) = if t == 1 || !enabled { (0, 0) } else { (-bound, bound) };
            m.declare_int(names::eta(p, t), lo, hi);
            m.query(names::eta(p, t));
        }
    }
    let eta = |p: usize, t: usize| Term::var(names::eta(p, t));

    if enabled {
        for t in 2..=horizon {
            for r in 0..g.rows() {
                for p in g.row_sites(r).take(g.cols() - 1) {
                    m.assert(Term::le(eta(p, t), eta(p + 1, t)));
                }
            }
        }
    }

    for t in 1..=horizon {
        for &Edge(p, u) in g.ext_edges() {
            let en = m.declare_bool(names::en(p, u, t));
            let shift = g.col(u) as i64 - g.col(p) as i64;
            let aligned = if g.row(p) == g.row(u) {
                Term::eq(eta(p, t), eta(u, t))
            } else if shift == 0 {
                Term::eq(eta(p, t), eta(u, t))
            } else {
                Term::eq(eta(p, t), Term::add(vec![eta(u, t), Term::int(shift)]))
            };
            m.assert(Term::eq(en, aligned));
        }
    }

    for t in 1..horizon {
        for p in 0..g.num_sites() {
            let busy = m.declare_bool(names::dbusy(p, t));
            m.query(names::dbusy(p, t));
            m.assert(Term::eq(busy.clone(), Term::ne(eta(p, t), eta(p, t + 1))));
            if t < t_disp {
                m.assert(Term::not(busy));
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::build_grid;

    #[test]
    fn row_validity_cases() {
        assert!(offsets_valid(&[1, 1, 1], 3));
        assert!(offsets_valid(&[-1, -1, 0], 3));
        assert!(!offsets_valid(&[1, -1, 0], 3));
        assert!(offsets_valid(&[0, 0, 0], 3));
        assert!(!offsets_valid(&[3, 3, 3], 3));
        assert!(offsets_valid(&[-2, 0, 2], 3));
    }

    #[test]
    fn identity_enables_base_edges() {
        let g = build_grid(2, 3).unwrap();
        let edges = enabled_edges(&[0; 6], &g);
        assert_eq!(edges, g.base_edges());
    }

    #[test]
    fn bottom_shift_aligns_diagonals() {
        let g = build_grid(2, 3).unwrap();
        let offsets = [1, 1, 1, 0, 0, 0];
        let edges = enabled_edges(&offsets, &g);
        let cross: Vec<Edge> = edges.iter().copied().filter(|e| g.row(e.0) != g.row(e.1)).collect();
        assert_eq!(cross, vec![Edge(0, 4), Edge(1, 5)]);
        for e in [Edge(0, 1), Edge(1, 2), Edge(3, 4), Edge(4, 5)] {
            assert!(edges.contains(&e));
        }
    }

    #[test]
    fn unequal_same_row_offsets_disable_edge() {
        let g = build_grid(2, 3).unwrap();
        let edges = enabled_edges(&[0, 1, 1, 0, 0, 0], &g);
        assert!(!edges.contains(&Edge(0, 1)));
        assert!(edges.contains(&Edge(1, 2)));
    }

    #[test]
    fn model_counts() {
        let g = build_grid(2, 3).unwrap();
        let m = encode_displacement_model(&g, 3, 1, true);
        let count = |prefix: &str| m.decls().iter().filter(|(n, _)| n.starts_with(prefix)).count();
        assert_eq!(count("eta_"), 18);
        assert_eq!(count("en_"), 39);
        assert_eq!(count("dbusy_"), 12);
    }

    #[test]
    fn disabled_model_pins_offsets() {
        let g = build_grid(2, 2).unwrap();
        let m = encode_displacement_model(&g, 2, 1, false);
        let pinned = m
            .assertions()
            .iter()
            .filter(|a| matches!(a, Term::Eq(_, b) if **b == Term::Int(0)))
            .count();
        assert_eq!(pinned, 8);
    }
}
