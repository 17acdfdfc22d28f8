//! Replay-based validation of decoded schedules.
//!
//! The checker never looks at a constraint model. It rebuilds the placement
//! from the initial assignment and the recorded swaps, recomputes atom
//! positions from the recorded offsets, and checks every timing and
//! connectivity rule directly.

use serde::{Deserialize, Serialize};

use crate::circuit::QuantumCircuit;
use crate::mapping::MappingResult;
use crate::schedule::TechnologyParams;
use crate::topology::GridTopology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationCode {
    DependencyOrder,
    LocationMismatch,
    EdgeDisabled,
    Injectivity,
    OccupancyOverlap,
    DisplacementOrder,
    DisplacementBound,
    InitialOffset,
    HorizonExceeded,
    /// The result's own bookkeeping is inconsistent (gate list, derived
    /// displacement events, makespan or dimensions).
    RecordMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub entities: Vec<usize>,
    pub step: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    pub fn codes(&self) -> Vec<ViolationCode> {
        let mut codes: Vec<_> = self.violations.iter().map(|v| v.code).collect();
        codes.sort();
        codes.dedup();
        codes
    }

    fn push(&mut self, code: ViolationCode, entities: Vec<usize>, step: Option<usize>, detail: String) {
        self.violations.push(Violation {
            code,
            entities,
            step,
            detail,
        });
    }

    pub fn summary(&self) -> String {
        self.violations
            .iter()
            .map(|v| format!("{:?} {:?} at {:?}: {}", v.code, v.entities, v.step, v.detail))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

struct Geometry {
    cols: usize,
}

impl Geometry {
    fn row(&self, p: usize) -> usize {
        p / self.cols
    }

    fn col(&self, p: usize) -> i64 {
        (p % self.cols) as i64
    }

    /// Whether the two sites can interact at all under some displacement.
    fn in_extended(&self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.row(a), self.row(b));
        if ra == rb {
            (self.col(a) - self.col(b)).abs() == 1
        } else {
            ra.abs_diff(rb) == 1
        }
    }

    fn aligned(&self, offsets: &[i64], a: usize, b: usize) -> bool {
        if self.row(a) == self.row(b) {
            (self.col(a) - self.col(b)).abs() == 1 && offsets[a] == offsets[b]
        } else {
            self.row(a).abs_diff(self.row(b)) == 1
                && self.col(a) + offsets[a] == self.col(b) + offsets[b]
        }
    }
}

/// Checks `res` against every scheduling rule; returns all violations found.
pub fn check_mapping(
    res: &MappingResult,
    c: &QuantumCircuit,
    g: &GridTopology,
    p: &TechnologyParams,
) -> ViolationReport {
    use ViolationCode::*;
    let mut report = ViolationReport::default();
    let n = g.num_sites();
    let horizon = res.horizon;
    let geo = Geometry { cols: g.cols() };

    if res.rows != g.rows() || res.cols != g.cols() {
        report.push(
            RecordMismatch,
            vec![],
            None,
            format!("result is for a {}x{} grid", res.rows, res.cols),
        );
        return report;
    }
    if res.offsets.len() != horizon || res.offsets.iter().any(|o| o.len() != n) {
        report.push(
            RecordMismatch,
            vec![],
            None,
            "offset table does not cover every site and step".into(),
        );
        return report;
    }

    // Offsets.
    let bound = g.cols() as i64 - 1;
    for (i, step_offsets) in res.offsets.iter().enumerate() {
        let t = i + 1;
        for (site, &o) in step_offsets.iter().enumerate() {
            if t == 1 && o != 0 {
                report.push(InitialOffset, vec![site], Some(1), format!("offset {o}"));
            }
            if o.abs() > bound {
                report.push(DisplacementBound, vec![site], Some(t), format!("offset {o}"));
            }
        }
        for r in 0..g.rows() {
            let sites: Vec<usize> = g.row_sites(r).collect();
            if sites.windows(2).any(|w| step_offsets[w[0]] > step_offsets[w[1]]) {
                report.push(
                    DisplacementOrder,
                    sites,
                    Some(t),
                    format!("row {r} order broken"),
                );
            }
        }
    }

    // Occupancy table: occupied[t - 1][site] counts operations.
    let mut occupied = vec![vec![0usize; n]; horizon];
    let mut occupy = |report: &mut ViolationReport, site: usize, first: i64, last: i64, what: &str| {
        if first < 1 || last > horizon as i64 {
            report.push(
                HorizonExceeded,
                vec![site],
                Some(first.max(0) as usize),
                format!("{what} spans steps {first}..={last} outside 1..={horizon}"),
            );
        }
        for t in first.max(1)..=last.min(horizon as i64) {
            occupied[t as usize - 1][site] += 1;
        }
    };

    let derived = res.derived_displacements();
    let mut recorded = res.displacements.clone();
    recorded.sort_by_key(|d| (d.step, d.site));
    if recorded != derived {
        report.push(
            RecordMismatch,
            vec![],
            None,
            "recorded displacement events disagree with the offset table".into(),
        );
    }
    for d in &derived {
        let last = d.step as i64;
        occupy(&mut report, d.site, last - p.t_disp as i64 + 1, last, "displacement");
    }

    // Initial placement.
    let mut seen = vec![false; n];
    let placement_ok = res.placement.len() == n
        && res
            .placement
            .iter()
            .all(|&s| s < n && !std::mem::replace(&mut seen[s], true));
    if !placement_ok || c.qubit_count > n {
        report.push(
            Injectivity,
            res.placement.clone(),
            Some(1),
            "initial placement is not a bijection onto the sites".into(),
        );
        return report;
    }

    // Swaps.
    for s in &res.swaps {
        let (a, b) = (s.edge.0, s.edge.1);
        if a >= n || b >= n || a == b || !geo.in_extended(a, b) {
            report.push(EdgeDisabled, vec![a, b], Some(s.step), "not a grid edge".into());
            continue;
        }
        let last = s.step as i64;
        let first = last - p.t_swap as i64 + 1;
        if s.step >= horizon {
            report.push(
                HorizonExceeded,
                vec![a, b],
                Some(s.step),
                "swap completes at or after the last step".into(),
            );
        }
        for t in first.max(1)..=last.min(horizon as i64) {
            if !geo.aligned(&res.offsets[t as usize - 1], a, b) {
                report.push(EdgeDisabled, vec![a, b], Some(t as usize), "swap edge not aligned".into());
                break;
            }
        }
        occupy(&mut report, a, first, last, "swap");
        occupy(&mut report, b, first, last, "swap");
    }

    // Replay the placement: site_of[t - 1][q].
    let mut site_of = Vec::with_capacity(horizon);
    let mut current = res.placement.clone();
    for t in 1..=horizon {
        site_of.push(current.clone());
        let mut occupant = vec![usize::MAX; n];
        for (q, &s) in current.iter().enumerate() {
            occupant[s] = q;
        }
        for s in res.swaps.iter().filter(|s| s.step == t) {
            let (a, b) = (s.edge.0, s.edge.1);
            if a < n && b < n {
                let (qa, qb) = (occupant[a], occupant[b]);
                current[qa] = b;
                current[qb] = a;
                occupant[a] = qb;
                occupant[b] = qa;
            }
        }
    }

    // Gates.
    let mut slot: Vec<Option<&crate::mapping::ScheduledGate>> = vec![None; c.len()];
    for sg in &res.gates {
        match slot.get_mut(sg.gate) {
            Some(entry @ None) => *entry = Some(sg),
            _ => report.push(
                RecordMismatch,
                vec![sg.gate],
                Some(sg.start),
                "unknown or duplicate gate entry".into(),
            ),
        }
    }
    let mut makespan = 0;
    for (ci, gate) in c.gates.iter().enumerate() {
        let Some(sg) = slot[ci] else {
            report.push(RecordMismatch, vec![ci], None, "gate not scheduled".into());
            continue;
        };
        let first = sg.start as i64;
        let last = first + gate.duration as i64 - 1;
        makespan = makespan.max(last.max(0) as usize);
        if sg.start == 0 || last > horizon as i64 {
            report.push(
                HorizonExceeded,
                vec![ci],
                Some(sg.start),
                format!("gate spans {first}..={last} outside 1..={horizon}"),
            );
        }
        if (1..=horizon).contains(&sg.start) {
            let expected: Vec<usize> =
                gate.operands.iter().map(|&q| site_of[sg.start - 1][q]).collect();
            if expected != sg.sites {
                report.push(
                    LocationMismatch,
                    vec![ci],
                    Some(sg.start),
                    format!("operands are on {expected:?}, gate placed on {:?}", sg.sites),
                );
            }
        }
        if sg.sites.iter().any(|&s| s >= n) {
            continue;
        }
        if let [a, b] = sg.sites[..] {
            if a == b || !geo.in_extended(a, b) {
                report.push(EdgeDisabled, vec![ci, a, b], Some(sg.start), "not a grid edge".into());
            } else {
                for t in first.max(1)..=last.min(horizon as i64) {
                    if !geo.aligned(&res.offsets[t as usize - 1], a, b) {
                        report.push(
                            EdgeDisabled,
                            vec![ci, a, b],
                            Some(t as usize),
                            "gate edge not aligned".into(),
                        );
                        break;
                    }
                }
            }
        }
        for &s in &sg.sites {
            occupy(&mut report, s, first, last, "gate");
        }
    }
    for (ci, preds) in c.predecessors().iter().enumerate() {
        let Some(sg) = slot[ci] else { continue };
        for &pc in preds {
            if let Some(prev) = slot[pc] {
                if sg.start < prev.start + c.gates[pc].duration {
                    report.push(
                        DependencyOrder,
                        vec![pc, ci],
                        Some(sg.start),
                        format!("gate {ci} starts before gate {pc} finishes"),
                    );
                }
            }
        }
    }

    for (i, row) in occupied.iter().enumerate() {
        for (site, &count) in row.iter().enumerate() {
            if count > 1 {
                report.push(
                    OccupancyOverlap,
                    vec![site],
                    Some(i + 1),
                    format!("{count} operations on one site"),
                );
            }
        }
    }

    if res.makespan != makespan {
        report.push(
            RecordMismatch,
            vec![],
            None,
            format!("reported makespan {} but gates end at {makespan}", res.makespan),
        );
    }
    if makespan > horizon || res.makespan > horizon {
        report.push(
            HorizonExceeded,
            vec![],
            Some(makespan),
            format!("makespan {makespan} exceeds horizon {horizon}"),
        );
    }
    report
}

/// Product of all gate, swap and displacement fidelities.
pub fn compute_fidelity(res: &MappingResult, c: &QuantumCircuit, p: &TechnologyParams) -> f64 {
    let log: f64 = c.gates.iter().map(|g| g.fidelity.ln()).sum::<f64>()
        + res.swaps.len() as f64 * p.f_swap.ln()
        + res.displacements.len() as f64 * p.f_disp.ln();
    log.exp()
}
