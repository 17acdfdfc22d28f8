//! Decoded schedules.

use serde::{Deserialize, Serialize};

use crate::topology::Edge;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledGate {
    /// Index into the circuit's gate list.
    pub gate: usize,
    /// First step the gate occupies.
    pub start: usize,
    /// Physical sites, in operand order.
    pub sites: Vec<usize>,
}

/// A swap whose last busy step is `step`; the occupants of both sites are
/// exchanged from `step + 1` on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapEvent {
    pub edge: Edge,
    pub step: usize,
}

/// One site's offset change between `step` and `step + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisplacementEvent {
    pub site: usize,
    pub step: usize,
    pub from: i64,
    pub to: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub solver_calls: usize,
    pub wall_s: f64,
    pub final_horizon: usize,
    /// False when a fidelity search stopped on a timeout before proving
    /// optimality.
    pub optimal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingResult {
    pub rows: usize,
    pub cols: usize,
    pub horizon: usize,
    /// `placement[q]` is the start site of logical qubit `q`; entries past the
    /// circuit's qubit count are ancillas.
    pub placement: Vec<usize>,
    /// `offsets[t - 1][p]` is the offset of site `p` during step `t`.
    pub offsets: Vec<Vec<i64>>,
    pub gates: Vec<ScheduledGate>,
    pub swaps: Vec<SwapEvent>,
    pub displacements: Vec<DisplacementEvent>,
    pub makespan: usize,
    pub fidelity: f64,
    #[serde(default)]
    pub stats: SolverStats,
}

impl MappingResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("mapping result serializes")
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Offset-change events derived from the per-step offsets.
    pub fn derived_displacements(&self) -> Vec<DisplacementEvent> {
        let mut events = Vec::new();
        for (i, pair) in self.offsets.windows(2).enumerate() {
            for (site, (&from, &to)) in pair[0].iter().zip(&pair[1]).enumerate() {
                if from != to {
                    events.push(DisplacementEvent {
                        site,
                        step: i + 1,
                        from,
                        to,
                    });
                }
            }
        }
        events
    }
}
