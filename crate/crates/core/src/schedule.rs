//! Swap-insertion model, its coupling to the displacement model, and the
//! depth and fidelity objectives.
//!
//! Logical qubits are padded with ancillas up to the number of sites, so the
//! placement `pi_q_t` is a bijection at every step. A swap recorded as
//! `swap_p_u_t` exchanges the occupants of `p` and `u` between steps `t` and
//! `t + 1` and occupies both sites during `t - t_swap + 1 ..= t`.

use serde::{Deserialize, Serialize};

use crate::circuit::QuantumCircuit;
use crate::displacement::encode_displacement_model;
use crate::error::{Error, Result};
use crate::model::{names, SymbolicModel, Term};
use crate::topology::{extend_topology, Edge, GridTopology};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TechnologyParams {
    pub t_swap: usize,
    pub t_disp: usize,
    pub f_swap: f64,
    pub f_disp: f64,
    pub default_gate_duration: usize,
    /// Fixed-point scale for `-ln f` costs.
    pub cost_scale: u64,
}

impl Default for TechnologyParams {
    fn default() -> Self {
        Self {
            t_swap: 1,
            t_disp: 1,
            f_swap: 1.0,
            f_disp: 1.0,
            default_gate_duration: 1,
            cost_scale: 1_000_000,
        }
    }
}

impl TechnologyParams {
    pub fn with_runtimes(t_swap: usize, t_disp: usize) -> Self {
        Self {
            t_swap,
            t_disp,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_swap == 0 || self.t_disp == 0 || self.default_gate_duration == 0 {
            return Err(Error::Argument("runtimes must be at least one step".into()));
        }
        for (name, f) in [("swap", self.f_swap), ("displacement", self.f_disp)] {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::Argument(format!(
                    "{name} fidelity {f} outside (0, 1]"
                )));
            }
        }
        if self.cost_scale == 0 {
            return Err(Error::Argument("cost scale must be positive".into()));
        }
        Ok(())
    }

    /// `round(-ln f_swap * cost_scale)`.
    pub fn swap_cost(&self) -> Result<i64> {
        log_cost(self.f_swap, self.cost_scale)
    }

    /// `round(-ln f_disp * cost_scale)`, charged per qubit whose offset changes.
    pub fn disp_cost(&self) -> Result<i64> {
        log_cost(self.f_disp, self.cost_scale)
    }
}

/// Fixed-point negative log fidelity.
pub fn log_cost(fidelity: f64, scale: u64) -> Result<i64> {
    if !(fidelity > 0.0 && fidelity <= 1.0) {
        return Err(Error::Argument(format!(
            "fidelity {fidelity} outside (0, 1]; log cost undefined"
        )));
    }
    Ok((-fidelity.ln() * scale as f64).round() as i64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Depth,
    Fidelity,
}

/// How the initial placement of logical qubits is chosen.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    /// Chosen by the solver.
    Free,
    /// Logical qubit `q` starts on site `q`.
    #[default]
    Identity,
    /// Logical qubit `q` starts on site `sites[q]`.
    Fixed(Vec<usize>),
}

impl Placement {
    /// Pinned start sites for the circuit's logical qubits, if any.
    pub fn pinned(&self, qubit_count: usize, n_sites: usize) -> Result<Option<Vec<usize>>> {
        let sites = match self {
            Placement::Free => return Ok(None),
            Placement::Identity => (0..qubit_count).collect::<Vec<_>>(),
            Placement::Fixed(s) => s.clone(),
        };
        if sites.len() != qubit_count {
            return Err(Error::Argument(format!(
                "placement lists {} sites for {qubit_count} qubits",
                sites.len()
            )));
        }
        let mut seen = vec![false; n_sites];
        for &s in &sites {
            if s >= n_sites || std::mem::replace(&mut seen[s], true) {
                return Err(Error::Argument(format!(
                    "placement site {s} out of range or repeated"
                )));
            }
        }
        Ok(Some(sites))
    }
}

fn check_capacity(c: &QuantumCircuit, g: &GridTopology) -> Result<()> {
    if c.qubit_count > g.num_sites() {
        return Err(Error::Capacity(format!(
            "{} logical qubits do not fit on a {}x{} grid",
            c.qubit_count,
            g.rows(),
            g.cols()
        )));
    }
    Ok(())
}

/// Completion steps `t` at which an operation of length `len` may end and
/// still move state into `t + 1`.
fn transition_steps(len: usize, horizon: usize) -> std::ops::Range<usize> {
    len.max(1)..horizon
}

/// Placement, gate timing and location, dependencies and swap transitions.
pub fn encode_swap_model(
    c: &QuantumCircuit,
    g: &GridTopology,
    horizon: usize,
    p: &TechnologyParams,
) -> Result<SymbolicModel> {
    check_capacity(c, g)?;
    p.validate()?;
    let g = extend_topology(g);
    let n = g.num_sites();
    let mut m = SymbolicModel::new(horizon);
    let pi = |q: usize, t: usize| Term::var(names::pi(q, t));

    for t in 1..=horizon {
        for q in 0..n {
            m.declare_int(names::pi(q, t), 0, n as i64 - 1);
            m.query(names::pi(q, t));
        }
        m.assert(Term::distinct((0..n).map(|q| pi(q, t)).collect()));
    }

    for (ci, gate) in c.gates.iter().enumerate() {
        let d = gate.duration;
        let last_start = horizon as i64 - d as i64 + 1;
        let z = m.declare_int(names::z(ci), 1, last_start);
        m.query(names::z(ci));
        let loc_hi = if gate.is_two_qubit() { g.ext_edges().len() } else { n };
        let loc = m.declare_int(names::loc(ci), 0, loc_hi as i64 - 1);
        m.query(names::loc(ci));
        for t in 1..=last_start.max(0) as usize {
            let at_t = Term::eq(z.clone(), Term::int(t as i64));
            if gate.is_two_qubit() {
                let (q0, q1) = (gate.operands[0], gate.operands[1]);
                for (k, &Edge(a, b)) in g.ext_edges().iter().enumerate() {
                    let placed = |x: usize, y: usize| {
                        Term::and(vec![
                            Term::eq(pi(q0, t), Term::int(x as i64)),
                            Term::eq(pi(q1, t), Term::int(y as i64)),
                        ])
                    };
                    m.assert(Term::implies(
                        Term::and(vec![at_t.clone(), Term::eq(loc.clone(), Term::int(k as i64))]),
                        Term::or(vec![placed(a, b), placed(b, a)]),
                    ));
                }
            } else {
                m.assert(Term::implies(
                    at_t,
                    Term::eq(pi(gate.operands[0], t), loc.clone()),
                ));
            }
        }
    }

    for (ci, preds) in c.predecessors().iter().enumerate() {
        for &pc in preds {
            let d = c.gates[pc].duration as i64;
            m.assert(Term::ge(
                Term::var(names::z(ci)),
                Term::add(vec![Term::var(names::z(pc)), Term::int(d)]),
            ));
        }
    }

    let swap_steps = transition_steps(p.t_swap, horizon);
    for &Edge(a, b) in g.ext_edges() {
        for t in swap_steps.clone() {
            m.declare_bool(names::swap(a, b, t));
            m.query(names::swap(a, b, t));
        }
    }

    for t in 1..horizon {
        for site in 0..n {
            let mut next = Term::int(site as i64);
            if swap_steps.contains(&t) {
                for (_, e) in g.incident(site) {
                    let partner = e.partner(site);
                    next = Term::ite(
                        Term::var(names::swap(e.0, e.1, t)),
                        Term::int(partner as i64),
                        next,
                    );
                }
            }
            for q in 0..n {
                m.assert(Term::implies(
                    Term::eq(pi(q, t), Term::int(site as i64)),
                    Term::eq(pi(q, t + 1), next.clone()),
                ));
            }
        }
    }
    Ok(m)
}

/// Pins the start sites of the circuit's logical qubits.
pub fn encode_placement(m: &mut SymbolicModel, sites: &[usize]) {
    for (q, &s) in sites.iter().enumerate() {
        m.assert(Term::eq(Term::var(names::pi(q, 1)), Term::int(s as i64)));
    }
}

/// Couples the swap and displacement fragments: two-qubit gates and swaps
/// need their edge enabled for their whole duration, and each site hosts at
/// most one gate, swap or displacement per step.
pub fn encode_coupling(
    c: &QuantumCircuit,
    g: &GridTopology,
    horizon: usize,
    p: &TechnologyParams,
) -> SymbolicModel {
    let g = extend_topology(g);
    let n = g.num_sites();
    let mut m = SymbolicModel::new(horizon);
    let swap_steps = transition_steps(p.t_swap, horizon);
    let disp_steps = transition_steps(p.t_disp, horizon);

    for (ci, gate) in c.gates.iter().enumerate().filter(|(_, g)| g.is_two_qubit()) {
        let d = gate.duration;
        let z = Term::var(names::z(ci));
        let loc = Term::var(names::loc(ci));
        for t in 1..=(horizon + 1).saturating_sub(d) {
            for (k, &Edge(a, b)) in g.ext_edges().iter().enumerate() {
                let enabled = (t..t + d).map(|s| Term::var(names::en(a, b, s))).collect();
                m.assert(Term::implies(
                    Term::and(vec![
                        Term::eq(z.clone(), Term::int(t as i64)),
                        Term::eq(loc.clone(), Term::int(k as i64)),
                    ]),
                    Term::and(enabled),
                ));
            }
        }
    }

    for &Edge(a, b) in g.ext_edges() {
        for t in swap_steps.clone() {
            let enabled = (t + 1 - p.t_swap..=t)
                .map(|s| Term::var(names::en(a, b, s)))
                .collect();
            m.assert(Term::implies(Term::var(names::swap(a, b, t)), Term::and(enabled)));
        }
    }

    for site in 0..n {
        for s in 1..=horizon {
            let mut busy = Vec::new();
            for (ci, gate) in c.gates.iter().enumerate() {
                let z = Term::var(names::z(ci));
                let first = s as i64 - gate.duration as i64 + 1;
                for &q in &gate.operands {
                    busy.push(Term::and(vec![
                        Term::le(z.clone(), Term::int(s as i64)),
                        Term::le(Term::int(first), z.clone()),
                        Term::eq(Term::var(names::pi(q, s)), Term::int(site as i64)),
                    ]));
                }
            }
            for t in s..s + p.t_swap {
                if swap_steps.contains(&t) {
                    for (_, e) in g.incident(site) {
                        busy.push(Term::var(names::swap(e.0, e.1, t)));
                    }
                }
            }
            for t in s..s + p.t_disp {
                if disp_steps.contains(&t) {
                    busy.push(Term::var(names::dbusy(site, t)));
                }
            }
            if busy.len() > 1 {
                let count = busy.into_iter().map(Term::indicator).collect();
                m.assert(Term::le(Term::add(count), Term::int(1)));
            }
        }
    }
    m
}

/// Adds the objective. Depth needs no extra terms: every gate already
/// completes by the horizon, and the driver deepens the horizon. Fidelity
/// defines `cost` as the fixed-point sum of swap and displacement log costs.
pub fn encode_objective(
    m: &mut SymbolicModel,
    objective: Objective,
    g: &GridTopology,
    p: &TechnologyParams,
) -> Result<()> {
    if objective == Objective::Depth {
        return Ok(());
    }
    let swap_cost = p.swap_cost()?;
    let disp_cost = p.disp_cost()?;
    let g = extend_topology(g);
    let horizon = m.horizon;
    let mut terms = Vec::new();
    if swap_cost > 0 {
        for &Edge(a, b) in g.ext_edges() {
            for t in transition_steps(p.t_swap, horizon) {
                terms.push(Term::ite(
                    Term::var(names::swap(a, b, t)),
                    Term::int(swap_cost),
                    Term::int(0),
                ));
            }
        }
    }
    if disp_cost > 0 {
        for site in 0..g.num_sites() {
            for t in 1..horizon {
                terms.push(Term::ite(
                    Term::var(names::dbusy(site, t)),
                    Term::int(disp_cost),
                    Term::int(0),
                ));
            }
        }
    }
    let cost = m.declare(names::COST, crate::model::Sort::Int);
    m.assert(Term::eq(cost, Term::add(terms)));
    m.set_objective(names::COST);
    m.query(names::COST);
    Ok(())
}

/// Restricts the fidelity cost to at most `max_cost`.
pub fn bound_cost(m: &mut SymbolicModel, max_cost: i64) {
    m.assert(Term::le(Term::var(names::COST), Term::int(max_cost)));
}

/// Complete model at a fixed horizon.
pub fn build_model(
    c: &QuantumCircuit,
    g: &GridTopology,
    p: &TechnologyParams,
    horizon: usize,
    displacements: bool,
    objective: Objective,
    placement: &Placement,
) -> Result<SymbolicModel> {
    let mut m = encode_displacement_model(g, horizon, p.t_disp, displacements);
    m.merge(encode_swap_model(c, g, horizon, p)?);
    m.merge(encode_coupling(c, g, horizon, p));
    if let Some(sites) = placement.pinned(c.qubit_count, g.num_sites())? {
        encode_placement(&mut m, &sites);
    }
    encode_objective(&mut m, objective, g, p)?;
    Ok(m)
}
