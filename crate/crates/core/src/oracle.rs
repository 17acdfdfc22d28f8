//! Exhaustive state-space search over step-by-step schedules for tiny
//! instances. Shares no code with the constraint encoders; used to certify
//! solver optima and as a solver-free mapper for small circuits.
//!
//! A search state is the situation at the start of a step: which logical
//! qubit sits on each site, every site's offset, and for busy sites the
//! remaining duration and pending effect of the running operation. Each step
//! every idle site either stays idle or starts one operation (a ready gate, a
//! swap over an aligned edge, or a move to a new offset). Effects of swaps
//! and moves apply when they finish, and row order is checked then.

use std::collections::HashMap;

use crate::circuit::QuantumCircuit;
use crate::error::{Error, Result};
use crate::mapping::{DisplacementEvent, MappingResult, ScheduledGate, SolverStats, SwapEvent};
use crate::schedule::{Placement, TechnologyParams};
use crate::topology::{Edge, GridTopology};

const MAX_SITES: usize = 9;
const ANCILLA: u8 = u8::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_sites: usize,
    pub max_gates: usize,
    pub max_horizon: usize,
    /// Distinct states one search may visit before giving up.
    pub max_states: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_sites: 6,
            max_gates: 8,
            max_horizon: 12,
            max_states: 1_500_000,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct OracleOptions {
    pub displacements: bool,
    pub placement: Placement,
    pub limits: OracleLimits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Pending {
    None,
    Gate(u8),
    Swap(u8),
    Move(i8),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct State {
    occupant: [u8; MAX_SITES],
    offset: [i8; MAX_SITES],
    busy: [u8; MAX_SITES],
    pending: [Pending; MAX_SITES],
    done: u64,
    running: u64,
}

#[derive(Debug, Clone, Copy)]
enum Action {
    Gate { gate: usize, sites: [usize; 2], arity: usize },
    Swap(usize, usize),
    Move { site: usize, to: i8 },
}

struct Node {
    state: State,
    parent: usize,
    actions: Vec<Action>,
    swaps: u32,
    moves: u32,
}

struct Search<'a> {
    c: &'a QuantumCircuit,
    n: usize,
    rows: usize,
    cols: usize,
    preds: Vec<u64>,
    p: &'a TechnologyParams,
    displacements: bool,
    all_done: u64,
    max_states: usize,
}

impl<'a> Search<'a> {
    fn new(
        c: &'a QuantumCircuit,
        g: &GridTopology,
        p: &'a TechnologyParams,
        opts: &OracleOptions,
    ) -> Result<Self> {
        let n = g.num_sites();
        let limits = opts.limits;
        if n > limits.max_sites.min(MAX_SITES) || c.len() > limits.max_gates.min(64) {
            return Err(Error::Capacity(format!(
                "oracle limited to {} sites and {} gates, got {} and {}",
                limits.max_sites,
                limits.max_gates,
                n,
                c.len()
            )));
        }
        if c.qubit_count > n {
            return Err(Error::Capacity(format!(
                "{} qubits do not fit on {n} sites",
                c.qubit_count
            )));
        }
        p.validate()?;
        let preds = c
            .predecessors()
            .iter()
            .map(|ps| ps.iter().fold(0u64, |m, &g| m | 1 << g))
            .collect();
        Ok(Self {
            c,
            n,
            rows: g.rows(),
            cols: g.cols(),
            preds,
            p,
            displacements: opts.displacements,
            all_done: if c.is_empty() { 0 } else { u64::MAX >> (64 - c.len()) },
            max_states: limits.max_states,
        })
    }

    fn initial_states(&self, placement: &Placement) -> Result<Vec<State>> {
        let blank = State {
            occupant: [ANCILLA; MAX_SITES],
            offset: [0; MAX_SITES],
            busy: [0; MAX_SITES],
            pending: [Pending::None; MAX_SITES],
            done: 0,
            running: 0,
        };
        if let Some(sites) = placement.pinned(self.c.qubit_count, self.n)? {
            let mut s = blank;
            for (q, &site) in sites.iter().enumerate() {
                s.occupant[site] = q as u8;
            }
            return Ok(vec![s]);
        }
        let mut out = Vec::new();
        let mut used = vec![false; self.n];
        let mut s = blank;
        self.place(0, &mut used, &mut s, &mut out);
        Ok(out)
    }

    fn place(&self, q: usize, used: &mut [bool], s: &mut State, out: &mut Vec<State>) {
        if q == self.c.qubit_count {
            out.push(s.clone());
            return;
        }
        for site in 0..self.n {
            if !used[site] {
                used[site] = true;
                s.occupant[site] = q as u8;
                self.place(q + 1, used, s, out);
                s.occupant[site] = ANCILLA;
                used[site] = false;
            }
        }
    }

    fn row(&self, p: usize) -> usize {
        p / self.cols
    }

    fn col(&self, p: usize) -> i64 {
        (p % self.cols) as i64
    }

    fn aligned(&self, s: &State, a: usize, b: usize) -> bool {
        let (oa, ob) = (s.offset[a] as i64, s.offset[b] as i64);
        if self.row(a) == self.row(b) {
            (self.col(a) - self.col(b)).abs() == 1 && oa == ob
        } else {
            self.row(a).abs_diff(self.row(b)) == 1 && self.col(a) + oa == self.col(b) + ob
        }
    }

    /// Distance in the graph of edges that some choice of offsets enables.
    fn hops(&self, a: usize, b: usize) -> usize {
        let dr = self.row(a).abs_diff(self.row(b));
        let dc = self.col(a).abs_diff(self.col(b)) as usize;
        match (self.displacements, dr) {
            (false, _) => dr + dc,
            (true, 0) if self.rows > 1 => dc.min(2),
            (true, 0) => dc,
            (true, _) => dr,
        }
    }

    fn rows_ordered(&self, s: &State) -> bool {
        (0..self.rows).all(|r| {
            let base = r * self.cols;
            (base..base + self.cols - 1).all(|p| s.offset[p] <= s.offset[p + 1])
        })
    }

    fn site_of(&self, s: &State, q: usize) -> usize {
        (0..self.n)
            .find(|&p| s.occupant[p] as usize == q)
            .expect("every logical qubit is placed")
    }

    /// All successor states after one step from `s`.
    fn expand(&self, s: &State, out: &mut Vec<(State, Vec<Action>)>) {
        let mut startable: Vec<Vec<(usize, [usize; 2], usize)>> = vec![Vec::new(); self.n];
        for (gi, gate) in self.c.gates.iter().enumerate() {
            let bit = 1u64 << gi;
            if s.done & bit != 0 || s.running & bit != 0 || self.preds[gi] & !s.done != 0 {
                continue;
            }
            let sites: Vec<usize> = gate.operands.iter().map(|&q| self.site_of(s, q)).collect();
            if sites.iter().any(|&p| s.busy[p] != 0) {
                continue;
            }
            if let [a, b] = sites[..] {
                if !self.aligned(s, a, b) {
                    continue;
                }
                startable[a.min(b)].push((gi, [a, b], 2));
            } else {
                startable[sites[0]].push((gi, [sites[0], 0], 1));
            }
        }
        let mut assigned = [false; MAX_SITES];
        let mut actions = Vec::new();
        self.choose(s, 0, &startable, &mut assigned, &mut actions, out);
    }

    fn choose(
        &self,
        s: &State,
        site: usize,
        startable: &[Vec<(usize, [usize; 2], usize)>],
        assigned: &mut [bool; MAX_SITES],
        actions: &mut Vec<Action>,
        out: &mut Vec<(State, Vec<Action>)>,
    ) {
        if site == self.n {
            if let Some(next) = self.advance(s, actions) {
                out.push((next, actions.clone()));
            }
            return;
        }
        if assigned[site] || s.busy[site] != 0 {
            self.choose(s, site + 1, startable, assigned, actions, out);
            return;
        }
        // idle
        self.choose(s, site + 1, startable, assigned, actions, out);

        assigned[site] = true;
        for &(gate, sites, arity) in &startable[site] {
            let other = if arity == 2 { sites[0].max(sites[1]) } else { site };
            if arity == 2 && assigned[other] {
                continue;
            }
            assigned[other] = true;
            actions.push(Action::Gate { gate, sites, arity });
            self.choose(s, site + 1, startable, assigned, actions, out);
            actions.pop();
            if arity == 2 {
                assigned[other] = false;
            }
        }
        for other in site + 1..self.n {
            if assigned[other] || s.busy[other] != 0 {
                continue;
            }
            if s.occupant[site] == ANCILLA && s.occupant[other] == ANCILLA {
                continue;
            }
            if !self.aligned(s, site, other) {
                continue;
            }
            assigned[other] = true;
            actions.push(Action::Swap(site, other));
            self.choose(s, site + 1, startable, assigned, actions, out);
            actions.pop();
            assigned[other] = false;
        }
        if self.displacements {
            let bound = self.cols as i64 - 1;
            for to in -bound..=bound {
                if to == s.offset[site] as i64 {
                    continue;
                }
                actions.push(Action::Move { site, to: to as i8 });
                self.choose(s, site + 1, startable, assigned, actions, out);
                actions.pop();
            }
        }
        assigned[site] = false;
    }

    fn advance(&self, s: &State, actions: &[Action]) -> Option<State> {
        let mut next = s.clone();
        for a in actions {
            match *a {
                Action::Gate { gate, sites, arity } => {
                    let d = self.c.gates[gate].duration as u8;
                    for &p in &sites[..arity] {
                        next.busy[p] = d;
                        next.pending[p] = Pending::Gate(gate as u8);
                    }
                    next.running |= 1 << gate;
                }
                Action::Swap(a, b) => {
                    let d = self.p.t_swap as u8;
                    next.busy[a] = d;
                    next.busy[b] = d;
                    next.pending[a] = Pending::Swap(b as u8);
                    next.pending[b] = Pending::Swap(a as u8);
                }
                Action::Move { site, to } => {
                    next.busy[site] = self.p.t_disp as u8;
                    next.pending[site] = Pending::Move(to);
                }
            }
        }
        let mut moved = false;
        for p in 0..self.n {
            if next.busy[p] == 0 {
                continue;
            }
            next.busy[p] -= 1;
            if next.busy[p] > 0 {
                continue;
            }
            match std::mem::replace(&mut next.pending[p], Pending::None) {
                Pending::None => {}
                Pending::Gate(g) => {
                    next.running &= !(1 << g);
                    next.done |= 1 << g;
                }
                Pending::Swap(other) => {
                    let other = other as usize;
                    if other > p {
                        next.occupant.swap(p, other);
                    }
                }
                Pending::Move(to) => {
                    next.offset[p] = to;
                    moved = true;
                }
            }
        }
        if moved && !self.rows_ordered(&next) {
            return None;
        }
        Some(next)
    }

    /// Lower bound on the steps still needed before every gate finishes.
    fn remaining_lb(&self, s: &State) -> usize {
        let fix = if self.displacements {
            self.p.t_swap.min(self.p.t_disp)
        } else {
            self.p.t_swap
        };
        let mut finish = vec![0usize; self.c.len()];
        let mut worst = 0;
        for (gi, gate) in self.c.gates.iter().enumerate() {
            let bit = 1u64 << gi;
            if s.done & bit != 0 {
                continue;
            }
            let sites: Vec<usize> = gate.operands.iter().map(|&q| self.site_of(s, q)).collect();
            if s.running & bit != 0 {
                finish[gi] = s.busy[sites[0]] as usize;
            } else {
                let mut start = (0..gi)
                    .filter(|&g| self.preds[gi] >> g & 1 == 1)
                    .map(|g| finish[g])
                    .max()
                    .unwrap_or(0);
                let mut relocating = false;
                for &p in &sites {
                    if matches!(s.pending[p], Pending::Swap(_) | Pending::Move(_)) {
                        relocating = true;
                        start = start.max(s.busy[p] as usize);
                    }
                }
                if let [a, b] = sites[..] {
                    if !relocating && !self.aligned(s, a, b) {
                        // Each swap round brings the operands at most two hops closer.
                        let hops = self.hops(a, b);
                        start = start.max(if hops <= 1 { fix } else { hops / 2 * self.p.t_swap });
                    }
                }
                finish[gi] = start + gate.duration;
            }
            worst = worst.max(finish[gi]);
        }
        worst
    }

    fn swap_cost(&self) -> f64 {
        -self.p.f_swap.ln()
    }

    fn move_cost(&self) -> f64 {
        -self.p.f_disp.ln()
    }
}

fn count(actions: &[Action]) -> (u32, u32) {
    actions.iter().fold((0, 0), |(s, m), a| match a {
        Action::Swap(..) => (s + 1, m),
        Action::Move { .. } => (s, m + 1),
        Action::Gate { .. } => (s, m),
    })
}

type Found = (Vec<Vec<Node>>, usize, usize);

const COST_EPS: f64 = 1e-12;

/// Layered search over schedules finishing within `bound` steps, pruning
/// states whose remaining work cannot fit. With `cheapest = None` stops at the
/// first step where some state has finished every gate. Otherwise keeps the
/// cheapest path per state, drops partial schedules that already cost at
/// least as much as the best finished one (or the given incumbent) and picks
/// the cheapest finished node. A state already reached at an earlier step for
/// no more cost is skipped, since it has more time left. Returns (layers,
/// final layer index, final node index).
fn search(
    sr: &Search,
    placement: &Placement,
    bound: usize,
    cheapest: Option<f64>,
) -> Result<Option<Found>> {
    let starts = sr.initial_states(placement)?;
    let mut layers: Vec<Vec<Node>> = vec![starts
        .into_iter()
        .map(|state| Node {
            state,
            parent: usize::MAX,
            actions: Vec::new(),
            swaps: 0,
            moves: 0,
        })
        .collect()];
    let node_cost = |n: &Node| n.swaps as f64 * sr.swap_cost() + n.moves as f64 * sr.move_cost();

    let mut best: Option<(f64, usize, usize)> = None;
    if sr.all_done == 0 {
        return Ok(Some((layers, 0, 0)));
    }
    let mut seen: HashMap<State, f64> = layers[0].iter().map(|n| (n.state.clone(), 0.0)).collect();
    let mut successors = Vec::new();
    for t in 1..=bound {
        let limit = match (cheapest, best) {
            (None, _) => f64::INFINITY,
            (Some(inc), None) => inc,
            (Some(inc), Some((b, _, _))) => inc.min(b),
        };
        let mut index: HashMap<State, usize> = HashMap::new();
        let mut layer: Vec<Node> = Vec::new();
        for (pi, node) in layers[t - 1].iter().enumerate() {
            if node.state.done == sr.all_done {
                continue;
            }
            successors.clear();
            sr.expand(&node.state, &mut successors);
            for (state, actions) in successors.drain(..) {
                if state.done != sr.all_done && t + sr.remaining_lb(&state) > bound {
                    continue;
                }
                let (ds, dm) = count(&actions);
                let candidate = Node {
                    state,
                    parent: pi,
                    actions,
                    swaps: node.swaps + ds,
                    moves: node.moves + dm,
                };
                let cost = node_cost(&candidate);
                if cost > limit - COST_EPS {
                    continue;
                }
                match index.get(&candidate.state) {
                    Some(&i) => {
                        if cheapest.is_some() && cost < node_cost(&layer[i]) - COST_EPS {
                            layer[i] = candidate;
                        }
                    }
                    None => {
                        if seen.get(&candidate.state).is_some_and(|&c| c <= cost + COST_EPS) {
                            continue;
                        }
                        if seen.len() + layer.len() >= sr.max_states {
                            return Err(Error::Capacity(format!(
                                "search exceeded {} states at step {t} of {bound}",
                                sr.max_states
                            )));
                        }
                        index.insert(candidate.state.clone(), layer.len());
                        layer.push(candidate);
                    }
                }
            }
        }
        for (i, node) in layer.iter().enumerate() {
            let cost = node_cost(node);
            let entry = seen.entry(node.state.clone()).or_insert(cost);
            *entry = entry.min(cost);
            if node.state.done == sr.all_done && best.map_or(true, |(b, _, _)| cost < b - COST_EPS) {
                best = Some((cost, t, i));
            }
        }
        layers.push(layer);
        if cheapest.is_none() && best.is_some() {
            break;
        }
    }
    Ok(best.map(|(_, t, i)| (layers, t, i)))
}

fn witness(
    sr: &Search,
    g: &GridTopology,
    layers: &[Vec<Node>],
    last_layer: usize,
    last: usize,
    horizon: usize,
) -> MappingResult {
    let mut path = Vec::new();
    let (mut t, mut i) = (last_layer, last);
    while t > 0 {
        let node = &layers[t][i];
        path.push((t, node.actions.clone()));
        i = node.parent;
        t -= 1;
    }
    path.reverse();
    let start = &layers[0][i].state;

    let n = sr.n;
    let mut placement = vec![usize::MAX; n];
    let mut free_sites = Vec::new();
    for site in 0..n {
        match start.occupant[site] {
            ANCILLA => free_sites.push(site),
            q => placement[q as usize] = site,
        }
    }
    for (slot, site) in placement[sr.c.qubit_count..].iter_mut().zip(free_sites) {
        *slot = site;
    }

    let makespan_layer = last_layer;
    let mut gates = Vec::new();
    let mut swaps = Vec::new();
    let mut displacements = Vec::new();
    for (t, actions) in &path {
        for a in actions {
            match *a {
                Action::Gate { gate, sites, arity } => {
                    let ops = &sr.c.gates[gate].operands;
                    // sites were recorded in operand order
                    debug_assert_eq!(ops.len(), arity);
                    gates.push(ScheduledGate {
                        gate,
                        start: *t,
                        sites: sites[..arity].to_vec(),
                    })
                }
                Action::Swap(a, b) => {
                    let step = t + sr.p.t_swap - 1;
                    if step < makespan_layer {
                        swaps.push(SwapEvent {
                            edge: Edge::new(a, b),
                            step,
                        });
                    }
                }
                Action::Move { site, to } => {
                    let step = t + sr.p.t_disp - 1;
                    if step < makespan_layer {
                        displacements.push((site, step, to as i64));
                    }
                }
            }
        }
    }
    gates.sort_by_key(|g| g.gate);
    swaps.sort_by_key(|s| (s.step, s.edge));

    let mut offsets = vec![vec![0i64; n]; horizon];
    displacements.sort_by_key(|&(site, step, _)| (step, site));
    let mut events = Vec::new();
    for &(site, step, to) in &displacements {
        let from = offsets[step - 1][site];
        for row in offsets.iter_mut().skip(step) {
            row[site] = to;
        }
        events.push(DisplacementEvent {
            site,
            step,
            from,
            to,
        });
    }
    let makespan = gates
        .iter()
        .map(|g| g.start + sr.c.gates[g.gate].duration - 1)
        .max()
        .unwrap_or(0);
    let mut res = MappingResult {
        rows: g.rows(),
        cols: g.cols(),
        horizon,
        placement,
        offsets,
        gates,
        swaps,
        displacements: events,
        makespan,
        fidelity: 1.0,
        stats: SolverStats {
            solver_calls: 0,
            wall_s: 0.0,
            final_horizon: horizon,
            optimal: true,
        },
    };
    res.fidelity = crate::verify::compute_fidelity(&res, sr.c, sr.p);
    res
}

/// Minimal makespan over all schedules.
pub fn brute_force_optimal_depth(
    c: &QuantumCircuit,
    g: &GridTopology,
    p: &TechnologyParams,
    opts: &OracleOptions,
) -> Result<usize> {
    Ok(brute_force_schedule(c, g, p, opts)?.makespan)
}

/// A makespan-optimal schedule.
pub fn brute_force_schedule(
    c: &QuantumCircuit,
    g: &GridTopology,
    p: &TechnologyParams,
    opts: &OracleOptions,
) -> Result<MappingResult> {
    let sr = Search::new(c, g, p, opts)?;
    for bound in 0..=opts.limits.max_horizon {
        if let Some((layers, t, i)) = search(&sr, &opts.placement, bound, None)? {
            return Ok(witness(&sr, g, &layers, t, i, t));
        }
    }
    Err(Error::Capacity(format!(
        "no schedule completes within {} steps",
        opts.limits.max_horizon
    )))
}

/// Highest achievable fidelity among schedules finishing within `horizon`,
/// and a schedule achieving it.
pub fn brute_force_max_fidelity_schedule(
    c: &QuantumCircuit,
    g: &GridTopology,
    p: &TechnologyParams,
    horizon: usize,
    opts: &OracleOptions,
) -> Result<MappingResult> {
    if horizon > opts.limits.max_horizon {
        return Err(Error::Capacity(format!(
            "horizon {horizon} exceeds oracle limit {}",
            opts.limits.max_horizon
        )));
    }
    let sr = Search::new(c, g, p, opts)?;
    let shortest = brute_force_schedule(c, g, p, opts)?.makespan;
    if shortest > horizon {
        return Err(Error::Capacity(format!(
            "no schedule completes within {horizon} steps"
        )));
    }
    // The cheapest schedule at the shortest makespan is a good incumbent for
    // the wider search.
    let (layers, t, i) = search(&sr, &opts.placement, shortest, Some(f64::INFINITY))?
        .expect("a schedule of the shortest makespan exists");
    let incumbent = layers[t][i].swaps as f64 * sr.swap_cost() + layers[t][i].moves as f64 * sr.move_cost();
    if horizon > shortest {
        if let Some((layers, t, i)) = search(&sr, &opts.placement, horizon, Some(incumbent))? {
            return Ok(witness(&sr, g, &layers, t, i, horizon));
        }
    }
    Ok(witness(&sr, g, &layers, t, i, horizon))
}

pub fn brute_force_max_fidelity(
    c: &QuantumCircuit,
    g: &GridTopology,
    p: &TechnologyParams,
    horizon: usize,
    opts: &OracleOptions,
) -> Result<f64> {
    Ok(brute_force_max_fidelity_schedule(c, g, p, horizon, opts)?.fidelity)
}
