//! External SMT solver driver: runs a solver binary on emitted models,
//! decodes satisfying assignments and implements the horizon deepening and
//! cost tightening loops.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::circuit::{logical_depth, QuantumCircuit};
use crate::error::{Error, Result};
use crate::mapping::{MappingResult, ScheduledGate, SolverStats, SwapEvent};
pub use crate::model::Value;
use crate::model::{emit_solver_text, names, SymbolicModel};
use crate::schedule::{bound_cost, build_model, Objective, Placement, TechnologyParams};
use crate::topology::{extend_topology, Edge, GridTopology};
use crate::verify::{check_mapping, compute_fidelity};

pub const SOLVER_ENV: &str = "QMAP_SOLVER_PATH";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub objective: Objective,
    pub displacements: bool,
    pub placement: Placement,
    /// First horizon tried; defaults to the circuit's logical depth.
    pub t_initial: Option<usize>,
    /// Last horizon tried; defaults to a bound at which swap-only routing
    /// always succeeds.
    pub t_max: Option<usize>,
    /// Extra steps on top of the depth-optimal horizon in fidelity mode;
    /// defaults to `2 * max(t_swap, t_disp)`.
    pub fidelity_horizon_slack: Option<usize>,
    /// Fixed horizon for fidelity mode, bypassing the depth search.
    pub horizon: Option<usize>,
    pub solver_path: Option<PathBuf>,
    /// Per-call time limit in seconds.
    pub time_limit_s: Option<f64>,
    /// Directory to persist every emitted model in.
    pub keep_smt: Option<PathBuf>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            objective: Objective::Depth,
            displacements: true,
            placement: Placement::Identity,
            t_initial: None,
            t_max: None,
            fidelity_horizon_slack: None,
            horizon: None,
            solver_path: None,
            time_limit_s: Some(120.0),
            keep_smt: None,
        }
    }
}

impl SolveConfig {
    pub fn depth(displacements: bool) -> Self {
        Self {
            displacements,
            ..Self::default()
        }
    }

    pub fn fidelity(displacements: bool) -> Self {
        Self {
            objective: Objective::Fidelity,
            displacements,
            ..Self::default()
        }
    }

    pub fn with_placement(mut self, placement: Placement) -> Self {
        self.placement = placement;
        self
    }

    pub fn solver(&self) -> PathBuf {
        self.solver_path
            .clone()
            .or_else(|| std::env::var_os(SOLVER_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("z3"))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Assignment {
    values: HashMap<String, Value>,
}

impl Assignment {
    pub fn int(&self, name: &str) -> Result<i64> {
        match self.values.get(name) {
            Some(Value::Int(v)) => Ok(*v),
            other => Err(Error::Internal(format!("no integer value for {name}: {other:?}"))),
        }
    }

    pub fn bool(&self, name: &str) -> Result<bool> {
        match self.values.get(name) {
            Some(Value::Bool(v)) => Ok(*v),
            other => Err(Error::Internal(format!("no boolean value for {name}: {other:?}"))),
        }
    }

    pub fn get(&self, name: &str) -> Option<Value> {
        self.values.get(name).copied()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Value) {
        self.values.insert(name.into(), value);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolverOutcome {
    Sat(Assignment),
    Unsat,
    Timeout,
}

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn parse_sexps(text: &str) -> std::result::Result<Vec<Sexp>, String> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut chars = text.chars().peekable();
    while let Some(ch) = chars.next() {
        match ch {
            '(' => stack.push(Vec::new()),
            ')' => {
                let list = stack.pop().ok_or("unbalanced ')'")?;
                stack.last_mut().ok_or("unbalanced ')'")?.push(Sexp::List(list));
            }
            '"' => {
                let mut s = String::new();
                for c in chars.by_ref() {
                    if c == '"' {
                        break;
                    }
                    s.push(c);
                }
                stack.last_mut().unwrap().push(Sexp::Atom(format!("\"{s}\"")));
            }
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            c if c.is_whitespace() => {}
            c => {
                let mut atom = String::from(c);
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' {
                        break;
                    }
                    atom.push(c);
                    chars.next();
                }
                stack.last_mut().unwrap().push(Sexp::Atom(atom));
            }
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced '('".into());
    }
    Ok(stack.pop().unwrap())
}

fn parse_value(s: &Sexp) -> Option<Value> {
    match s {
        Sexp::Atom(a) if a == "true" => Some(Value::Bool(true)),
        Sexp::Atom(a) if a == "false" => Some(Value::Bool(false)),
        Sexp::Atom(a) => a.parse().ok().map(Value::Int),
        Sexp::List(items) => match &items[..] {
            [Sexp::Atom(minus), Sexp::Atom(v)] if minus == "-" => {
                v.parse::<i64>().ok().map(|v| Value::Int(-v))
            }
            _ => None,
        },
    }
}

/// Interprets solver stdout: the `check-sat` answer followed by an optional
/// `get-value` binding list.
pub fn parse_solver_output(output: &str) -> Result<SolverOutcome> {
    let protocol = |message: &str| Error::Protocol {
        message: message.to_string(),
        output: output.to_string(),
    };
    let items = parse_sexps(output).map_err(|m| protocol(&m))?;
    let mut iter = items.iter();
    let answer = match iter.next() {
        Some(Sexp::Atom(a)) => a.as_str(),
        _ => return Err(protocol("missing check-sat answer")),
    };
    match answer {
        "unsat" => return Ok(SolverOutcome::Unsat),
        "unknown" | "timeout" => return Ok(SolverOutcome::Timeout),
        "sat" => {}
        _ => return Err(protocol("unexpected check-sat answer")),
    }
    let mut assignment = Assignment::default();
    for item in iter {
        let Sexp::List(bindings) = item else {
            return Err(protocol("unexpected token after sat"));
        };
        if matches!(bindings.first(), Some(Sexp::Atom(a)) if a == "error") {
            return Err(protocol("solver reported an error"));
        }
        for binding in bindings {
            match binding {
                Sexp::List(pair) if pair.len() == 2 => {
                    let (Sexp::Atom(name), Some(value)) = (&pair[0], parse_value(&pair[1])) else {
                        return Err(protocol("malformed value binding"));
                    };
                    assignment.values.insert(name.clone(), value);
                }
                _ => return Err(protocol("malformed value binding")),
            }
        }
    }
    Ok(SolverOutcome::Sat(assignment))
}

/// Runs the configured solver on one script.
pub fn run_solver(doc: &str, cfg: &SolveConfig) -> Result<SolverOutcome> {
    let mut file = tempfile::Builder::new().suffix(".smt2").tempfile()?;
    file.write_all(doc.as_bytes())?;
    file.flush()?;
    run_solver_file(file.path(), cfg)
}

fn run_solver_file(path: &Path, cfg: &SolveConfig) -> Result<SolverOutcome> {
    let solver = cfg.solver();
    let mut child = Command::new(&solver)
        .arg(path)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied => {
                Error::SolverMissing(format!("{} ({e})", solver.display()))
            }
            _ => Error::Io(e),
        })?;
    let mut stdout = child.stdout.take().expect("piped stdout");
    let mut stderr = child.stderr.take().expect("piped stderr");
    let out_reader = std::thread::spawn(move || {
        let mut s = String::new();
        stdout.read_to_string(&mut s).map(|_| s)
    });
    let err_reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });

    let deadline = cfg
        .time_limit_s
        .map(|s| Instant::now() + Duration::from_secs_f64(s));
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break Some(status);
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            let _ = child.kill();
            let _ = child.wait();
            break None;
        }
        std::thread::sleep(Duration::from_millis(5));
    };
    let output = out_reader
        .join()
        .map_err(|_| Error::Internal("solver reader panicked".into()))??;
    let errors = err_reader.join().unwrap_or_default();
    if status.is_none() {
        return Ok(SolverOutcome::Timeout);
    }
    if output.trim().is_empty() {
        return Err(Error::Protocol {
            message: "solver produced no output".into(),
            output: errors,
        });
    }
    parse_solver_output(&output)
}

/// Solves one model, optionally persisting the script.
fn solve_model(m: &SymbolicModel, cfg: &SolveConfig, tag: &str) -> Result<SolverOutcome> {
    let doc = emit_solver_text(m)?;
    if let Some(dir) = &cfg.keep_smt {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{tag}.smt2")), &doc)?;
    }
    run_solver(&doc, cfg)
}

/// Builds a [`MappingResult`] from a satisfying assignment. Swaps between
/// two ancillas are dropped; ancillas are interchangeable.
pub fn decode(
    a: &Assignment,
    c: &QuantumCircuit,
    g: &GridTopology,
    p: &TechnologyParams,
    horizon: usize,
) -> Result<MappingResult> {
    let g = extend_topology(g);
    let n = g.num_sites();
    let as_site = |v: i64| -> Result<usize> {
        usize::try_from(v)
            .ok()
            .filter(|&s| s < n)
            .ok_or_else(|| Error::Internal(format!("site value {v} out of range")))
    };

    let placement = (0..n)
        .map(|q| as_site(a.int(&names::pi(q, 1))?))
        .collect::<Result<Vec<_>>>()?;
    let offsets = (1..=horizon)
        .map(|t| (0..n).map(|s| a.int(&names::eta(s, t))).collect())
        .collect::<Result<Vec<Vec<i64>>>>()?;

    let mut swaps = Vec::new();
    for t in p.t_swap.max(1)..horizon {
        for &Edge(u, v) in g.ext_edges() {
            if a.bool(&names::swap(u, v, t))? {
                swaps.push(SwapEvent {
                    edge: Edge(u, v),
                    step: t,
                });
            }
        }
    }
    // Drop ancilla-only swaps by replaying occupants.
    let mut occupant = vec![0usize; n];
    for (q, &s) in placement.iter().enumerate() {
        occupant[s] = q;
    }
    let mut kept = Vec::with_capacity(swaps.len());
    for s in swaps {
        let (qa, qb) = (occupant[s.edge.0], occupant[s.edge.1]);
        occupant.swap(s.edge.0, s.edge.1);
        if qa >= c.qubit_count && qb >= c.qubit_count {
            continue;
        }
        kept.push(s);
    }
    let mut gates = Vec::with_capacity(c.len());
    let mut makespan = 0;
    for (ci, gate) in c.gates.iter().enumerate() {
        let start = a.int(&names::z(ci))?;
        let start = usize::try_from(start)
            .map_err(|_| Error::Internal(format!("gate {ci} start {start}")))?;
        let sites = gate
            .operands
            .iter()
            .map(|&q| as_site(a.int(&names::pi(q, start))?))
            .collect::<Result<Vec<_>>>()?;
        makespan = makespan.max(start + gate.duration - 1);
        gates.push(ScheduledGate {
            gate: ci,
            start,
            sites,
        });
    }

    let mut res = MappingResult {
        rows: g.rows(),
        cols: g.cols(),
        horizon,
        placement,
        offsets,
        gates,
        swaps: kept,
        displacements: Vec::new(),
        makespan,
        fidelity: 1.0,
        stats: SolverStats::default(),
    };
    res.displacements = res.derived_displacements();
    res.fidelity = compute_fidelity(&res, c, p);
    Ok(res)
}

fn default_t_max(c: &QuantumCircuit, g: &GridTopology, p: &TechnologyParams) -> usize {
    let detour = (g.rows() + g.cols()).saturating_sub(3);
    c.gates
        .iter()
        .map(|gate| gate.duration + if gate.is_two_qubit() { detour * p.t_swap } else { 0 })
        .sum()
}

fn empty_result(c: &QuantumCircuit, g: &GridTopology, cfg: &SolveConfig) -> Result<MappingResult> {
    let n = g.num_sites();
    let mut placement = cfg
        .placement
        .pinned(c.qubit_count, n)?
        .unwrap_or_else(|| (0..c.qubit_count).collect());
    let used: Vec<bool> = (0..n).map(|s| placement.contains(&s)).collect();
    placement.extend((0..n).filter(|&s| !used[s]));
    Ok(MappingResult {
        rows: g.rows(),
        cols: g.cols(),
        horizon: 0,
        placement,
        offsets: Vec::new(),
        gates: Vec::new(),
        swaps: Vec::new(),
        displacements: Vec::new(),
        makespan: 0,
        fidelity: 1.0,
        stats: SolverStats {
            optimal: true,
            ..SolverStats::default()
        },
    })
}

struct Run<'a> {
    c: &'a QuantumCircuit,
    g: &'a GridTopology,
    p: &'a TechnologyParams,
    cfg: &'a SolveConfig,
    calls: usize,
}

impl Run<'_> {
    fn model(&self, horizon: usize, objective: Objective) -> Result<SymbolicModel> {
        build_model(
            self.c,
            self.g,
            self.p,
            horizon,
            self.cfg.displacements,
            objective,
            &self.cfg.placement,
        )
    }

    fn solve(&mut self, m: &SymbolicModel, tag: String) -> Result<SolverOutcome> {
        self.calls += 1;
        solve_model(m, self.cfg, &tag)
    }

    /// Smallest horizon with a valid schedule.
    fn deepen(&mut self) -> Result<(usize, Assignment)> {
        let start = self
            .cfg
            .t_initial
            .unwrap_or_else(|| logical_depth(self.c))
            .max(1);
        let cap = self
            .cfg
            .t_max
            .unwrap_or_else(|| default_t_max(self.c, self.g, self.p))
            .max(start);
        for horizon in start..=cap {
            let m = self.model(horizon, Objective::Depth)?;
            match self.solve(&m, format!("depth_T{horizon}"))? {
                SolverOutcome::Sat(a) => return Ok((horizon, a)),
                SolverOutcome::Unsat => continue,
                SolverOutcome::Timeout => return Err(Error::Timeout),
            }
        }
        Err(Error::HorizonExhausted(cap))
    }

    /// Cheapest schedule within `horizon` by repeated cost tightening.
    fn minimize_cost(&mut self, horizon: usize) -> Result<(Assignment, bool)> {
        let mut m = self.model(horizon, Objective::Fidelity)?;
        let mut best = match self.solve(&m, format!("fidelity_T{horizon}_0"))? {
            SolverOutcome::Sat(a) => a,
            SolverOutcome::Unsat => return Err(Error::HorizonExhausted(horizon)),
            SolverOutcome::Timeout => return Err(Error::Timeout),
        };
        let mut round = 1;
        loop {
            let cost = best.int(names::COST)?;
            if cost <= 0 {
                return Ok((best, true));
            }
            bound_cost(&mut m, cost - 1);
            match self.solve(&m, format!("fidelity_T{horizon}_{round}"))? {
                SolverOutcome::Sat(a) => best = a,
                SolverOutcome::Unsat => return Ok((best, true)),
                SolverOutcome::Timeout => return Ok((best, false)),
            }
            round += 1;
        }
    }
}

/// Maps a circuit onto the grid. Depth mode returns a makespan-optimal
/// schedule; fidelity mode returns a cost-optimal schedule within the
/// depth-optimal horizon plus slack (or the configured horizon).
pub fn map_circuit(
    c: &QuantumCircuit,
    g: &GridTopology,
    p: &TechnologyParams,
    cfg: &SolveConfig,
) -> Result<MappingResult> {
    c.validate()?;
    p.validate()?;
    if c.qubit_count > g.num_sites() {
        return Err(Error::Capacity(format!(
            "{} logical qubits do not fit on a {}x{} grid",
            c.qubit_count,
            g.rows(),
            g.cols()
        )));
    }
    if c.is_empty() {
        return empty_result(c, g, cfg);
    }
    let started = Instant::now();
    let mut run = Run {
        c,
        g,
        p,
        cfg,
        calls: 0,
    };
    let (horizon, assignment, optimal) = match cfg.objective {
        Objective::Depth => {
            let (h, a) = run.deepen()?;
            (h, a, true)
        }
        Objective::Fidelity => {
            let horizon = match cfg.horizon {
                Some(h) => h,
                None => {
                    let slack = cfg
                        .fidelity_horizon_slack
                        .unwrap_or(2 * p.t_swap.max(p.t_disp));
                    run.deepen()?.0 + slack
                }
            };
            let (a, optimal) = run.minimize_cost(horizon)?;
            (horizon, a, optimal)
        }
    };
    let mut res = decode(&assignment, c, g, p, horizon)?;
    res.stats = SolverStats {
        solver_calls: run.calls,
        wall_s: started.elapsed().as_secs_f64(),
        final_horizon: horizon,
        optimal,
    };
    let report = check_mapping(&res, c, g, p);
    if !report.is_empty() {
        return Err(Error::Verification(report.summary()));
    }
    Ok(res)
}
