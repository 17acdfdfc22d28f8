//! `qmap` subcommands. Each command returns the process exit code so the
//! binary stays a thin wrapper and tests can drive commands in-process.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use qmap_core::bench::{load_suite, run_suite, summarize, write_csv, BenchConfig, SWEEP_SWAP_FIDELITIES};
use qmap_core::circuit::{gen_bv, gen_qft, gen_random_cx_layers};
use qmap_core::topology::GridSpec;
use qmap_core::verify::check_mapping;
use qmap_core::{
    build_grid, grid_for_circuit, map_circuit, parse_circuit, Error, GridTopology, MappingResult, Objective,
    Placement, QuantumCircuit, SolveConfig, TechnologyParams,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_SCHEDULE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "qmap", version, about = "Optimal qubit mapping with row displacements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Map one circuit and write the schedule as JSON.
    Map(MapArgs),
    /// Compare swap-only and displacement mapping over a parameter sweep.
    Bench(BenchArgs),
    /// Write a generated circuit.
    Gen(GenArgs),
    /// Check a schedule against its circuit and print the violations.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ObjectiveArg {
    Depth,
    Fidelity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum PlacementArg {
    Identity,
    Free,
}

/// Flags shared by every command that runs the solver.
#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
struct SolverArgs {
    /// Solver binary; falls back to $QMAP_SOLVER_PATH, then `z3` on PATH.
    #[arg(long)]
    solver: Option<PathBuf>,
    /// Time limit per solver call.
    #[arg(long)]
    solver_timeout_s: Option<f64>,
    /// Directory to keep every emitted model in.
    #[arg(long)]
    keep_smt: Option<PathBuf>,
}

impl SolverArgs {
    fn apply(&self, cfg: &mut SolveConfig) {
        if self.solver.is_some() {
            cfg.solver_path = self.solver.clone();
        }
        if self.solver_timeout_s.is_some() {
            cfg.time_limit_s = self.solver_timeout_s;
        }
        if self.keep_smt.is_some() {
            cfg.keep_smt = self.keep_smt.clone();
        }
    }
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MapArgs {
    /// JSON file with default values for any of these flags.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Topology JSON `{"rows": R, "cols": C}`.
    #[arg(long)]
    topology: Option<PathBuf>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    t_swap: Option<usize>,
    #[arg(long)]
    t_disp: Option<usize>,
    #[arg(long)]
    f_swap: Option<f64>,
    #[arg(long)]
    f_disp: Option<f64>,
    #[arg(long, value_enum)]
    objective: Option<ObjectiveArg>,
    #[arg(long, value_enum)]
    displacements: Option<Switch>,
    #[arg(long, value_enum)]
    placement: Option<PlacementArg>,
    /// Fixed horizon for the fidelity objective.
    #[arg(long)]
    horizon: Option<usize>,
    /// Extra steps over the optimal depth for the fidelity objective.
    #[arg(long)]
    slack: Option<usize>,
    /// Largest horizon tried before giving up.
    #[arg(long)]
    t_max: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BenchArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// JSON list of circuit files, relative to the manifest.
    #[arg(long)]
    suite: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    t_swap: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    t_disp: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    f_swap: Option<Vec<f64>>,
    /// Sweep f_swap over 0.999, 0.995, 0.99, 0.97, 0.95.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    fidelity_sweep: Option<bool>,
    #[arg(long)]
    f_disp: Option<f64>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    fidelity_slack: Option<usize>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    skip_fidelity: Option<bool>,
    #[arg(long)]
    workers: Option<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    /// Grouped means and maxima as JSON.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(subcommand)]
    family: GenFamily,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum GenFamily {
    Qft {
        #[arg(long)]
        qubits: usize,
    },
    Bv {
        #[arg(long)]
        qubits: usize,
        /// Bit string of length qubits - 1.
        #[arg(long)]
        secret: String,
    },
    Random {
        #[arg(long)]
        qubits: usize,
        #[arg(long)]
        layers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    result: PathBuf,
    #[arg(long)]
    circuit: PathBuf,
    /// Technology parameters JSON; runtime flags override it.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    t_swap: Option<usize>,
    #[arg(long)]
    t_disp: Option<usize>,
    #[arg(long)]
    topology: Option<PathBuf>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Argument(_)
            | Error::Parse { .. }
            | Error::Validation { .. }
            | Error::UnsupportedGate { .. }
            | Error::Capacity(_) => EXIT_USAGE,
            Error::HorizonExhausted(_) | Error::Timeout => EXIT_NO_SCHEDULE,
            Error::Verification(_) => EXIT_VERIFY,
            _ => EXIT_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Runs `qmap` with the given arguments (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Map(a) => cmd_map(a, out, err),
        Command::Bench(a) => cmd_bench(a, out, err),
        Command::Gen(a) => cmd_gen(a, out),
        Command::Verify(a) => cmd_verify(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> std::result::Result<T, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Fills flags missing on the command line from a JSON config file.
fn with_config<T: Serialize + DeserializeOwned>(args: T, config: Option<&Path>) -> std::result::Result<T, Failure> {
    let Some(path) = config else { return Ok(args) };
    let mut merged: serde_json::Value = read_json(path)?;
    let serde_json::Value::Object(base) = &mut merged else {
        return Err(usage(format!("{}: config must be a JSON object", path.display())));
    };
    let given = serde_json::to_value(&args).expect("flags serialize");
    if let serde_json::Value::Object(given) = given {
        for (k, v) in given {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
    serde_json::from_value(merged).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write) -> CmdResult {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn grid(
    topology: Option<&Path>,
    rows: Option<usize>,
    cols: Option<usize>,
    fallback: impl FnOnce() -> (usize, usize),
) -> std::result::Result<GridTopology, Failure> {
    let (r, c) = match (rows, cols) {
        (Some(r), Some(c)) => (r, c),
        (None, None) => match topology {
            Some(p) => {
                let spec: GridSpec = read_json(p)?;
                (spec.rows, spec.cols)
            }
            None => fallback(),
        },
        _ => return Err(usage("--rows and --cols must be given together")),
    };
    Ok(build_grid(r, c)?)
}

fn load_circuit(path: &Path) -> std::result::Result<QuantumCircuit, Failure> {
    Ok(parse_circuit(&read(path)?)?)
}

fn cmd_map(args: MapArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let config = args.config.clone();
    let a = with_config(args, config.as_deref())?;
    let circuit_path = a.circuit.as_deref().ok_or_else(|| usage("map needs --circuit FILE\n\nUsage: qmap map --circuit FILE [OPTIONS]"))?;
    let c = load_circuit(circuit_path)?;
    let g = grid(a.topology.as_deref(), a.rows, a.cols, || grid_for_circuit(c.qubit_count))?;
    let defaults = TechnologyParams::default();
    let p = TechnologyParams {
        t_swap: a.t_swap.unwrap_or(defaults.t_swap),
        t_disp: a.t_disp.unwrap_or(defaults.t_disp),
        f_swap: a.f_swap.unwrap_or(defaults.f_swap),
        f_disp: a.f_disp.unwrap_or(defaults.f_disp),
        ..defaults
    };
    p.validate()?;
    let mut cfg = SolveConfig {
        objective: match a.objective {
            Some(ObjectiveArg::Fidelity) => Objective::Fidelity,
            _ => Objective::Depth,
        },
        displacements: a.displacements != Some(Switch::Off),
        placement: match a.placement {
            Some(PlacementArg::Free) => Placement::Free,
            _ => Placement::Identity,
        },
        horizon: a.horizon,
        fidelity_horizon_slack: a.slack,
        t_max: a.t_max,
        ..SolveConfig::default()
    };
    a.solver.apply(&mut cfg);
    let res = map_circuit(&c, &g, &p, &cfg)?;
    let json = res.to_json() + "\n";
    match &a.out {
        Some(path) => std::fs::write(path, json)?,
        None => out.write_all(json.as_bytes())?,
    }
    let summary = format!(
        "depth={} fidelity={:.6} swaps={} displacements={} grid={}x{} solver_calls={}",
        res.makespan,
        res.fidelity,
        res.swaps.len(),
        res.displacements.len(),
        res.rows,
        res.cols,
        res.stats.solver_calls
    );
    // Keep stdout pure JSON when the schedule goes there.
    if a.out.is_some() {
        writeln!(out, "{summary}")?;
    } else {
        writeln!(err, "{summary}")?;
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let config = args.config.clone();
    let a = with_config(args, config.as_deref())?;
    let manifest = a.suite.as_deref().ok_or_else(|| usage("bench needs --suite FILE\n\nUsage: qmap bench --suite FILE [OPTIONS]"))?;
    let suite = load_suite(manifest)?;
    let defaults = BenchConfig::default();
    let mut cfg = BenchConfig {
        t_swap: a.t_swap.clone().unwrap_or(defaults.t_swap),
        t_disp: a.t_disp.clone().unwrap_or(defaults.t_disp),
        f_swap: if a.fidelity_sweep == Some(true) {
            SWEEP_SWAP_FIDELITIES.to_vec()
        } else {
            a.f_swap.clone().unwrap_or(defaults.f_swap)
        },
        f_disp: a.f_disp.unwrap_or(defaults.f_disp),
        rows: a.rows,
        cols: a.cols,
        fidelity_slack: a.fidelity_slack.unwrap_or(defaults.fidelity_slack),
        skip_fidelity: a.skip_fidelity.unwrap_or(false),
        workers: a.workers.unwrap_or(defaults.workers),
        solve: SolveConfig::default(),
    };
    if cfg.rows.is_some() != cfg.cols.is_some() {
        return Err(usage("--rows and --cols must be given together"));
    }
    a.solver.apply(&mut cfg.solve);
    let records = run_suite(&suite, &cfg)?;

    let mut csv = Vec::new();
    write_csv(&records, &mut csv)?;
    write_output(a.csv.as_deref(), &String::from_utf8_lossy(&csv), out)?;
    if let Some(path) = &a.json {
        std::fs::write(path, serde_json::to_string_pretty(&records).expect("records serialize"))?;
    }
    let summary = summarize(&records);
    if let Some(path) = &a.summary {
        std::fs::write(path, serde_json::to_string_pretty(&summary).expect("summary serializes"))?;
    }
    for agg in &summary.by_runtimes {
        writeln!(
            err,
            "{}: n={} mean_depth_reduction={:.4} max_depth_reduction={:.4}",
            agg.key, agg.count, agg.mean_depth_reduction, agg.max_depth_reduction
        )?;
    }
    Ok(())
}

fn cmd_gen(args: GenArgs, out: &mut dyn Write) -> CmdResult {
    let c = match args.family {
        GenFamily::Qft { qubits } => gen_qft(qubits)?,
        GenFamily::Bv { qubits, secret } => gen_bv(qubits, &secret)?,
        GenFamily::Random { qubits, layers, seed } => gen_random_cx_layers(qubits, layers, seed)?,
    };
    write_output(args.out.as_deref(), &(c.to_json() + "\n"), out)
}

fn cmd_verify(args: VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let res = MappingResult::from_json(&read(&args.result)?)?;
    let c = load_circuit(&args.circuit)?;
    let g = grid(args.topology.as_deref(), args.rows, args.cols, || (res.rows, res.cols))?;
    let mut p = match &args.params {
        Some(path) => read_json(path)?,
        None => TechnologyParams::default(),
    };
    p.t_swap = args.t_swap.unwrap_or(p.t_swap);
    p.t_disp = args.t_disp.unwrap_or(p.t_disp);
    p.validate()?;
    let report = check_mapping(&res, &c, &g, &p);
    writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("report serializes"))?;
    if report.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VERIFY,
            message: report.summary(),
        })
    }
}
