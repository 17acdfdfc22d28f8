//! Swap-only versus swap-plus-displacement comparison over a parameter grid.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::circuit::{parse_circuit, QuantumCircuit};
use crate::error::{Error, Result};
use crate::schedule::{Objective, TechnologyParams};
use crate::solver::{map_circuit, SolveConfig};
use crate::topology::{build_grid, grid_for_circuit};

pub const CSV_HEADER: [&str; 16] = [
    "circuit",
    "rows",
    "cols",
    "t_swap",
    "t_disp",
    "ratio",
    "f_swap",
    "f_disp",
    "depth_swap_only",
    "depth_both",
    "depth_reduction",
    "fid_swap_only",
    "fid_both",
    "fid_improvement",
    "status",
    "wall_s",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Timeout,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub circuit: String,
    pub rows: usize,
    pub cols: usize,
    pub t_swap: usize,
    pub t_disp: usize,
    pub ratio: f64,
    pub f_swap: f64,
    pub f_disp: f64,
    pub depth_swap_only: Option<usize>,
    pub depth_both: Option<usize>,
    pub depth_reduction: Option<f64>,
    pub fid_swap_only: Option<f64>,
    pub fid_both: Option<f64>,
    pub fid_improvement: Option<f64>,
    pub status: Status,
    pub wall_s: f64,
    /// Failure message for non-ok rows; not part of the CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Sweep definition. Every field can come from a JSON config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub t_swap: Vec<usize>,
    pub t_disp: Vec<usize>,
    pub f_swap: Vec<f64>,
    pub f_disp: f64,
    /// Grid override; both must be set to take effect.
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    /// Fidelities are compared at horizon `depth_swap_only + fidelity_slack`.
    pub fidelity_slack: usize,
    /// Skip the fidelity solves and leave those columns empty.
    pub skip_fidelity: bool,
    pub workers: usize,
    pub solve: SolveConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            t_swap: vec![1, 2, 3, 4],
            t_disp: vec![1, 2, 3, 4],
            f_swap: vec![0.95],
            f_disp: 1.0,
            rows: None,
            cols: None,
            fidelity_slack: 0,
            skip_fidelity: false,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            solve: SolveConfig::default(),
        }
    }
}

pub const SWEEP_SWAP_FIDELITIES: [f64; 5] = [0.999, 0.995, 0.99, 0.97, 0.95];

#[derive(Debug, Clone)]
pub struct SuiteEntry {
    pub id: String,
    pub circuit: QuantumCircuit,
}

/// Reads a manifest (a JSON list of circuit paths, relative to the manifest's
/// directory) and the circuits it names.
pub fn load_suite(manifest: &Path) -> Result<Vec<SuiteEntry>> {
    let text = std::fs::read_to_string(manifest)?;
    let paths: Vec<PathBuf> = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: format!("suite manifest: {e}"),
    })?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    paths
        .iter()
        .map(|p| {
            let path = if p.is_absolute() { p.clone() } else { base.join(p) };
            let text = std::fs::read_to_string(&path)?;
            let circuit = parse_circuit(&text)?;
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            Ok(SuiteEntry { id, circuit })
        })
        .collect()
}

struct Job<'a> {
    index: usize,
    entry: &'a SuiteEntry,
    t_swap: usize,
    t_disp: usize,
}

/// Runs every (circuit, t_swap, t_disp) instance on a bounded worker pool.
/// Rows come back ordered by suite position, then runtimes, then f_swap.
pub fn run_suite(suite: &[SuiteEntry], cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    if cfg.f_swap.is_empty() {
        return Err(Error::Argument("f_swap list is empty".into()));
    }
    let mut jobs = Vec::new();
    for (index, entry) in suite.iter().enumerate() {
        for &t_swap in &cfg.t_swap {
            for &t_disp in &cfg.t_disp {
                TechnologyParams::with_runtimes(t_swap, t_disp).validate()?;
                jobs.push(Job {
                    index,
                    entry,
                    t_swap,
                    t_disp,
                });
            }
        }
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<BTreeMap<(usize, usize, usize), Vec<BenchRecord>>> = Mutex::default();
    let workers = cfg.workers.clamp(1, jobs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let rows = run_instance(job.entry, job.t_swap, job.t_disp, cfg);
                results
                    .lock()
                    .expect("no worker panics while holding the lock")
                    .insert((job.index, job.t_swap, job.t_disp), rows);
            });
        }
    });
    Ok(results
        .into_inner()
        .expect("workers finished")
        .into_values()
        .flatten()
        .collect())
}

fn status_of(e: &Error) -> Status {
    match e {
        Error::Timeout | Error::HorizonExhausted(_) => Status::Timeout,
        _ => Status::Error,
    }
}

fn run_instance(entry: &SuiteEntry, t_swap: usize, t_disp: usize, cfg: &BenchConfig) -> Vec<BenchRecord> {
    let started = Instant::now();
    let (rows, cols) = match (cfg.rows, cfg.cols) {
        (Some(r), Some(c)) => (r, c),
        _ => grid_for_circuit(entry.circuit.qubit_count),
    };
    let template = |f_swap: f64| BenchRecord {
        circuit: entry.id.clone(),
        rows,
        cols,
        t_swap,
        t_disp,
        ratio: t_swap as f64 / t_disp as f64,
        f_swap,
        f_disp: cfg.f_disp,
        depth_swap_only: None,
        depth_both: None,
        depth_reduction: None,
        fid_swap_only: None,
        fid_both: None,
        fid_improvement: None,
        status: Status::Ok,
        wall_s: 0.0,
        error: None,
    };
    let fail = |e: Error| -> Vec<BenchRecord> {
        cfg.f_swap
            .iter()
            .map(|&f| BenchRecord {
                status: status_of(&e),
                error: Some(e.to_string()),
                wall_s: started.elapsed().as_secs_f64(),
                ..template(f)
            })
            .collect()
    };
    let g = match build_grid(rows, cols) {
        Ok(g) => g,
        Err(e) => return fail(e),
    };
    let c = &entry.circuit;
    let p = TechnologyParams::with_runtimes(t_swap, t_disp);
    let depth_cfg = |displacements: bool| SolveConfig {
        objective: Objective::Depth,
        displacements,
        ..cfg.solve.clone()
    };
    let swap_only = match map_circuit(c, &g, &p, &depth_cfg(false)) {
        Ok(r) => r.makespan,
        Err(e) => return fail(e),
    };
    let both = match map_circuit(c, &g, &p, &depth_cfg(true)) {
        Ok(r) => r.makespan,
        Err(e) => return fail(e),
    };
    let reduction = if swap_only == 0 {
        0.0
    } else {
        (swap_only as f64 - both as f64) / swap_only as f64
    };
    let horizon = swap_only + cfg.fidelity_slack;

    let mut out = Vec::new();
    for &f_swap in &cfg.f_swap {
        let mut rec = BenchRecord {
            depth_swap_only: Some(swap_only),
            depth_both: Some(both),
            depth_reduction: Some(reduction),
            ..template(f_swap)
        };
        if !cfg.skip_fidelity && !c.is_empty() {
            let fp = TechnologyParams {
                f_swap,
                f_disp: cfg.f_disp,
                ..p.clone()
            };
            let fid_cfg = |displacements: bool| SolveConfig {
                objective: Objective::Fidelity,
                displacements,
                horizon: Some(horizon),
                ..cfg.solve.clone()
            };
            let pair = map_circuit(c, &g, &fp, &fid_cfg(false))
                .and_then(|a| Ok((a, map_circuit(c, &g, &fp, &fid_cfg(true))?)));
            match pair {
                Ok((a, b)) => {
                    rec.fid_swap_only = Some(a.fidelity);
                    rec.fid_both = Some(b.fidelity);
                    rec.fid_improvement = Some((b.fidelity - a.fidelity) / a.fidelity);
                    if !(a.stats.optimal && b.stats.optimal) {
                        rec.status = Status::Timeout;
                    }
                }
                Err(e) => {
                    rec.status = status_of(&e);
                    rec.error = Some(e.to_string());
                }
            }
        }
        rec.wall_s = started.elapsed().as_secs_f64();
        out.push(rec);
    }
    out
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

pub fn write_csv<W: std::io::Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in records {
        let status = match r.status {
            Status::Ok => "ok",
            Status::Timeout => "timeout",
            Status::Error => "error",
        };
        w.write_record([
            r.circuit.clone(),
            r.rows.to_string(),
            r.cols.to_string(),
            r.t_swap.to_string(),
            r.t_disp.to_string(),
            r.ratio.to_string(),
            r.f_swap.to_string(),
            r.f_disp.to_string(),
            opt(&r.depth_swap_only),
            opt(&r.depth_both),
            opt(&r.depth_reduction),
            opt(&r.fid_swap_only),
            opt(&r.fid_both),
            opt(&r.fid_improvement),
            status.to_string(),
            format!("{:.3}", r.wall_s),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Mean and max of the two headline metrics over one group of ok rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub key: String,
    pub count: usize,
    pub mean_depth_reduction: f64,
    pub max_depth_reduction: f64,
    pub mean_fid_improvement: Option<f64>,
    pub max_fid_improvement: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub by_runtimes: Vec<Aggregate>,
    pub by_ratio: Vec<Aggregate>,
}

fn aggregate<'a>(key: String, rows: impl Iterator<Item = &'a BenchRecord>) -> Option<Aggregate> {
    let rows: Vec<_> = rows.filter(|r| r.status == Status::Ok).collect();
    if rows.is_empty() {
        return None;
    }
    let depth: Vec<f64> = rows.iter().filter_map(|r| r.depth_reduction).collect();
    let fid: Vec<f64> = rows.iter().filter_map(|r| r.fid_improvement).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some(Aggregate {
        key,
        count: rows.len(),
        mean_depth_reduction: mean(&depth),
        max_depth_reduction: max(&depth),
        mean_fid_improvement: (!fid.is_empty()).then(|| mean(&fid)),
        max_fid_improvement: (!fid.is_empty()).then(|| max(&fid)),
    })
}

/// Groups ok rows by runtime pair and by runtime ratio.
pub fn summarize(records: &[BenchRecord]) -> Summary {
    let mut pairs: Vec<(usize, usize)> = records.iter().map(|r| (r.t_swap, r.t_disp)).collect();
    pairs.sort_unstable();
    pairs.dedup();
    let mut ratios: Vec<f64> = records.iter().map(|r| r.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    ratios.dedup();
    Summary {
        by_runtimes: pairs
            .into_iter()
            .filter_map(|(s, d)| {
                aggregate(
                    format!("t_swap={s},t_disp={d}"),
                    records.iter().filter(|r| (r.t_swap, r.t_disp) == (s, d)),
                )
            })
            .collect(),
        by_ratio: ratios
            .into_iter()
            .filter_map(|x| aggregate(format!("ratio={x}"), records.iter().filter(|r| r.ratio == x)))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t_swap: usize, t_disp: usize, reduction: f64) -> BenchRecord {
        BenchRecord {
            circuit: "c".into(),
            rows: 2,
            cols: 3,
            t_swap,
            t_disp,
            ratio: t_swap as f64 / t_disp as f64,
            f_swap: 0.95,
            f_disp: 1.0,
            depth_swap_only: Some(10),
            depth_both: Some(10),
            depth_reduction: Some(reduction),
            fid_swap_only: None,
            fid_both: None,
            fid_improvement: None,
            status: Status::Ok,
            wall_s: 0.5,
            error: None,
        }
    }

    #[test]
    fn empty_suite_writes_header_only() {
        let rows = run_suite(&[], &BenchConfig::default()).unwrap();
        assert!(rows.is_empty());
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "circuit,rows,cols,t_swap,t_disp,ratio,f_swap,f_disp,depth_swap_only,depth_both,\
             depth_reduction,fid_swap_only,fid_both,fid_improvement,status,wall_s\n"
        );
    }

    #[test]
    fn csv_leaves_missing_values_blank() {
        let mut r = record(1, 2, 0.0);
        r.depth_reduction = None;
        r.status = Status::Timeout;
        let mut buf = Vec::new();
        write_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "c,2,3,1,2,0.5,0.95,1,10,10,,,,,timeout,0.500"
        );
    }

    #[test]
    fn summary_groups_by_pair_and_ratio() {
        let rows = vec![record(1, 1, 0.2), record(2, 2, 0.0), record(1, 1, 0.4), record(2, 1, 0.1)];
        let s = summarize(&rows);
        assert_eq!(s.by_runtimes.len(), 3);
        let a = &s.by_runtimes[0];
        assert_eq!(a.key, "t_swap=1,t_disp=1");
        assert_eq!(a.count, 2);
        assert!((a.mean_depth_reduction - 0.3).abs() < 1e-12);
        assert!((a.max_depth_reduction - 0.4).abs() < 1e-12);
        assert_eq!(a.mean_fid_improvement, None);
        let r1 = s.by_ratio.iter().find(|a| a.key == "ratio=1").unwrap();
        assert_eq!(r1.count, 3);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(serde_json::from_str::<BenchConfig>(r#"{"t_swap":[1],"nope":1}"#).is_err());
        let c: BenchConfig = serde_json::from_str(r#"{"t_swap":[2],"workers":3}"#).unwrap();
        assert_eq!((c.t_swap, c.t_disp.len(), c.workers), (vec![2], 4, 3));
    }
}
