use std::path::PathBuf;
use std::process::Command;

use qmap_cli::{run, EXIT_NO_SCHEDULE, EXIT_OK, EXIT_USAGE, EXIT_VERIFY};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

/// Exit code, stdout and stderr of one in-process invocation.
fn qmap(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("qmap").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn map_fixture(extra: &[&str]) -> (i32, String, String) {
    let circuit = fixture("displacement_fixture.json");
    let mut args = vec!["map", "--circuit", &circuit, "--rows", "2", "--cols", "3"];
    args.extend_from_slice(extra);
    qmap(&args)
}

#[test]
fn map_reports_depth_per_mode() {
    let (code, out, err) = map_fixture(&["--displacements", "off"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(err.contains("depth=5"), "{err}");
    let res: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(res["makespan"], 5);

    let (code, _, err) = map_fixture(&["--displacements", "on"]);
    assert_eq!(code, EXIT_OK);
    assert!(err.contains("depth=4"), "{err}");
}

#[test]
fn map_writes_result_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("res.json");
    let (code, out, _) = map_fixture(&["--out", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("depth=4 "), "{out}");
    assert!(out.contains("grid=2x3"), "{out}");
    assert!(std::fs::read_to_string(&path).unwrap().contains("\"makespan\": 4"));
}

#[test]
fn argument_errors_exit_2() {
    assert_eq!(qmap(&["map"]).0, EXIT_USAGE);
    assert_eq!(qmap(&["map", "--bogus"]).0, EXIT_USAGE);
    assert_eq!(qmap(&["map", "--circuit", "/nonexistent.json"]).0, EXIT_USAGE);
    assert_eq!(qmap(&["bench"]).0, EXIT_USAGE);
    // Six qubits do not fit on a 1x2 grid.
    assert_eq!(map_fixture(&["--rows", "1", "--cols", "2"]).0, EXIT_USAGE);
}

#[test]
fn horizon_cap_exits_3() {
    let (code, _, err) = map_fixture(&["--t-max", "3"]);
    assert_eq!(code, EXIT_NO_SCHEDULE, "{err}");
}

#[test]
fn verify_accepts_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("res.json");
    let res_path = path.to_str().unwrap();
    assert_eq!(map_fixture(&["--out", res_path]).0, EXIT_OK);
    let circuit = fixture("displacement_fixture.json");

    let (code, out, _) = qmap(&["verify", "--result", res_path, "--circuit", &circuit]);
    assert_eq!(code, EXIT_OK);
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["violations"], serde_json::json!([]));

    let mut res: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    res["makespan"] = serde_json::json!(9);
    std::fs::write(&path, res.to_string()).unwrap();
    let (code, out, _) = qmap(&["verify", "--result", res_path, "--circuit", &circuit]);
    assert_eq!(code, EXIT_VERIFY);
    assert!(out.contains("record-mismatch"), "{out}");
}

#[test]
fn gen_families() {
    let (code, out, _) = qmap(&["gen", "qft", "--qubits", "3"]);
    assert_eq!(code, EXIT_OK);
    let c = qmap_core::parse_circuit(&out).unwrap();
    assert_eq!((c.qubit_count, c.len()), (3, 7));

    let (_, out, _) = qmap(&["gen", "random", "--qubits", "2", "--layers", "5", "--seed", "1"]);
    let c = qmap_core::parse_circuit(&out).unwrap();
    assert_eq!(c.len(), 5);
    assert!(c.gates.iter().all(|g| g.operands == [0, 1]));

    let (_, out, _) = qmap(&["gen", "bv", "--qubits", "3", "--secret", "11"]);
    let c = qmap_core::parse_circuit(&out).unwrap();
    assert_eq!(c.gates.iter().filter(|g| g.kind == "cx").count(), 2);

    assert_eq!(qmap(&["gen", "bv", "--qubits", "3", "--secret", "1"]).0, EXIT_USAGE);
}

#[test]
fn empty_suite_prints_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite.json");
    std::fs::write(&suite, "[]").unwrap();
    let (code, out, _) = qmap(&["bench", "--suite", suite.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        out.trim(),
        "circuit,rows,cols,t_swap,t_disp,ratio,f_swap,f_disp,depth_swap_only,depth_both,\
         depth_reduction,fid_swap_only,fid_both,fid_improvement,status,wall_s"
    );
}

#[test]
fn bench_fixture_rows() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite.json");
    std::fs::write(&suite, format!("[{:?}]", fixture("displacement_fixture.json"))).unwrap();
    let csv = dir.path().join("out.csv");
    let (code, _, err) = qmap(&[
        "bench",
        "--suite",
        suite.to_str().unwrap(),
        "--t-swap",
        "1,2",
        "--t-disp",
        "1,2",
        "--rows",
        "2",
        "--cols",
        "3",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let mut reader = csv::Reader::from_path(&csv).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    let first = &rows[0];
    assert_eq!(&first[0], "displacement_fixture");
    assert_eq!((&first[3], &first[4]), ("1", "1"));
    assert_eq!((&first[8], &first[9]), ("5", "4"));
    assert_eq!(first[10].parse::<f64>().unwrap(), 0.2);
    assert!(first[13].parse::<f64>().unwrap() > 0.0);
    assert!(rows.iter().all(|r| &r[14] == "ok"));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("map.json");
    let body = serde_json::json!({
        "circuit": fixture("displacement_fixture.json"),
        "rows": 2,
        "cols": 3,
        "displacements": "off",
    });
    std::fs::write(&config, body.to_string()).unwrap();
    let (code, _, err) = qmap(&["map", "--config", config.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(err.contains("depth=5"), "{err}");
    // Flags win over the file.
    let (_, _, err) = qmap(&["map", "--config", config.to_str().unwrap(), "--displacements", "on"]);
    assert!(err.contains("depth=4"), "{err}");

    std::fs::write(&config, r#"{"colour": 1}"#).unwrap();
    assert_eq!(qmap(&["map", "--config", config.to_str().unwrap()]).0, EXIT_USAGE);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_qmap");
    let status = Command::new(bin).arg("map").output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_USAGE));
    let status = Command::new(bin)
        .args(["gen", "qft", "--qubits", "2"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&status.stdout).contains("\"qubits\": 2"));
}
