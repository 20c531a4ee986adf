use std::process::{Command, Output};

use qcsim_bench::record::BenchRecord;

fn qcsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn exact_run_reports_expectations() {
    let out = qcsim(&["run", "--generate", "ghz:10"]);
    assert!(out.status.success());
    let v = json(&out);
    let e = v["expectations"].as_array().unwrap();
    assert_eq!(e.len(), 10);
    for q in e {
        assert!((q[0].as_f64().unwrap() - 0.5).abs() < 1e-12);
        assert!((q[2].as_f64().unwrap() - 0.5).abs() < 1e-12);
    }
    assert_eq!(v["gate_ops"], 20);
}

#[test]
fn pathsum_run_from_qasm_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ghz.qasm");
    let text = "OPENQASM 2.0;\nqreg q[6];\nh q[0];\ncx q[0],q[1];\ncx q[1],q[2];\ncx q[2],q[3];\ncx q[3],q[4];\ncx q[4],q[5];\n";
    std::fs::write(&path, text).unwrap();
    let out = qcsim(&[
        "run",
        "--circuit",
        path.to_str().unwrap(),
        "--backend",
        "pathsum",
        "--partitions",
        "0-2;3-5",
        "--targets",
        "all0,all1,000111",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    assert_eq!(v["circuit"], "ghz");
    assert_eq!(v["s"], 1);
    let amps = v["amplitudes"].as_array().unwrap();
    assert!((amps[0]["re"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-10);
    assert!((amps[1]["re"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-10);
    assert!(amps[2]["re"].as_f64().unwrap().abs() < 1e-10);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["run", "--generate", "ghz:4", "--partitions", "0-1;2-3"],
        vec!["run", "--generate", "ghz:4", "--coeffs", "2"],
        vec!["run", "--generate", "ghz:4", "--ranks", "3"],
        vec!["run"],
        vec!["bench-ghz", "--n-min", "5", "--n-max", "4"],
        vec!["frobnicate"],
    ] {
        assert_eq!(qcsim(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn runtime_failures_exit_with_one() {
    let out = qcsim(&["run", "--generate", "ghz:20", "--mem-budget", "1024"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("16777216"));
}

#[test]
fn validate_writes_a_passing_report() {
    let out = qcsim(&["validate", "--max-qubits", "12"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert!(v["checks"].as_array().unwrap().len() > 10);
}

#[test]
fn ghz_bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ghz.csv");
    let out = qcsim(&[
        "bench-ghz",
        "--n-min",
        "6",
        "--n-max",
        "9",
        "--normalize-at",
        "7",
        "--backend",
        "adaptive",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let rows: Vec<BenchRecord> = csv::Reader::from_path(&csv)
        .unwrap()
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[1].normalized_time, Some(1.0));
    assert!(rows
        .iter()
        .all(|r| r.backend == "adaptive" && r.status == "ok"));
}

#[test]
fn random_bench_records_cut_counts() {
    let out = qcsim(&[
        "bench-random",
        "--rows",
        "2",
        "--cols",
        "3",
        "--depth-min",
        "2",
        "--depth-max",
        "5",
        "--coeffs",
        "4",
    ]);
    assert!(out.status.success());
    let rows: Vec<BenchRecord> = csv::Reader::from_reader(out.stdout.as_slice())
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap();
    assert_eq!(
        rows.iter().map(|r| r.depth.unwrap()).collect::<Vec<_>>(),
        vec![2, 3, 4, 5]
    );
    assert!(rows.iter().all(|r| r.s.is_some() && r.m == Some(4)));
}

#[test]
fn estimate_prints_formula_values() {
    let out = qcsim(&["estimate", "-n", "30"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("16.00 GiB"));
    let out = qcsim(&["estimate", "-n", "45", "--backend", "adaptive"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("64.00 TiB"));
}

#[test]
fn state_dump_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("state.bin");
    let out = qcsim(&[
        "run",
        "--generate",
        "random:2x3:5:9",
        "--dump",
        dump.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let s = qcsim::statevector::read_state_dump(std::fs::File::open(&dump).unwrap()).unwrap();
    let c = qcsim::circuit::gen_random_circuit(2, 3, 5, 9).unwrap();
    assert_eq!(s, qcsim::run_circuit(&c).unwrap());
}
