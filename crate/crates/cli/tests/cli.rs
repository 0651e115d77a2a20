use std::path::Path;
use std::process::{Command, Output};

use ahop_core::{PatternMatrix, Role};

fn ahop(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ahop"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_patterns(path: &Path, rows: &[Vec<f64>], role: Role) {
    let p = PatternMatrix::from_patterns(rows, role).unwrap();
    p.write_csv(std::fs::File::create(path).unwrap()).unwrap();
}

#[test]
fn retrieve_writes_patterns_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    write_patterns(&dir.path().join("m.csv"), &[vec![1.0, 0.0], vec![0.0, 1.0], vec![-0.5, 0.5]], Role::Memory);
    write_patterns(&dir.path().join("q.csv"), &[vec![0.9, 0.1], vec![0.2, 0.7]], Role::Query);
    let out = ahop(
        dir.path(),
        &["retrieve", "--memory", "m.csv", "--queries", "q.csv", "--beta", "0.25", "--delta-a", "1e-3", "--mode", "lowrank", "--out", "z.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let z = PatternMatrix::read_csv(std::fs::read(dir.path().join("z.csv")).unwrap().as_slice(), Role::Query).unwrap();
    assert_eq!((z.dim(), z.len()), (2, 2));
    let sidecar: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("z.csv.json")).unwrap()).unwrap();
    assert!(sidecar["g"].as_u64().unwrap() >= 1);
    assert_eq!(sidecar["r"].as_u64().unwrap(), (sidecar["g"].as_u64().unwrap() + 1) * (sidecar["g"].as_u64().unwrap() + 2) / 2);
    assert!((sidecar["delta_h"].as_f64().unwrap() - 2.0 * 3.0 * 1.0 * 1e-3).abs() < 1e-15);

    // Dense on the same input, read through the binary format.
    let m = PatternMatrix::read_csv(std::fs::read(dir.path().join("m.csv")).unwrap().as_slice(), Role::Memory).unwrap();
    m.write_binary(std::fs::File::create(dir.path().join("m.bin")).unwrap()).unwrap();
    let out = ahop(
        dir.path(),
        &["retrieve", "--memory", "m.bin", "--queries", "q.csv", "--beta", "0.25", "--mode", "dense", "--out", "zd.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let zd = PatternMatrix::read_csv(std::fs::read(dir.path().join("zd.csv")).unwrap().as_slice(), Role::Query).unwrap();
    let err = z.rows().iter().zip(zd.rows().iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err <= 6e-3);
}

#[test]
fn usage_errors_exit_2_and_runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = ahop(dir.path(), &["approx-exp", "--bound", "1", "--delta-a", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ahop(dir.path(), &["approx-exp", "--bound", "1", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ahop(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ahop(dir.path(), &["approx-exp", "--bound", "300"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: DegreeExhausted:"));
    let out = ahop(dir.path(), &["retrieve", "--memory", "missing.csv", "--queries", "q.csv", "--out", "z.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("z.csv").exists());
}

#[test]
fn config_file_supplies_flags_and_explicit_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), r#"{"bound": 2.0, "delta_a": 1e-2, "out": "from_config.json"}"#).unwrap();
    let out = ahop(dir.path(), &["approx-exp", "--config", "cfg.json", "--delta-a", "1e-4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let poly: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("from_config.json")).unwrap()).unwrap();
    assert_eq!(poly["interval_bound"].as_f64(), Some(2.0));
    assert_eq!(poly["target_rel_error"].as_f64(), Some(1e-4));
    let text = std::fs::read_to_string(dir.path().join("from_config.json")).unwrap();
    let positions: Vec<usize> = ["degree", "interval_bound", "target_rel_error", "certified_rel_error", "coeffs"]
        .iter()
        .map(|k| text.find(&format!("\"{k}\"")).unwrap())
        .collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn reduction_report_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = ahop(dir.path(), &["reduction", "--n", "16", "--plant", "case1", "--seed", "7", "--out", "r.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["agreement"].as_f64(), Some(1.0));
    assert_eq!(report["experiment"]["d"].as_u64(), Some(24));
}

#[test]
fn reduction_decides_a_stored_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst");
    std::fs::create_dir(&inst).unwrap();
    std::fs::write(inst.join("A.csv"), "1,0,1,0\n0,1,0,1\n").unwrap();
    std::fs::write(inst.join("B.csv"), "1,0,1,0\n1,1,0,0\n").unwrap();
    std::fs::write(inst.join("meta.json"), r#"{"n": 2, "d": 4, "t": 1.0, "delta": 0.05}"#).unwrap();
    let out = ahop(dir.path(), &["reduction", "--instance", "inst"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["decision"]["verdicts"][0], "Case1");
}

#[test]
fn capacity_and_sweeps_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a", "b"] {
        let cap = format!("cap_{name}.csv");
        let out = ahop(
            dir.path(),
            &["capacity", "--d", "8", "--beta", "1", "--memories", "1,2,4", "--trials", "30", "--mode", "dense", "--seed", "3", "--out", &cap, "--threads", "2"],
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let phase = format!("phase_{name}.csv");
        let out = ahop(dir.path(), &["bench-phase", "--bounds", "0.5,8", "--tau", "64", "--out", &phase]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("cap_a.csv"), read("cap_b.csv"));
    let text = String::from_utf8(read("cap_a.csv")).unwrap();
    assert!(text.starts_with("d,m,beta,M,trials,success_rate,mean_error,seed\n"));
    // Phase records differ only in the wall-time columns.
    let strip = |bytes: Vec<u8>| -> Vec<ahop_bench::ExperimentRecord> {
        ahop_bench::read_records_csv(bytes.as_slice())
            .unwrap()
            .iter()
            .map(ahop_bench::ExperimentRecord::without_timings)
            .collect()
    };
    assert_eq!(strip(read("phase_a.csv")), strip(read("phase_b.csv")));
}

#[test]
fn help_lists_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = ahop(dir.path(), &["retrieve", "--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("[default: 1/d]"));
    assert!(text.contains("[default: 0.001]"));
    let out = ahop(dir.path(), &["--version"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("(rev "));
}
