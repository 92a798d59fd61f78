use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const LN2: f64 = std::f64::consts::LN_2;

fn abstain(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abstain")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let files = [
        ("p.json", r#"{"probs": [0.9, 0.1]}"#),
        ("q.json", r#"{"probs": [0.2, 0.8]}"#),
        ("rho.json", r#"{"dim": 2, "matrix": [[[0.5, 0], [0.25, 0]], [[0.25, 0], [0.5, 0]]]}"#),
        ("sigma.json", r#"{"dim": 2, "matrix": [[[0.75, 0], [0, 0]], [[0, 0], [0.25, 0]]]}"#),
        ("pure.json", r#"{"dim": 2, "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]}"#),
        ("flat4.json", r#"{"probs": [0.25, 0.25, 0.25, 0.25]}"#),
    ];
    for (name, text) in files {
        std::fs::write(dir.path().join(name), text).unwrap();
    }
    dir
}

fn first_value(o: &Output) -> f64 {
    stdout(o).trim().parse().unwrap()
}

#[test]
fn divergence_of_bernoulli_pair_in_bits() {
    let dir = workspace();
    let o = abstain(dir.path(), &["divergence", "--kind", "umegaki", "--rho", "p.json", "--sigma", "q.json", "--base", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!((first_value(&o) - 1.652_933).abs() < 5e-7);
    assert_eq!(stdout(&o).trim().len(), "1.65293250129808e0".len());
}

#[test]
fn identical_inputs_give_zero() {
    let dir = workspace();
    let o = abstain(dir.path(), &["divergence", "--kind", "sandwiched", "--s", "1.5", "--rho", "rho.json", "--sigma", "rho.json"]);
    assert!(o.status.success());
    assert!(first_value(&o).abs() < 1e-12);
}

#[test]
fn rank_deficient_input_is_an_input_error() {
    let dir = workspace();
    let o = abstain(dir.path(), &["divergence", "--kind", "umegaki", "--rho", "pure.json", "--sigma", "sigma.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("RankDeficient"));
}

#[test]
fn unsupported_order_is_an_input_error() {
    let dir = workspace();
    let o = abstain(dir.path(), &["divergence", "--kind", "petz", "--s", "3", "--rho", "rho.json", "--sigma", "sigma.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("UnsupportedOrder"));
}

#[test]
fn json_flag_emits_a_full_record() {
    let dir = workspace();
    let o = abstain(dir.path(), &["divergence", "--kind", "d_star", "--rho", "rho.json", "--sigma", "sigma.json", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["kind"], "d_star");
    assert!((v["value"].as_f64().unwrap() - 0.202_732_554_054_081_57).abs() < 1e-5);
    assert_eq!(v["details"]["bracket_ok"], true);
}

#[test]
fn region_file_starts_at_relative_entropy_and_has_manifest() {
    let dir = workspace();
    let args = [
        "region", "--which", "deterministic_hoeffding", "--samples", "256", "--rho", "p.json", "--sigma", "q.json",
        "--base", "2", "--out", "det.csv",
    ];
    let o = abstain(dir.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("det.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,y"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - 1.652_933).abs() < 5e-7);
    assert_eq!(csv.lines().count(), 257);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("det.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "region");
    assert_eq!(manifest["arguments"]["command"]["which"], "deterministic_hoeffding");
    assert_eq!(manifest["input_digests"].as_object().unwrap().len(), 2);
    let digest = manifest["output_digests"]["det.csv"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
}

#[test]
fn region_outputs_are_byte_stable() {
    let dir = workspace();
    let run = |out: &str| {
        let o = abstain(
            dir.path(),
            &["region", "--which", "onesided", "--samples", "64", "--rho", "rho.json", "--sigma", "sigma.json", "--out", out],
        );
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(dir.path().join(out)).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn region_rejects_single_sample_and_unknown_kind() {
    let dir = workspace();
    let o = abstain(dir.path(), &["region", "--which", "deterministic_hoeffding", "--samples", "1", "--rho", "p.json", "--sigma", "q.json"]);
    assert_eq!(o.status.code(), Some(2));
    let o = abstain(dir.path(), &["region", "--which", "sideways", "--rho", "p.json", "--sigma", "q.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn symmetric_region_at_zero_is_a_single_minimum_row() {
    let dir = workspace();
    let o = abstain(
        dir.path(),
        &["region", "--which", "symmetric", "--Z", "0", "--mode", "maximal", "--rho", "p.json", "--sigma", "q.json", "--base", "2"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 2);
    let y: f64 = rows[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((y - 1.652_933).abs() < 5e-7);
}

#[test]
fn classical_stein_statistics_are_exact() {
    let dir = workspace();
    let o = abstain(
        dir.path(),
        &["simulate-classical", "--P", "0.9", "--Q", "0.2", "--n", "2000", "--mode", "stein", "--json", "--out", "stein.json"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["statistics"]["exact"], true);
    assert_eq!(v["config"]["seed"], 0x5EED);
    assert!(v["statistics"]["log_pi_P"].as_f64().unwrap() > (0.99f64).ln());
    assert!(dir.path().join("stein.json.manifest.json").exists());
}

#[test]
fn classical_reject_exponents_in_bits() {
    let dir = workspace();
    let o = abstain(
        dir.path(),
        &["simulate-classical", "--P", "0.9", "--Q", "0.2", "--n", "400", "--mode", "reject", "--k", "0.1", "--l", "0.1", "--base", "2", "--json"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["config"]["K_nats"].as_f64().unwrap() - 0.1 * LN2).abs() < 1e-15);
    assert!(v["exponents"]["abstain_P"].as_f64().unwrap() > 0.0);
}

#[test]
fn exact_only_budget_refusal_exits_four() {
    let dir = workspace();
    let o = abstain(
        dir.path(),
        &["simulate-classical", "--p-file", "flat4.json", "--q-file", "flat4.json", "--n", "5000", "--mode", "hoeffding", "--a", "0.1", "--exact"],
    );
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("TooManyTypes"));
    assert!(stderr(&o).contains("100000000"));
}

#[test]
fn sequential_json_is_reproducible_across_thread_counts() {
    let dir = workspace();
    let run = |out: &str, threads: &str| -> PathBuf {
        let o = abstain(
            dir.path(),
            &["simulate-sequential", "--n", "200", "--epsilon-bits", "0.3", "--trials", "2000", "--seed", "24301", "--threads", threads, "--out", out],
        );
        assert!(o.status.success(), "{}", stderr(&o));
        dir.path().join(out)
    };
    let a = std::fs::read(run("one.json", "1")).unwrap();
    let b = std::fs::read(run("four.json", "4")).unwrap();
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["config"]["seed"], 24301);
    assert!(v["statistics"]["pi_rho"]["value"].as_f64().unwrap() > 0.9);
    assert!(v.get("wall_clock_secs").is_none());
}

#[test]
fn sequential_rejects_oversized_epsilon() {
    let dir = workspace();
    let o = abstain(dir.path(), &["simulate-sequential", "--epsilon-bits", "1.8", "--trials", "1000"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("InvalidConfig"));
}

#[test]
fn pinching_scan_csv_has_expected_columns() {
    let dir = workspace();
    let o = abstain(dir.path(), &["pinching-scan", "--rho", "rho.json", "--sigma", "sigma.json", "--s", "0.7", "--k-max", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "k,rate,target,gap,bound");
    assert_eq!(rows.len(), 5);
    for row in &rows[1..] {
        let cells: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(cells[3] >= -1e-9 && cells[3] <= cells[4]);
    }
}

#[test]
fn verify_unknown_suite_exits_two() {
    let dir = workspace();
    let o = abstain(dir.path(), &["verify", "--suite", "everything"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_pinching_suite_prints_table() {
    let dir = workspace();
    let o = abstain(dir.path(), &["verify", "--suite", "pinching"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.starts_with("PASS criterion  9"));
    assert!(text.contains("measured") && text.contains("tol"));
}
