use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn newman(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_newman")).args(args).output().expect("spawn newman")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn square_prints_coefficients() {
    let v = stdout_json(&newman(&["square", "--poly", "0,1,3"]));
    assert_eq!(v["coefficients"], serde_json::json!([1, 2, 1, 2, 2, 0, 1]));

    let out = newman(&["square", "--poly", "111", "--input-format", "bitstring", "--format", "csv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "k,coefficient\n0,1\n1,2\n2,3\n3,2\n4,1\n");
}

#[test]
fn ratio_reports_exact_fractions() {
    let v = stdout_json(&newman(&["ratio", "--poly", "0,1,2", "--c0", "1", "--rho", "1"]));
    assert_eq!(v["height"], 3);
    assert_eq!((v["product_num"].as_u64(), v["product_den"].as_u64()), (Some(2), Some(3)));
    assert_eq!(v["hypothesis"]["holds"], true);
}

#[test]
fn chernoff_chooses_epsilon() {
    let v = stdout_json(&newman(&["chernoff", "--rho", "8/9", "--rho-prime", "0.95", "--mean", "100"]));
    let eps = v["epsilon"].as_f64().unwrap();
    assert!((eps - 0.022_078_4).abs() < 1e-6);
    assert_eq!(v["tail_bound"]["clamped"], 1.0);

    let v = stdout_json(&newman(&["chernoff", "--epsilon", "1", "--mean", "1000"]));
    assert!(v["tail_bound"]["raw"].as_f64().unwrap() < 1e-80);
}

#[test]
fn sparsify_writes_trial_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trials.csv");
    let poly: String = (0..=64).map(|j| j.to_string()).collect::<Vec<_>>().join(",");
    let args = [
        "sparsify", "--poly", &poly, "--epsilon", "0.2", "--trials", "5", "--seed", "9", "--out",
        path.to_str().unwrap(),
    ];
    assert!(newman(&args).status.success());
    let first = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(
        lines[0],
        "trial_index,seed,l1_q,deg_q,height_q2,ratio_num,ratio_den,product_num,product_den,flag_E,flag_D,num_Ek,first_Ek_index"
    );
    assert_eq!(lines.len(), 6);
    assert!(newman(&args).status.success());
    assert_eq!(fs::read_to_string(&path).unwrap(), first);
}

#[test]
fn search_writes_result_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = newman(&["search", "--min-degree", "1", "--max-degree", "8", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("search_result.json")).unwrap()).unwrap();
    assert_eq!(v["result"]["degree_table"].as_array().unwrap().len(), 8);
    let table = fs::read_to_string(dir.path().join("degree_table.csv")).unwrap();
    assert!(table.lines().nth(2).unwrap().starts_with("2,3,3,2,3,"));
}

#[test]
fn experiment_emits_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("campaign.txt");
    fs::write(&config, "family = all_ones\ndegrees = 2^8, 2^10\ntrials = 5\nepsilon = 0.1\nseed = 4\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = newman(&[
        "experiment", "--config", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--format", "json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["master_seed"], 4);
    let summary: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.as_array().unwrap().len(), 2);
    assert!(out_dir.join("trials_N1024.json").exists());
}

#[test]
fn bad_input_fails_cleanly() {
    let out = newman(&["square", "--poly", "10x1", "--input-format", "bitstring"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let out = newman(&["experiment", "--config", "/nonexistent/campaign.txt"]);
    assert!(!out.status.success());

    let out = newman(&["sparsify", "--poly", "0,1,2"]);
    assert!(!out.status.success());
}
