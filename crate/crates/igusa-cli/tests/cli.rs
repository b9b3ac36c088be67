//! End-to-end tests of the `igusa` binary: flags, JSON shapes, exit codes,
//! and byte-determinism of the reports.

use std::path::Path;
use std::process::{Command, Output};

fn igusa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_igusa"))
        .args(args)
        .env_remove("IGUSA_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&output.stdout)
        )
    })
}

#[test]
fn count_all_targets_matches_oracle_table() {
    let out = igusa(&[
        "count",
        "--poly",
        "x*y",
        "--p",
        "2",
        "--imax",
        "3",
        "--all-targets",
        "2",
    ]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    let level2 = &doc["levels"][2];
    assert_eq!(level2["i"], 2);
    let counts: Vec<&str> = level2["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["count"].as_str().unwrap())
        .collect();
    assert_eq!(counts, vec!["8", "2", "4", "2"]);
}

#[test]
fn count_specific_target() {
    let out = igusa(&[
        "count", "--poly", "x*y", "--p", "2", "--imax", "2", "--u", "1",
    ]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    let level2 = doc["levels"][2]["entries"].as_array().unwrap();
    let u1 = level2.iter().find(|e| e["u"] == "1").expect("u=1 present");
    assert_eq!(u1["count"], "2");
}

#[test]
fn poles_reports_minus_one_for_hyperbolic_plane() {
    let out = igusa(&["poles", "--poly", "x*y", "--p", "2", "--imax", "10"]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    assert_eq!(doc["min_re"], -1.0);
    assert_eq!(doc["min_re_exact"][0], "-1");
    assert_eq!(doc["min_re_exact"][1], "1");
    assert_eq!(doc["bound_ok"], true);
    assert_eq!(doc["factors"][0]["nu"], 1);
    assert_eq!(doc["factors"][0]["N"], 1);
    assert_eq!(doc["factors"][0]["mult"], 2);
}

#[test]
fn zeta_document_schema() {
    let out = igusa(&["zeta", "--poly", "x*y", "--p", "2", "--imax", "10"]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    let zeta = &doc["zeta"];
    for key in ["p", "n", "coeffs", "numerator", "denominator", "factors", "poles"] {
        assert!(zeta.get(key).is_some(), "zeta document missing {key}");
    }
    // Rationals are decimal-string pairs.
    assert_eq!(zeta["coeffs"][0][0], "1");
    assert_eq!(zeta["coeffs"][0][1], "4");
    assert_eq!(zeta["numerator"][0][0], "1");
    assert_eq!(doc["z_at_one"][0], "1");
    assert_eq!(doc["z_at_one"][1], "1");
    assert_eq!(doc["counts"][3], "20");
}

#[test]
fn verify_default_corpus_passes() {
    let out = igusa(&["verify", "t23", "--corpus", "default"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let doc = stdout_json(&out);
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["aborted"], false);
    assert!(doc["items"].as_array().unwrap().len() >= 6);
}

#[test]
fn verify_single_polynomial() {
    let out = igusa(&[
        "verify",
        "t23",
        "--poly",
        "x1*x2 + x3*x4",
        "--p",
        "3",
        "--imax",
        "2",
        "--all-targets",
        "2",
    ]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    assert_eq!(doc["items"][0]["pass"], true);
}

#[test]
fn verify_bound_stabilizes_and_diverges() {
    let out = igusa(&[
        "verify", "bound", "--poly", "x*y", "--p", "2", "--imax", "12", "--lprime", "-1",
    ]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    assert_eq!(doc["offset"], 1);
    assert_eq!(doc["diverging"], false);

    let out = igusa(&[
        "verify", "bound", "--poly", "x*y", "--p", "2", "--imax", "12", "--lprime", "-1/2",
    ]);
    assert_eq!(out.status.code(), Some(2), "diverging bound must exit 2");
    let doc = stdout_json(&out);
    assert_eq!(doc["diverging"], true);
}

#[test]
fn verify_witness_finds_sharp_progression() {
    let out = igusa(&[
        "verify", "witness", "--poly", "x*y", "--p", "2", "--imax", "12",
    ]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    assert_eq!(doc["witness"]["R"], 2);
    assert_eq!(doc["witness"]["c"], 1);
    assert_eq!(doc["witness"]["a"], 0);
    assert_eq!(doc["verdict"], "witness-found");
    assert_eq!(doc["l"][0], "-1");
}

#[test]
fn twist_pipeline_passes() {
    let out = igusa(&[
        "twist",
        "--poly",
        "x^2 + 3*y^2",
        "--p",
        "3",
        "--conductor",
        "1",
        "--exps",
        "1",
        "--imax",
        "10",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let doc = stdout_json(&out);
    assert_eq!(doc["divisibility"]["pass"], true);
    assert_eq!(doc["poles"]["bound_ok"], true);
    assert_eq!(doc["character"]["m"], 2);
    // Orthogonality: nontrivial character on f = x1 gives the zero stream.
    let out = igusa(&[
        "twist", "--poly", "x", "--n", "2", "--p", "3", "--conductor", "1", "--exps", "1",
        "--imax", "6",
    ]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    assert_eq!(doc["components"][0]["coeffs"][0][0], "0");
    assert_eq!(doc["poles"]["combined"].as_array().unwrap().len(), 0);
}

#[test]
fn bench_counts_agree() {
    let out = igusa(&["bench", "--poly", "x*y", "--p", "2", "--imax", "4"]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    assert_eq!(doc["agreement"], true);
    let grid = doc["grid"].as_array().unwrap();
    assert_eq!(grid.len(), 12); // 3 algorithms x 4 levels
    assert!(grid.iter().all(|row| row.get("count").is_some()));
}

#[test]
fn budget_refusal_is_machine_readable_exit_3() {
    let out = igusa(&[
        "count", "--poly", "x*y", "--p", "2", "--imax", "10", "--algorithm", "brute",
        "--budget", "1000",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let doc = stdout_json(&out);
    assert_eq!(doc["error"]["kind"], "budget_exceeded");
    assert_eq!(doc["error"]["budget"], 1000);
}

#[test]
fn parse_errors_exit_1_with_position() {
    let out = igusa(&["count", "--poly", "x1^(-1)", "--p", "2", "--imax", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = stdout_json(&out);
    let msg = doc["error"]["message"].as_str().unwrap();
    assert!(msg.contains("negative exponent"), "{msg}");

    let out = igusa(&["count", "--poly", "2x", "--p", "2", "--imax", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn non_prime_is_rejected() {
    let out = igusa(&["count", "--poly", "x*y", "--p", "6", "--imax", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = stdout_json(&out);
    assert!(doc["error"]["message"]
        .as_str()
        .unwrap()
        .contains("not prime"));
}

#[test]
fn output_is_byte_deterministic_across_worker_counts() {
    let args = ["zeta", "--poly", "x*y + z^2", "--p", "3", "--imax", "8"];
    let a = igusa(&args);
    let b = igusa(&args);
    assert_eq!(a.stdout, b.stdout, "same config must give identical bytes");
    let mut with_workers: Vec<&str> = args.to_vec();
    with_workers.extend(["--workers", "1"]);
    let c = igusa(&with_workers);
    assert_eq!(
        a.stdout, c.stdout,
        "worker count must not affect any emitted number"
    );
}

#[test]
fn report_files_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("report.json");
    let csv_path = dir.path().join("report.csv");
    let out = igusa(&[
        "count",
        "--poly",
        "x*y",
        "--p",
        "2",
        "--imax",
        "2",
        "--all-targets",
        "2",
        "--out",
        json_path.to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(Path::new(&json_path).exists());
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("i,u,count,algorithm\n"));
    assert!(csv.contains("2,0,8,brute"));
}

#[test]
fn corpus_files_load_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.json");
    std::fs::write(
        &path,
        r#"[{"name": "tiny", "poly": "x*y", "p": 2, "imax": 3, "all_targets_imax": 2}]"#,
    )
    .unwrap();
    let out = igusa(&["verify", "t23", "--corpus", path.to_str().unwrap()]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    assert_eq!(doc["items"][0]["name"], "tiny");
    assert_eq!(doc["items"][0]["pass"], true);
}
