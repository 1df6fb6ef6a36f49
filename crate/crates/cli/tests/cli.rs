use std::process::{Command, Output};

use serde_json::Value;

fn petersson(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_petersson")).args(args).env_remove("PETERSSON_THREADS").output().expect("binary runs")
}

fn records(out: &Output) -> Vec<Value> {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap().lines().map(|l| serde_json::from_str(l).expect("one JSON object per line")).collect()
}

#[test]
fn cheb_table_csv() {
    let out = petersson(&["cheb-table", "--max-n", "8", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[4], "2,0,3,0,1");
    assert_eq!(rows[0], "1");
}

#[test]
fn kloosterman_value() {
    let recs = records(&petersson(&["kloosterman", "-m", "1", "-n", "1", "-c", "3"]));
    assert_eq!(recs.len(), 1);
    let value = recs[0]["value"].as_f64().unwrap();
    assert!((value + 1.0).abs() < 1e-12);
    assert_eq!(recs[0]["c"], 3);
}

#[test]
fn verify_gab_suite() {
    let recs = records(&petersson(&["verify", "gab", "--samples", "500", "--max-modulus", "120", "--seed", "7"]));
    assert_eq!(recs[0]["failures"], 0);
    assert!(recs[0]["max_abs_diff"].as_f64().unwrap() < 1e-8);
    assert_eq!(recs[0]["checked"].as_u64().map(|n| n > 0), Some(true));
}

#[test]
fn precondition_errors_exit_two() {
    let bad_conductor = petersson(&["gab", "--m1", "1", "--m2", "1", "--m3", "1", "-c", "5", "-q", "6"]);
    assert_eq!(bad_conductor.status.code(), Some(2));
    assert!(!bad_conductor.stderr.is_empty());
    let missing = petersson(&["kloosterman", "-m", "1"]);
    assert_eq!(missing.status.code(), Some(2));
    let zero_modulus = petersson(&["kloosterman", "-m", "1", "-n", "1", "-c", "0"]);
    assert_eq!(zero_modulus.status.code(), Some(2));
    let unknown_suite = petersson(&["verify", "everything"]);
    assert_eq!(unknown_suite.status.code(), Some(2));
}

#[test]
fn budget_errors_exit_three() {
    let out = petersson(&["gab", "--m1", "1", "--m2", "1", "--m3", "1", "-c", "401", "-q", "1"]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn records_carry_truncation_parameters() {
    let recs = records(&petersson(&["delta", "--level", "11", "-m", "2", "-n", "3", "--c-max", "2000"]));
    assert_eq!(recs[0]["c_max"], 2000);
    assert!(recs[0]["tail_bound"].as_f64().unwrap() > 0.0);
    let recs = records(&petersson(&["delta-star", "--level", "11", "-m", "1", "-n", "1", "--c-max", "2000", "--y", "100"]));
    assert_eq!(recs[0]["c_max"], 2000);
    assert_eq!(recs[0]["y"], 100);
}

#[test]
fn output_is_identical_across_thread_counts() {
    let args = ["gab", "--m1", "2", "--m2", "-3", "--m3", "5", "-A", "2", "-B", "3", "-c", "45", "-q", "5"];
    let run = |threads: &str| {
        let mut full = vec!["--threads", threads];
        full.extend_from_slice(&args);
        let out = petersson(&full);
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let one = run("1");
    assert_eq!(one, run("1"));
    assert_eq!(one, run("3"));

    let delta =
        |threads: &str| petersson(&["--threads", threads, "delta", "--level", "11", "-m", "1", "-n", "1", "--c-max", "3000"]).stdout;
    assert_eq!(delta("1"), delta("4"));
}

#[test]
fn root_number_of_the_level_eleven_twist() {
    let recs = records(&petersson(&["root-number", "--r", "11", "--q", "4", "--c-max", "20000"]));
    assert_eq!(recs[0]["root_number"], 1);
    assert_eq!(recs[0]["c_max"], 20000);
    assert_eq!(recs[0]["prime_bound"], 600);
}
