//! End-to-end behaviour of the `regtail` binary: outputs, exit codes, replay.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn regtail(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regtail"))
        .args(args)
        .output()
        .expect("run regtail")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_k5(dir: &Path) -> String {
    let path = dir.join("k5.edges");
    let mut text = String::from("5 10\n");
    for u in 0..5 {
        for v in u + 1..5 {
            text.push_str(&format!("{u} {v}\n"));
        }
    }
    std::fs::write(&path, text).unwrap();
    format!("@{}", path.display())
}

#[test]
fn counts_triangles_in_k5() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_k5(dir.path());
    let o = regtail(&["count", "--pattern", "k3", "--graph", &g]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "10");
    let o = regtail(&[
        "count",
        "--pattern",
        "c4",
        "--graph",
        &g,
        "--format",
        "json",
    ]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["copies"], 15);
    assert_eq!(v["injective_homs"], 120);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["scan", "--pattern", "k3"],
        vec![
            "scan",
            "--pattern",
            "k3",
            "--n",
            "6",
            "--kmax",
            "3",
            "--bogus",
            "1",
        ],
        vec!["count", "--pattern", "k7x", "--n", "5"],
        vec!["count", "--pattern", "k3", "--graph", "no-at-sign"],
        vec!["verify", "not-a-target"],
        vec!["frobnicate"],
    ] {
        let o = regtail(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    let o = regtail(&["scan", "--pattern", "k3"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--n"));
}

#[test]
fn runtime_errors_are_json_with_exit_one() {
    let o = regtail(&["count", "--pattern", "k3", "--n", "9"]);
    assert_eq!(o.status.code(), Some(1));
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(err["error"], "too_large");
    let o = regtail(&["sample", "--n", "5", "--p", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exact_probability_from_the_command_line() {
    let o = regtail(&["count", "--pattern", "k3", "--n", "3", "--p", "0.5"]);
    assert!(o.status.success());
    let prob: f64 = stdout(&o).trim().parse().unwrap();
    assert!((prob - 0.125).abs() < 1e-15);
}

#[test]
fn scan_csv_schema_and_crossover() {
    let o = regtail(&[
        "scan",
        "--pattern",
        "k3",
        "--n",
        "6",
        "--kmax",
        "4",
        "--samples",
        "2000",
        "--seed",
        "7",
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,n,p,estimate,ci_low,ci_high,exact,L_value,clique_lb,disjoint_lb,samples"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "1");
    assert_eq!(first[7], "", "rate is undefined at k = 1");
    assert_eq!(text.lines().count(), 5);
    let o = regtail(&[
        "scan",
        "--pattern",
        "k3",
        "--n",
        "6",
        "--kmax",
        "4",
        "--samples",
        "2000",
        "--format",
        "json",
    ]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert!(v["crossover"].as_u64().unwrap() >= 2);
}

#[test]
fn sample_respects_seed_and_out() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.edges");
    let run = |out: &Path| {
        let o = regtail(&[
            "sample",
            "--pattern",
            "k3",
            "--n",
            "50",
            "--seed",
            "9",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        std::fs::read_to_string(out).unwrap()
    };
    let first = run(&a);
    assert_eq!(first, run(&dir.path().join("b.edges")));
    let header: Vec<usize> = first
        .lines()
        .next()
        .unwrap()
        .split(' ')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(header[0], 50);
    assert_eq!(first.lines().count(), header[1] + 1);
}

#[test]
fn decompose_and_core_reports() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_k5(dir.path());
    let o = regtail(&["decompose", "--pattern", "k3", "--graph", &g]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["components"][0]["copies"], 10);
    assert_eq!(v["components"][0]["holds"], true);
    let o = regtail(&[
        "core",
        "--pattern",
        "k3",
        "--graph",
        &g,
        "--n",
        "1000",
        "--k",
        "10",
    ]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "core");
    assert_eq!(v["min_degree_product"], 16);
    assert!(v["peeled_edges"].as_array().unwrap().is_empty());
}

#[test]
fn bounds_record_has_every_value() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_k5(dir.path());
    let o = regtail(&[
        "bounds",
        "--pattern",
        "k3",
        "--n",
        "1000",
        "--k",
        "8",
        "--graph",
        &g,
    ]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in [
        "rate_l",
        "crossover_k",
        "clique_seed_size",
        "t",
        "edge_cap",
        "hom_bound",
        "edges",
        "degree_profile",
    ] {
        assert!(!v[key].is_null(), "{key}");
    }
    assert_eq!(v["edges"].as_array().unwrap().len(), 10);
}

#[test]
fn verify_targets_pass_and_report() {
    for args in [
        vec!["verify", "split-min", "--seed", "3"],
        vec!["verify", "bk", "--n", "6", "--p", "0.1"],
        vec![
            "verify",
            "hom-bound",
            "--pattern",
            "c4",
            "--instances",
            "50",
            "--seed",
            "1",
        ],
        vec!["verify", "power-sum", "--trials", "500", "--seed", "3"],
    ] {
        let o = regtail(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
    }
    let o = regtail(&["verify", "dyadic", "--trials", "100", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["target"], "dyadic");
    assert_eq!(v[0]["checked"], 100);
}

#[test]
fn replay_reproduces_a_recorded_violation() {
    let dir = tempfile::tempdir().unwrap();
    // a zero distance budget cannot be met, so this case always fails
    let failing = r#"{"target":"poisson","case":{"case":"poisson","pattern":{"n":3,"edges":[[0,1],[0,2],[1,2]]},
        "n":30,"p":0.05,"seed":1,"samples":200,"max_tv":0.0},"detail":""}"#;
    let path = dir.path().join("violation.json");
    std::fs::write(&path, failing).unwrap();
    let o = regtail(&[
        "verify",
        "--replay",
        path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["reproduced"], true);

    let holding =
        r#"[{"target":"chernoff","case":{"case":"chernoff","n":10,"m":10,"p":0.5},"detail":""}]"#;
    std::fs::write(&path, holding).unwrap();
    let o = regtail(&["verify", "--replay", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("holds"));
}
