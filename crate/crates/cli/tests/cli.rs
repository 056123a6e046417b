use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/data");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn cpl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpl")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn eliminate_proportion() {
    let o = cpl(&["eliminate", "--network", &data("netcoin.json"), "--formula", "[ ||P(y):y=y||{y} >= 1/3 ]"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "true\n");
}

#[test]
fn critical_formula_is_rejected_with_witness() {
    let o = cpl(&["check", "--network", &data("netcoin.json"), "--formula", "[ ||P(y):y=y||{y} >= 1/2 ]"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("witness (r=1/2, alpha=1/2, beta=0)"), "{}", stdout(&o));
}

#[test]
fn noncritical_formula_passes() {
    let o = cpl(&["check", "--network", &data("netcoin.json"), "--formula", "[ ||P(y):y=y||{y} >= 1/3 ]"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("noncritical"));
}

#[test]
fn exact_probability() {
    let o = cpl(&["prob", "--network", &data("netpq.json"), "--n", "1", "--formula", "Q(x)", "--assign", "x=1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1/2\n");
    let f = cpl(&["prob", "--network", &data("netpq.json"), "--n", "1", "--formula", "Q(x)", "--assign", "x=1", "--float"]);
    assert_eq!(stdout(&f), "0.5\n");
}

#[test]
fn limit_and_cost() {
    let o = cpl(&[
        "eliminate",
        "--network",
        &data("netgraph.json"),
        "--formula",
        "R(x,y) & exists z : (R(z,x) & z!=y)",
        "--limit",
        "--pattern",
        "x=y",
        "--show-cost",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("limit: 1/2"), "{out}");
    assert!(out.contains("cost: arith="), "{out}");
}

#[test]
fn formula_file() {
    let dir = std::env::temp_dir().join(format!("cpl-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("f.txt");
    std::fs::write(&path, "exists y : (P(y) & y=x)\n").unwrap();
    let o = cpl(&["eliminate", "--network", &data("netcoin.json"), "--formula-file", path.to_str().unwrap()]);
    assert_eq!(stdout(&o), "P(x)\n");
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn json_has_result_for_every_subcommand() {
    let coin = data("netcoin.json");
    let pq = data("netpq.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["parse", "--network", &coin, "--formula", "exists x : P(x)"],
        vec!["qr", "--network", &coin, "--formula", "exists x : P(x)"],
        vec!["eliminate", "--network", &coin, "--formula", "exists x : P(x)"],
        vec!["check", "--network", &coin, "--formula", "exists x : P(x)"],
        vec!["critical", "--network", &coin, "--m", "1"],
        vec!["prob", "--network", &pq, "--n", "2", "--formula", "Q(x)", "--assign", "x=2"],
        vec!["sample", "--network", &pq, "--n", "3", "--seed", "5"],
        vec!["estimate", "--network", &pq, "--n", "3", "--formula", "Q(x)", "--assign", "x=1", "--samples", "50"],
        vec!["qfnet", "--network", &pq],
        vec!["validate", "--network", &pq],
    ];
    for mut args in cases {
        args.push("--json");
        let o = cpl(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
        assert!(v.get("result").is_some(), "{args:?}");
    }
}

#[test]
fn deterministic_output() {
    let args = ["sample", "--network", &data("netgraph.json"), "--n", "6", "--seed", "42"];
    assert_eq!(cpl(&args).stdout, cpl(&args).stdout);
    let est = ["estimate", "--network", &data("netpq.json"), "--n", "4", "--formula", "exists x : Q(x)", "--seed", "3"];
    assert_eq!(cpl(&est).stdout, cpl(&est).stdout);
}

#[test]
fn quantifier_free_network() {
    let o = cpl(&["qfnet", "--network", &data("existsguard.json"), "--json"]);
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    let q = &v["result"]["relations"][0];
    assert_eq!(q["name"], "Q");
    assert_eq!(q["rules"][0]["guard"], "true");
    assert_eq!(q["rules"][1]["guard"], "~true");
}

#[test]
fn validation_failures_exit_one() {
    let o = cpl(&["validate", "--network", &data("overlap.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("overlap"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(cpl(&["bogus"]).status.code(), Some(2));
    assert_eq!(cpl(&["prob", "--network", &data("netpq.json"), "--formula", "Q(x)"]).status.code(), Some(2));
    assert_eq!(cpl(&["eliminate", "--formula", "true"]).status.code(), Some(2));
}

#[test]
fn domain_errors_exit_one() {
    let unknown = cpl(&["parse", "--network", &data("netcoin.json"), "--formula", "S(x)"]);
    assert_eq!(unknown.status.code(), Some(1));
    let missing = cpl(&["parse", "--network", &data("nope.json"), "--formula", "P(x)"]);
    assert_eq!(missing.status.code(), Some(1));
    let too_big = cpl(&["prob", "--network", &data("netgraph.json"), "--n", "6", "--formula", "true", "--cap", "20"]);
    assert_eq!(too_big.status.code(), Some(1));
}
