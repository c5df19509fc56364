use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use anchor_sim::experiment::{read_trials_csv, summarize};

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anchor-sim"))
        .args(args)
        .output()
        .unwrap()
}

fn small_scenario(dir: &Path) -> String {
    let path = dir.join("scenario.json");
    fs::write(
        &path,
        r#"{"node_count":200,"area":{"width":300.0,"height":300.0},"radio_range":45.0,
"anchor_count":4,"anchor_placement":"random-nodes","rng_seed":3,"min_separation":0.001}"#,
    )
    .unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn experiment_writes_summary_and_trials() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        r#"{"network":{"node_count":200,"area":{"width":300.0,"height":300.0},"radio_range":45.0,
"anchor_count":4,"anchor_placement":"random-nodes","rng_seed":3,"min_separation":0.001},
"trials":40,"pair_selection":"uniform-random-pairs","coordinate_mode":"anchor"}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = sim(&[
        "experiment",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["trials"], 40);
    assert_eq!(summary["seed"], 3);
    assert_eq!(summary["spec_hash"].as_str().unwrap().len(), 64);

    let csv = fs::read(out.join("trials.csv")).unwrap();
    assert!(csv.starts_with(b"# seed=3 spec_hash="));
    let rows = read_trials_csv(csv.as_slice()).unwrap();
    assert_eq!(rows.len(), 40);
    let (delivered, rate, hops, stretch, length) = summarize(&rows);
    assert_eq!(summary["delivered"], delivered);
    assert_eq!(summary["delivery_rate"].as_f64(), Some(rate));
    assert_eq!(summary["mean_hops"].as_f64(), hops);
    assert_eq!(summary["mean_stretch"].as_f64(), stretch);
    assert_eq!(summary["mean_phys_length"].as_f64(), length);
}

#[test]
fn route_prints_hop_table() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = small_scenario(dir.path());
    let o = sim(&["route", "--net", &scenario, "--src", "0", "--dst", "1"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# seed=3 spec_hash="));
    assert!(lines[1].starts_with("0 -> 1: "));
    assert_eq!(lines[2], "hop,node,mode,subset");
    assert_eq!(lines[3], "0,0,source,all");

    let o = sim(&[
        "route", "--net", &scenario, "--src", "0", "--dst", "1", "--json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["source"], 0);
    assert!(v["hops"].is_array());
}

#[test]
fn generate_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = small_scenario(dir.path());
    let net = dir.path().join("net.json");
    let o = sim(&[
        "generate",
        "--scenario",
        &scenario,
        "--out",
        net.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .starts_with("nodes 200 anchors 4 "));
    let o = sim(&["check", "--net", net.to_str().unwrap(), "--samples", "30"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.lines().all(|l| l.starts_with("ok ")));
}

#[test]
fn curve_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = small_scenario(dir.path());
    let out = dir.path().join("curve.csv");
    let o = sim(&[
        "curve",
        "--net",
        &scenario,
        "--from",
        "20,20",
        "--to",
        "250,240",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = fs::read_to_string(out).unwrap();
    assert_eq!(text.lines().nth(1), Some("t,x,y,dist_to_D"));
    assert!(text.lines().count() > 3);
}

#[test]
fn usage_and_input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = small_scenario(dir.path());
    assert_eq!(
        sim(&["route", "--net", &scenario, "--bogus"]).status.code(),
        Some(1)
    );
    assert_eq!(
        sim(&[
            "route",
            "--net",
            &scenario,
            "--src",
            "0",
            "--dst",
            "1",
            "--variant",
            "4"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        sim(&["route", "--net", &scenario, "--src", "0", "--dst", "9999"])
            .status
            .code(),
        Some(1)
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        sim(&["check", "--net", missing.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    let o = sim(&["check", "--net", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("error: "));
    assert_eq!(sim(&["--help"]).status.code(), Some(0));
}
