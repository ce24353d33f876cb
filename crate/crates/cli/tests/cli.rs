use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gaspower_core::io::{write_results, ResultSet, SnapshotLevel};
use gaspower_core::CouplingKind;
use serde_json::Value;

fn toy() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/scenarios/toy.toml")
}

fn gaspower(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaspower"))
        .args(args)
        .env_remove("GASPOWER_LOG")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn simulate(dir: &Path, extra: &[&str]) -> Output {
    let scenario = toy();
    let mut args = vec![
        "simulate",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    gaspower(&args)
}

#[test]
fn simulate_both_couplings_and_compare() {
    let tmp = tempfile::tempdir().unwrap();
    let (p, b) = (tmp.path().join("p"), tmp.path().join("b"));
    for (dir, coupling) in [(&p, "pressure"), (&b, "bernoulli")] {
        let o = simulate(dir, &["--coupling", coupling, "--snapshots", "full"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        for f in [
            "pressure.csv",
            "flow.csv",
            "summary.json",
            "snapshots.csv",
            "bus_snapshots.csv",
            "conversion_snapshots.csv",
        ] {
            assert!(dir.join(f).is_file(), "{f} missing");
        }
    }
    let o = gaspower(&[
        "compare-couplings",
        p.to_str().unwrap(),
        b.to_str().unwrap(),
        "--json",
        "--out",
        tmp.path().join("cmp").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    let rel = v["max_rel_pressure"].as_f64().unwrap();
    assert!(rel > 0.0 && rel < 1e-2, "{rel}");
    let bins = v["flow_bins"].as_array().unwrap();
    let lowers: Vec<f64> = bins.iter().map(|b| b["lower"].as_f64().unwrap()).collect();
    assert_eq!(lowers, [1e-3, 1e-2, 1e-1, 1.0, 10.0]);
    assert!(bins.iter().map(|b| b["samples"].as_u64().unwrap()).sum::<u64>() > 0);
    assert!(tmp.path().join("cmp/comparison.json").is_file());
}

#[test]
fn identical_runs_compare_to_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("p");
    assert_eq!(code(&simulate(&dir, &["--snapshots", "full"])), 0);
    let d = dir.to_str().unwrap();
    let v = stdout_json(&gaspower(&["compare-couplings", d, d, "--json"]));
    assert_eq!(v["max_abs_pressure_bar"].as_f64(), Some(0.0));
    for b in v["flow_bins"].as_array().unwrap() {
        assert_eq!(b["max_abs"].as_f64(), Some(0.0));
    }
}

#[test]
fn missing_snapshots_name_the_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("p");
    assert_eq!(code(&simulate(&dir, &[])), 0);
    let d = dir.to_str().unwrap();
    let o = gaspower(&["compare-couplings", d, d]);
    assert_eq!(code(&o), 7);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--snapshots full"));
}

#[test]
fn runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&simulate(&a, &[])), 0);
    assert_eq!(code(&simulate(&b, &[])), 0);
    for f in ["pressure.csv", "flow.csv", "conversion_snapshots.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn bad_time_step_is_rejected_before_any_work() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("p");
    let o = simulate(&dir, &["--dt", "7"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not divide"));
    assert!(!dir.exists());
}

#[test]
fn usage_and_input_errors_have_distinct_codes() {
    assert_eq!(code(&gaspower(&["simulate", "--bogus"])), 2);
    assert_eq!(code(&gaspower(&["simulate", "--out", "x"])), 2);
    assert_eq!(
        code(&gaspower(&[
            "validate",
            "--coupling",
            "sideways",
            "--scenario",
            toy().to_str().unwrap()
        ])),
        2
    );
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "[gas\n").unwrap();
    assert_eq!(code(&gaspower(&["validate", "--scenario", bad.to_str().unwrap()])), 3);
    let missing = tmp.path().join("missing.toml");
    assert_eq!(
        code(&gaspower(&["validate", "--scenario", missing.to_str().unwrap()])),
        6
    );
    assert_eq!(code(&gaspower(&["report", missing.to_str().unwrap()])), 6);
}

#[test]
fn solver_failures_have_distinct_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = simulate(&tmp.path().join("a"), &["--tol", "1e-300"]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));

    let drained = tmp.path().join("drained.toml");
    fs::write(
        &drained,
        r#"
format = "gaspower-scenario"
version = 1
[solver]
horizon = "2 h"
[[gas.nodes]]
id = "S"
kind = "source"
flow = "1 m3/s"
[[gas.nodes]]
id = "D"
kind = "sink"
flow = [{ t = "0 h", value = "1 m3/s" }, { t = "1 h", value = "5000 m3/s" }]
[[gas.edges]]
id = "p"
kind = "pipe"
from = "S"
to = "D"
length = "10 km"
diameter = "0.3 m"
"#,
    )
    .unwrap();
    let o = gaspower(&[
        "simulate",
        "--scenario",
        drained.to_str().unwrap(),
        "--out",
        tmp.path().join("b").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 5, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("time step"));
}

#[test]
fn validate_reports_a_square_system() {
    let o = gaspower(&["validate", "--scenario", toy().to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["unknowns"], v["equations"]);
    assert_eq!(
        (
            v["gas_nodes"].as_u64(),
            v["pipes"].as_u64(),
            v["buses"].as_u64(),
            v["conversions"].as_u64()
        ),
        (Some(4), Some(3), Some(3), Some(1))
    );
    assert_eq!(v["steps"].as_u64(), Some(96));
}

fn synthetic_run(dir: &Path, q: f64) {
    let times_h: Vec<f64> = (0..=96).map(|i| i as f64 * 0.25).collect();
    let results = ResultSet {
        coupling: CouplingKind::Pressure,
        dt: 900.0,
        dx: 1000.0,
        level: SnapshotLevel::None,
        conversion_nodes: vec!["D".into()],
        pressure: vec![vec![60.0]; times_h.len()],
        flow: vec![vec![q]; times_h.len()],
        newton_iterations: vec![1; times_h.len() - 1],
        times_h,
        conversion_snapshots: Vec::new(),
        gas_snapshots: Vec::new(),
        bus_snapshots: Vec::new(),
    };
    write_results(&results, dir).unwrap();
}

#[test]
fn report_totals_of_constant_flows() {
    let tmp = tempfile::tempdir().unwrap();
    for (q, consumed, generated) in [(1.0, 86400.0, 0.0), (0.0, 0.0, 0.0), (-0.5, 0.0, 43200.0)] {
        let dir = tmp.path().join(format!("q{q}"));
        synthetic_run(&dir, q);
        let v = stdout_json(&gaspower(&["report", dir.to_str().unwrap(), "--json"]));
        assert_eq!(v["totals"]["consumed_m3"].as_f64(), Some(consumed));
        assert_eq!(v["totals"]["generated_m3"].as_f64(), Some(generated));
    }
}

#[test]
fn report_matches_a_recomputation_from_the_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("p");
    assert_eq!(code(&simulate(&dir, &[])), 0);
    let text = fs::read_to_string(dir.join("flow.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    let (mut consumed, mut generated) = (0.0, 0.0);
    for w in rows.windows(2) {
        let dt = (w[1][0] - w[0][0]) * 3600.0;
        consumed += 0.5 * dt * (w[0][1].max(0.0) + w[1][1].max(0.0));
        generated += 0.5 * dt * ((-w[0][1]).max(0.0) + (-w[1][1]).max(0.0));
    }
    let v = stdout_json(&gaspower(&["report", dir.to_str().unwrap(), "--json"]));
    assert!((v["totals"]["consumed_m3"].as_f64().unwrap() - consumed).abs() <= 1e-9 * consumed);
    assert!((v["totals"]["generated_m3"].as_f64().unwrap() - generated).abs() <= 1e-9 * generated.max(1.0));
    assert!(consumed > 0.0 && generated > 0.0);
}

const NET: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<network xmlns="http://gaslib.zib.de/Gas" xmlns:framework="http://gaslib.zib.de/Framework">
  <framework:nodes>
    <source id="s"/>
    <innode id="a"/>
    <sink id="d"/>
  </framework:nodes>
  <framework:connections>
    <pipe id="p1" from="s" to="a"><length value="20" unit="km"/><diameter value="600" unit="mm"/></pipe>
    <pipe id="p2" from="a" to="d"><length value="15" unit="km"/><diameter value="500" unit="mm"/></pipe>
  </framework:connections>
</network>"#;

const SCN: &str = r#"<boundaryValue><scenario id="x">
  <node type="entry" id="s"><flow bound="both" value="36" unit="1000m_cube_per_hour"/></node>
  <node type="exit" id="d"><flow bound="both" value="8" unit="m_cube_per_s"/></node>
</scenario></boundaryValue>"#;

const CASE: &str = r#"function mpc = tiny
mpc.baseMVA = 100;
mpc.bus = [
  1 3 0 0 0 0 1 1.0 0 230 1 1.1 0.9;
  2 1 80 20 0 0 1 1.0 0 230 1 1.1 0.9;
  3 2 0 0 0 0 1 1.0 0 230 1 1.1 0.9;
];
mpc.gen = [
  1 0 0 300 -300 1.0 100 1 250 10;
  3 60 0 300 -300 1.01 100 1 250 10;
];
mpc.branch = [
  1 2 0.01 0.1 0.02 250 250 250 0 0 1 -360 360;
  2 3 0.01 0.1 0.02 250 250 250 0 0 1 -360 360;
];
"#;

#[test]
fn convert_and_merge_produce_runnable_scenarios() {
    let tmp = tempfile::tempdir().unwrap();
    let path = |name: &str| tmp.path().join(name).to_str().unwrap().to_string();
    fs::write(path("n.net"), NET).unwrap();
    fs::write(path("n.scn"), SCN).unwrap();
    fs::write(path("c.m"), CASE).unwrap();
    fs::write(path("t.csv"), "bus,gas_node\n3,d\n").unwrap();

    let o = gaspower(&[
        "convert",
        "gaslib",
        "--net",
        &path("n.net"),
        "--nominations",
        &path("n.scn"),
        "-o",
        &path("gas.toml"),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&gaspower(&["validate", "--scenario", &path("gas.toml")])), 0);

    let o = gaspower(&["convert", "matpower", "--case", &path("c.m")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("kind = \"slack\""));

    let o = gaspower(&[
        "convert",
        "merge",
        "--net",
        &path("n.net"),
        "--nominations",
        &path("n.scn"),
        "--case",
        &path("c.m"),
        "--table",
        &path("t.csv"),
        "-o",
        &path("merged.toml"),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&gaspower(&["validate", "--scenario", &path("merged.toml"), "--json"]));
    assert_eq!((v["conversions"].as_u64(), v["buses"].as_u64()), (Some(1), Some(3)));
    let o = gaspower(&[
        "simulate",
        "--scenario",
        &path("merged.toml"),
        "--out",
        &path("run"),
        "--dt",
        "3600",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let o = gaspower(&["convert", "gaslib", "--net", &path("c.m")]);
    assert_eq!(code(&o), 3);
}
