use std::path::Path;
use std::process::{Command, Output};

fn odelearn(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_odelearn")).args(args).current_dir(dir).output().unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

/// Rows of `query,x..,f..,provenance` as (f values, provenance).
fn read_estimates(text: &str, d: usize) -> Vec<(Vec<f64>, String)> {
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert_eq!(header.split(',').count(), 2 + 2 * d);
    lines
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            let f = cols[1 + d..1 + 2 * d].iter().map(|c| c.parse().unwrap()).collect();
            (f, cols[1 + 2 * d].to_string())
        })
        .collect()
}

#[test]
fn stubble_simulate_then_estimate() {
    let dir = tempfile::tempdir().unwrap();
    ok(&odelearn(&["simulate", "--model", "stubble", "--field", "rotation", "--d", "2", "--n", "1600", "--dt", "0.01", "--out", "st.csv"], dir.path()));
    assert!(dir.path().join("st.json").exists());
    let out = odelearn(&["estimate", "--data", "st.csv", "--queries", "0.5,0.5;0.3,0.7", "--bandwidth", "0.2"], dir.path());
    ok(&out);
    let rows = read_estimates(&String::from_utf8_lossy(&out.stdout), 2);
    assert_eq!(rows.len(), 2);
    for ((f, tag), x) in rows.iter().zip([[0.5, 0.5], [0.3, 0.7]]) {
        assert_eq!(tag, "regression");
        // Noiseless: only the O(dt) bias of the scaled increment remains.
        assert!((f[0] + x[1]).abs() <= 0.02 && (f[1] - x[0]).abs() <= 0.02, "{f:?} at {x:?}");
    }
}

#[test]
fn snake_simulate_then_estimate() {
    let dir = tempfile::tempdir().unwrap();
    ok(&odelearn(
        &["simulate", "--model", "snake", "--field", "rotation", "--d", "2", "--beta", "2", "--n", "4096", "--dt", "0.0015339807878856412", "--x1", "1,0", "--out", "sn.csv", "--meta", "meta.json"],
        dir.path(),
    ));
    let out = odelearn(&["estimate", "--data", "sn.csv", "--meta", "meta.json", "--estimator", "gen", "--queries", "0.2,0.1;0,-0.5", "--out", "est.csv"], dir.path());
    ok(&out);
    let text = std::fs::read_to_string(dir.path().join("est.csv")).unwrap();
    for ((f, tag), x) in read_estimates(&text, 2).iter().zip([[0.2, 0.1], [0.0, -0.5]]) {
        assert_eq!(tag, "interpolated");
        assert!((f[0] + x[1]).abs() <= 1e-2 && (f[1] - x[0]).abs() <= 1e-2, "{f:?} at {x:?}");
    }
    // Without fallback a query far off the curve is an error.
    let far = odelearn(&["estimate", "--data", "sn.csv", "--meta", "meta.json", "--estimator", "gen", "--queries", "1.9,1.9", "--no-fallback"], dir.path());
    assert!(!far.status.success());
}

#[test]
fn benchmark_then_rates() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
        "model": "stubble-lip",
        "field": "cubic",
        "d": 1,
        "beta": 1,
        "sigma": 0.1,
        "ns": [256, 1024],
        "dt": {"rule": "fixed", "dt": 0.1},
        "replicates": 4,
        "seed": 5,
        "queries": {"kind": "points", "points": [[0.5]]},
        "regime": "fixed-step"
    }"#;
    std::fs::write(dir.path().join("cfg.json"), config).unwrap();
    let bench = odelearn(&["benchmark", "--config", "cfg.json", "--ns", "256,512,1024", "--out", "run"], dir.path());
    ok(&bench);
    let results = std::fs::read_to_string(dir.path().join("run/results.csv")).unwrap();
    assert!(results.starts_with("model,n,replicate,error,failures"));
    assert_eq!(results.lines().count(), 1 + 3 * 4);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run/report.json")).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 3);
    assert!(dir.path().join("run/plot.csv").exists());
    let rates = odelearn(&["rates", "--results", "run/results.csv", "--config", "cfg.json"], dir.path());
    ok(&rates);
    let text = String::from_utf8_lossy(&rates.stdout);
    assert!(text.contains("stubble-lip"), "{text}");
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let unknown_field = odelearn(&["simulate", "--model", "stubble", "--field", "nope", "--d", "2", "--n", "100", "--dt", "0.1", "--out", "x.csv"], dir.path());
    assert!(!unknown_field.status.success());
    assert!(String::from_utf8_lossy(&unknown_field.stderr).contains("nope"));
    std::fs::write(dir.path().join("bad.json"), r#"{"model": "stubble-lip", "colour": 3}"#).unwrap();
    assert!(!odelearn(&["benchmark", "--config", "bad.json"], dir.path()).status.success());
    assert!(!odelearn(&["benchmark", "--config", "missing.json"], dir.path()).status.success());
    let no_x1 = odelearn(&["simulate", "--model", "snake", "--field", "rotation", "--d", "2", "--n", "100", "--dt", "0.1", "--out", "s.csv"], dir.path());
    assert!(!no_x1.status.success());
    assert!(!odelearn(&["estimate", "--data", "missing.csv", "--queries", "0.5,0.5"], dir.path()).status.success());
}
