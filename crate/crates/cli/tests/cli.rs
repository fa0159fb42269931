use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ns_lab(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ns-lab"));
    cmd.args(args).env_remove("NS_LAB_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn record(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is a run record")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn independent_stability_of_the_centered_simplex_is_one_third() {
    let out = ns_lab(&["stability", "--rho", "0", "--samples", "200000"], &[]);
    let r = record(&out);
    let mc = &r["results"]["mc"];
    let (v, se) = (mc["value"].as_f64().unwrap(), mc["std_error"].as_f64().unwrap());
    assert!((v - 1.0 / 3.0).abs() < 4.0 * se, "{v} ± {se}");
    assert!(r["results"]["quadrature"].is_null());
}

#[test]
fn half_plane_stability_matches_the_arcsine_law() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "half.json",
        r#"{"command": "stability", "rho": 0.5, "samples": 100000,
            "partition": {"n": 2, "k": 2, "shift": [0, 0], "directions": [[1, 0], [-1, 0]]}}"#,
    );
    let r = record(&ns_lab(&["--config", &cfg], &[]));
    let q = r["results"]["quadrature"]["value"].as_f64().unwrap();
    assert!((q - 2.0 / 3.0).abs() < 1e-8, "{q}");
    let mc = &r["results"]["mc"];
    let (v, se) = (mc["value"].as_f64().unwrap(), mc["std_error"].as_f64().unwrap());
    assert!((v - 2.0 / 3.0).abs() < 4.0 * se, "{v} ± {se}");
}

#[test]
fn malformed_json_is_a_config_error_with_a_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", "{\"command\": \"stability\",\n \"rho\": }\n");
    let out = ns_lab(&["--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("line 2"), "{msg}");
    assert!(msg.contains("column"), "{msg}");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "typo.json", r#"{"command": "stability", "roh": 0.5}"#);
    let out = ns_lab(&["--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("roh"));
}

#[test]
fn missing_subcommand_is_a_config_error() {
    assert_eq!(ns_lab(&[], &[]).status.code(), Some(2));
}

#[test]
fn limits_plateaus_follow_the_facet_offset() {
    for (c, rho) in [(0.0, 0.5), (1.0, 0.5), (1.0, -0.5)] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(
            dir.path(),
            "limits.json",
            &format!(r#"{{"command": "limits", "c": {c}, "rho": {rho}, "points": 11}}"#),
        );
        let r = record(&ns_lab(&["--config", &cfg], &[]));
        let res = &r["results"];
        for side in ["t_min", "t_max"] {
            let got = res["plateaus"][side].as_f64().unwrap();
            let want = res["expected"][side].as_f64().unwrap();
            assert!((got - want).abs() < 1e-6, "c={c} rho={rho} {side}: {got} vs {want}");
        }
        if c == 0.0 {
            assert!(res["plateaus"]["t_max"].as_f64().unwrap().abs() < 1e-9);
        }
    }
}

#[test]
fn limits_output_as_csv() {
    let out = ns_lab(&["limits", "--rho", "-0.5", "--format", "csv"], &[]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,value"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (t, v) = l.split_once(',').unwrap();
            (t.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 201);
    assert_eq!(rows[0].0, -50.0);
    assert_eq!(rows[200].0, 50.0);
}

#[test]
fn geometric_preconditions_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let same = write(dir.path(), "same.json", r#"{"command": "limits", "pair": [1, 1]}"#);
    let out = ns_lab(&["--config", &same], &[]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("do not share a facet"));

    let space = write(dir.path(), "space.json", r#"{"command": "limits", "n": 3}"#);
    assert_eq!(ns_lab(&["--config", &space], &[]).status.code(), Some(3));
}

#[test]
fn centered_improve_reports_no_direction() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "imp.json", r#"{"command": "improve", "shift": [0, 0], "samples": 20000}"#);
    let out = ns_lab(&["--config", &cfg], &[]);
    let r = record(&out);
    assert!(stderr(&out).contains("no improving direction detected"));
    assert_eq!(r["results"]["report"]["status"], "no-improving-direction");
}

#[test]
fn single_uniform_voter_is_enumerated_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "vote.json",
        r#"{"command": "plurality", "n": 1, "alpha": 0, "beta": 0, "rho": 0.5, "budget": 1, "samples": 20000}"#,
    );
    let out = ns_lab(&["--config", &cfg], &[]);
    let r = record(&out);
    let s = &r["results"]["plurality"]["stability"];
    assert_eq!(s["method"], "exact");
    assert!((s["value"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12, "{s}");
    assert!(stderr(&out).to_lowercase().contains("warning"));
}

#[test]
fn bilinear_rejects_foreign_volumes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bil.json",
        r#"{"command": "bilinear", "a_volumes": [0.5, 0.25, 0.25], "samples": 10000}"#,
    );
    assert_eq!(ns_lab(&["--config", &cfg], &[]).status.code(), Some(2));
}

#[test]
fn replaying_a_record_reproduces_its_results() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let out = ns_lab(
        &["stability", "--rho", "0.3", "--samples", "50000", "--seed", "9", "--out", first.to_str().unwrap()],
        &[],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let a: Value = serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();

    let second = dir.path().join("second.json");
    let out = ns_lab(&["--config", first.to_str().unwrap(), "--out", second.to_str().unwrap()], &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let b: Value = serde_json::from_str(&std::fs::read_to_string(&second).unwrap()).unwrap();

    assert_eq!(
        serde_json::to_string(&a["results"]).unwrap(),
        serde_json::to_string(&b["results"]).unwrap()
    );
    // Only the output path differs between the two configs.
    let strip = |v: &Value| {
        let mut c = v["config"].clone();
        c.as_object_mut().unwrap().remove("out");
        c
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn tampered_records_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rec.json");
    let out = ns_lab(&["stability", "--samples", "10000", "--out", path.to_str().unwrap()], &[]);
    assert!(out.status.success());
    let mut rec: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    rec["results"]["mc"]["value"] = Value::from(0.5);
    std::fs::write(&path, serde_json::to_string(&rec).unwrap()).unwrap();
    let out = ns_lab(&["--config", path.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["volumes", "--samples", "100000", "--seed", "4"];
    let one = record(&ns_lab(&args, &[("NS_LAB_THREADS", "1")]));
    let four = record(&ns_lab(&args, &[("NS_LAB_THREADS", "4")]));
    assert_eq!(one["results"], four["results"]);
    assert_eq!(one["digest"], four["digest"]);
}
