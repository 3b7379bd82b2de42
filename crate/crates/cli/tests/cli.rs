use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn su2q(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_su2q")).args(args).output().expect("run su2q")
}

fn ok(args: &[&str]) {
    let out = su2q(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn entry(file: &Value, two_l: &str, i: usize, j: usize) -> (f64, f64) {
    let z = &file["coeffs"][two_l][i][j];
    (z[0].as_f64().unwrap(), z[1].as_f64().unwrap())
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }

    /// Grid of exactness 6 and the samples of t¹₀₀ = |x0 + i x3|² − |x1 + i x2|² on it.
    fn t100_samples(&self) {
        ok(&["grid", "--two-L", "6", "--out", &self.arg("g.json")]);
        let grid = read(&self.path("g.json"));
        let values: Vec<Value> = grid["nodes"]
            .as_array()
            .unwrap()
            .iter()
            .map(|q| {
                let x: Vec<f64> = q.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
                serde_json::json!([x[0] * x[0] + x[3] * x[3] - x[1] * x[1] - x[2] * x[2], 0.0])
            })
            .collect();
        std::fs::write(self.path("s.json"), serde_json::json!({ "values": values }).to_string()).unwrap();
    }
}

#[test]
fn analyze_and_apply() {
    let ws = Workspace::new();
    ws.t100_samples();
    ok(&["analyze", "--grid", &ws.arg("g.json"), "--samples", &ws.arg("s.json"), "--two-L", "3", "--out", &ws.arg("f.json")]);
    let f = read(&ws.path("f.json"));
    assert_eq!(f["two_L"], 3);
    for (t, block) in f["coeffs"].as_object().unwrap() {
        for (i, row) in block.as_array().unwrap().iter().enumerate() {
            for (j, z) in row.as_array().unwrap().iter().enumerate() {
                let v = z[0].as_f64().unwrap().hypot(z[1].as_f64().unwrap());
                if (t.as_str(), i, j) == ("2", 1, 1) {
                    assert!((v - 1.0 / 3.0).abs() < 1e-12);
                } else {
                    assert!(v < 1e-12, "{t} {i} {j}: {v}");
                }
            }
        }
    }
    ok(&["apply", "--field", "laplacian", "--function", &ws.arg("f.json"), "--out", &ws.arg("lf.json")]);
    let (re, im) = entry(&read(&ws.path("lf.json")), "2", 1, 1);
    assert!((re + 2.0 / 3.0).abs() < 1e-12 && im.abs() < 1e-12);

    ok(&["extract", "--operator", "laplacian", "--two-L", "3", "--out", &ws.arg("lap.json")]);
    ok(&["op-apply", "--symbol", &ws.arg("lap.json"), "--function", &ws.arg("f.json"), "--out", &ws.arg("of.json")]);
    let (re, _) = entry(&read(&ws.path("of.json")), "2", 1, 1);
    assert!((re + 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn synth_analyze_round_trip() {
    let ws = Workspace::new();
    ws.t100_samples();
    let (g, s, f, s2, f2) = (ws.arg("g.json"), ws.arg("s.json"), ws.arg("f.json"), ws.arg("s2.json"), ws.arg("f2.json"));
    ok(&["analyze", "--grid", &g, "--samples", &s, "--two-L", "3", "--out", &f]);
    ok(&["synth", "--function", &f, "--grid", &g, "--out", &s2]);
    ok(&["analyze", "--grid", &g, "--samples", &s2, "--two-L", "3", "--out", &f2]);
    let (a, b) = (read(&ws.path("f.json")), read(&ws.path("f2.json")));
    for t in 0..=3 {
        let size = t + 1;
        for i in 0..size {
            for j in 0..size {
                let (x, y) = (entry(&a, &t.to_string(), i, j), entry(&b, &t.to_string(), i, j));
                assert!((x.0 - y.0).abs() < 1e-12 && (x.1 - y.1).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn symbol_pipeline() {
    let ws = Workspace::new();
    let (dp, dm, id) = (ws.arg("dp.json"), ws.arg("dm.json"), ws.arg("id.json"));
    ok(&["extract", "--operator", "partial_plus", "--two-L", "6", "--out", &dp]);
    ok(&["extract", "--operator", "partial_minus", "--two-L", "6", "--out", &dm]);
    let sym = read(&ws.path("dp.json"));
    assert_eq!(sym["x_invariant"], true);
    assert_eq!(sym["grid_ref"], Value::Null);

    ok(&["diff", "--symbol", &dp, "--dir", "plus", "--out", &id]);
    let d = read(&ws.path("id.json"));
    assert_eq!(d["two_L"], 5);
    for t in 0..=5usize {
        for i in 0..=t {
            for j in 0..=t {
                let z = d["data"][t.to_string()][0][i][j][0].as_f64().unwrap();
                assert!((z - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    ok(&["adjoint", "--symbol", &dp, "--n", "2", "--out", &ws.arg("adj.json")]);
    ok(&["compose", "--symbol", &dp, "--symbol", &dm, "--n", "3", "--out", &ws.arg("pm.json")]);
    ok(&["extract", "--operator", "partial_plus*partial_minus", "--two-L", "4", "--out", &ws.arg("pm_oracle.json")]);
    let (adj, dm_file) = (read(&ws.path("adj.json")), read(&ws.path("dm.json")));
    let (pm, oracle) = (read(&ws.path("pm.json")), read(&ws.path("pm_oracle.json")));
    for t in 0..=4usize {
        for i in 0..=t {
            for j in 0..=t {
                for k in 0..2 {
                    let a = adj["data"][t.to_string()][0][i][j][k].as_f64().unwrap();
                    let b = dm_file["data"][t.to_string()][0][i][j][k].as_f64().unwrap();
                    assert!((a - b).abs() < 1e-10);
                    let x = pm["data"][t.to_string()][0][i][j][k].as_f64().unwrap();
                    let y = oracle["data"][t.to_string()][0][i][j][k].as_f64().unwrap();
                    assert!((x - y).abs() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn x_dependent_extraction_keeps_grid() {
    let ws = Workspace::new();
    ok(&["extract", "--operator", "q_zero*partial_zero", "--two-L", "3", "--out", &ws.arg("q.json")]);
    let sym = read(&ws.path("q.json"));
    assert_eq!(sym["x_invariant"], false);
    assert!(sym["grid_ref"].as_u64().unwrap() >= 2);
    ok(&["l2-cert", "--symbol", &ws.arg("q.json"), "--out", &ws.arg("cert.json")]);
    assert!(read(&ws.path("cert.json"))["certificate"].as_f64().unwrap() > 0.0);
}

#[test]
fn class_report_exit_codes() {
    let ws = Workspace::new();
    let lap = ws.arg("lap.json");
    ok(&["extract", "--operator", "laplacian", "--two-L", "8", "--out", &lap]);
    ok(&["class-report", "--symbol", &lap, "--order", "2", "--out", &ws.arg("r.json")]);
    let report = read(&ws.path("r.json"));
    let check = &report["checks"][0];
    for key in ["alpha", "beta", "N", "C", "witness", "pass"] {
        assert!(!check[key].is_null(), "missing {key}");
    }
    for key in ["node", "two_l", "i", "j"] {
        assert!(!check["witness"][key].is_null(), "missing witness.{key}");
    }
    assert!(report["summary"]["note"].as_str().unwrap().contains("necessity"));
    let out = su2q(&["class-report", "--symbol", &lap, "--order", "0"]);
    assert_eq!(out.status.code(), Some(1));

    let cert = su2q(&["l2-cert", "--symbol", &lap, "--mu", "2"]);
    let cert: Value = serde_json::from_slice(&cert.stdout).unwrap();
    assert_eq!(cert["certifiable"], true);
}

#[test]
fn outputs_are_deterministic() {
    let ws = Workspace::new();
    ok(&["extract", "--operator", "q_plus*partial_zero", "--two-L", "3", "--out", &ws.arg("a.json")]);
    ok(&["extract", "--operator", "q_plus*partial_zero", "--two-L", "3", "--out", &ws.arg("b.json")]);
    assert_eq!(std::fs::read(ws.path("a.json")).unwrap(), std::fs::read(ws.path("b.json")).unwrap());
}

#[test]
fn malformed_input_exits_2() {
    let ws = Workspace::new();
    std::fs::write(ws.path("bad.json"), r#"{"two_l_max": 2}"#).unwrap();
    std::fs::write(ws.path("f.json"), r#"{"two_L": 0, "coeffs": {"0": [[[1.0, 0.0]]]}}"#).unwrap();
    let out = su2q(&["synth", "--function", &ws.arg("f.json"), "--grid", &ws.arg("bad.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nodes"));
    assert_eq!(su2q(&["extract", "--operator", "curl", "--two-L", "2"]).status.code(), Some(2));
    assert_eq!(su2q(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(su2q(&["diff", "--symbol", &ws.arg("missing.json"), "--dir", "plus"]).status.code(), Some(2));
    let threads = Command::new(env!("CARGO_BIN_EXE_su2q"))
        .args(["grid", "--two-L", "2"])
        .env("SU2Q_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_su2q"))
            .args(["extract", "--operator", "partial_zero*q_zero", "--two-L", "3"])
            .env("SU2Q_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("4"));
}
