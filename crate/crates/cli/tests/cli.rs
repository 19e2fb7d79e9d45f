use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const REFERENCE_MARKET: &str = r#"{"points":[
  {"a":1,"v":100,"b":0.25},{"a":2,"v":150,"b":0.25},
  {"a":3,"v":280,"b":0.25},{"a":4,"v":350,"b":0.25}]}"#;

fn mbp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

struct Work(TempDir);

impl Work {
    fn new() -> Self {
        Work(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, contents: &str) -> String {
        let path = self.0.path().join(name);
        fs::write(&path, contents).unwrap();
        path.to_str().unwrap().to_owned()
    }

    fn path(&self, name: &str) -> String {
        self.0.path().join(name).to_str().unwrap().to_owned()
    }
}

fn read(path: impl AsRef<Path>) -> Vec<u8> {
    fs::read(path).unwrap()
}

#[test]
fn gen_data_is_reproducible() {
    let w = Work::new();
    let (a, b) = (w.path("a.csv"), w.path("b.csv"));
    for out in [&a, &b] {
        let o = mbp(&["gen-data", "simulated1", "--n", "100", "--d", "5", "--seed", "1", "--out", out]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(read(&a), read(&b));
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 101);
}

#[test]
fn gen_data_classification_writes_binary_targets() {
    let w = Work::new();
    let out = w.path("c.csv");
    assert_eq!(code(&mbp(&["gen-data", "simulated2", "--n", "200", "--d", "3", "--out", &out])), 0);
    let text = fs::read_to_string(&out).unwrap();
    for line in text.lines().skip(1) {
        let y = line.rsplit(',').next().unwrap();
        assert!(y == "0" || y == "1", "target {y}");
    }
}

#[test]
fn gen_data_rejects_unknown_kind() {
    let w = Work::new();
    let o = mbp(&["gen-data", "simulated3", "--n", "1", "--d", "1", "--out", &w.path("x.csv")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn train_models() {
    let w = Work::new();
    let line = w.file("line.csv", "x,y\n1,2\n2,4\n");
    let h = json(&mbp(&["train", "--data", &line, "--model", "linear"]));
    assert!((h["weights"][0].as_f64().unwrap() - 2.0).abs() < 1e-12);

    let sym = w.file("sym.csv", "x,y\n1,1\n-1,1\n1,0\n-1,0\n");
    let h = json(&mbp(&["train", "--data", &sym, "--model", "logistic"]));
    assert!(h["weights"][0].as_f64().unwrap().abs() < 1e-8);

    assert_eq!(code(&mbp(&["train", "--data", &sym, "--model", "svm_l2", "--mu", "0"])), 2);
    let h = json(&mbp(&["train", "--data", &sym, "--model", "svm_l2", "--mu", "0.1"]));
    assert!(h["weights"][0].as_f64().unwrap().abs() < 1e-8);
}

fn square_to_optimal_curve(w: &Work, out: &str, seed: &str) -> Output {
    let model = w.file("model.json", r#"{"kind":"linear","weights":[1.0,-2.0,0.5],"mu":0.0}"#);
    mbp(&[
        "curve", "--model", &model, "--epsilon", "square_to_optimal", "--grid", "geom:0.5:8:5",
        "--samples", "4000", "--seed", seed, "--out", out,
    ])
}

#[test]
fn square_to_optimal_curve_tracks_inverse() {
    let w = Work::new();
    let out = w.path("curve.json");
    assert_eq!(code(&square_to_optimal_curve(&w, &out, "3")), 0);
    let curve: Value = serde_json::from_slice(&read(&out)).unwrap();
    assert_eq!(curve["epsilon"], "square_to_optimal");
    for p in curve["points"].as_array().unwrap() {
        let x = p["x"].as_f64().unwrap();
        let mean = p["mean_error"].as_f64().unwrap();
        let se = p["stderr"].as_f64().unwrap();
        assert!((mean - 1.0 / x).abs() <= 5.0 * se, "x {x}: {mean} vs {}", 1.0 / x);
    }
}

#[test]
fn curve_output_is_byte_identical_per_seed() {
    let w = Work::new();
    let (a, b) = (w.path("a.json"), w.path("b.json"));
    square_to_optimal_curve(&w, &a, "9");
    square_to_optimal_curve(&w, &b, "9");
    assert_eq!(read(&a), read(&b));
}

#[test]
fn curve_needs_two_samples() {
    let w = Work::new();
    let model = w.file("model.json", r#"{"kind":"linear","weights":[1.0],"mu":0.0}"#);
    let o = mbp(&["curve", "--model", &model, "--epsilon", "square_to_optimal", "--samples", "1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn price_subcommands_on_the_reference_market() {
    let w = Work::new();
    let market = w.file("m.json", REFERENCE_MARKET);
    let dp = json(&mbp(&["price", "optimize", "--market", &market]));
    assert_eq!(dp["objective"], 193.75);
    assert_eq!(dp["feasibility"], "relaxed_5");
    assert_eq!(dp["z"], serde_json::json!([100.0, 150.0, 225.0, 300.0]));
    let exact = json(&mbp(&["price", "oracle", "--exact", "--market", &market]));
    assert_eq!(exact["objective"], 200.0);
    let relaxed = json(&mbp(&["price", "oracle", "--market", &market]));
    assert_eq!(relaxed["objective"], 193.75);
    let opt_c = json(&mbp(&["price", "baseline", "--kind", "opt_c", "--market", &market]));
    assert_eq!(opt_c["objective"], 140.0);
}

#[test]
fn price_interpolate_projects_targets() {
    let w = Work::new();
    let targets = w.file("t.json", r#"{"breakpoints":[{"a":1,"price":1},{"a":2,"price":4}]}"#);
    let p = json(&mbp(&["price", "interpolate", "--targets", &targets, "--tol", "1e-10"]));
    let z: Vec<f64> = p["z"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!((z[0] - 1.8).abs() < 1e-6 && (z[1] - 3.6).abs() < 1e-6);
}

#[test]
fn unsorted_market_is_a_domain_error() {
    let w = Work::new();
    let market = w.file("m.json", r#"{"points":[{"a":2,"v":1,"b":1},{"a":1,"v":2,"b":1}]}"#);
    assert_eq!(code(&mbp(&["price", "optimize", "--market", &market])), 1);
}

#[test]
fn validate_exit_codes() {
    let w = Work::new();
    let market = w.file("m.json", REFERENCE_MARKET);
    let dp = w.path("dp.json");
    assert_eq!(code(&mbp(&["price", "optimize", "--market", &market, "--out", &dp])), 0);
    let ok = mbp(&["validate", "--curve", &dp]);
    assert_eq!(code(&ok), 0);
    assert_eq!(json(&ok)["witnesses"], serde_json::json!([]));

    let bad = w.file("bad.json", r#"{"breakpoints":[{"a":1,"price":1},{"a":2,"price":5}]}"#);
    let o = mbp(&["validate", "--curve", &bad]);
    assert_eq!(code(&o), 1);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["subadditive"], false);
    assert!(report["witnesses"]
        .as_array()
        .unwrap()
        .iter()
        .any(|w| w["kind"] == "subadditive"));

    assert_eq!(code(&mbp(&["validate", "--curve", &w.path("missing.json")])), 2);
}

#[test]
fn simulate_metrics() {
    let w = Work::new();
    let market = w.file("m.json", REFERENCE_MARKET);
    let dp = w.path("dp.json");
    let max_c = w.path("max_c.json");
    mbp(&["price", "optimize", "--market", &market, "--out", &dp]);
    mbp(&["price", "baseline", "--kind", "max_c", "--market", &market, "--out", &max_c]);
    let m = json(&mbp(&["simulate", "--market", &market, "--pricing", &dp]));
    assert_eq!((m["revenue"].as_f64(), m["affordability"].as_f64()), (Some(193.75), Some(1.0)));
    let m = json(&mbp(&["simulate", "--market", &market, "--pricing", &max_c]));
    assert_eq!((m["revenue"].as_f64(), m["affordability"].as_f64()), (Some(87.5), Some(0.25)));

    let empty = w.file("e.json", r#"{"points":[]}"#);
    assert_eq!(code(&mbp(&["simulate", "--market", &empty, "--pricing", &dp])), 1);
}

fn identity_error_curve() -> String {
    let points: Vec<Value> = [0.5, 1.0, 2.0, 4.0]
        .iter()
        .map(|&x: &f64| serde_json::json!({"x": x, "mean_error": 1.0 / x, "stderr": 0.0, "samples": 2}))
        .collect();
    serde_json::json!({"epsilon": "square_to_optimal", "seed": 0, "points": points}).to_string()
}

#[test]
fn quotes() {
    let w = Work::new();
    let curve = w.file(
        "c.json",
        r#"{"breakpoints":[{"a":1,"price":100},{"a":2,"price":150},{"a":3,"price":225},{"a":4,"price":300}]}"#,
    );
    let errors = w.file("e.json", &identity_error_curve());
    let q = json(&mbp(&["quote", "--curve", &curve, "--error-curve", &errors, "--error-budget", "0.5"]));
    assert_eq!((q["delta"].as_f64(), q["x"].as_f64(), q["price"].as_f64()), (Some(0.5), Some(2.0), Some(150.0)));

    let low = mbp(&["quote", "--curve", &curve, "--error-curve", &errors, "--price-budget", "10"]);
    assert_eq!(code(&low), 1);

    let q = json(&mbp(&["quote", "--curve", &curve, "--point", "3"]));
    assert_eq!(q["price"].as_f64(), Some(225.0));

    let both = mbp(&["quote", "--curve", &curve, "--point", "3", "--error-budget", "0.5"]);
    assert_eq!(code(&both), 2);
}

#[test]
fn bench_reports_both_solvers() {
    let r = json(&mbp(&["bench", "--dp-sizes", "10,20", "--exact-sizes", "4,5", "--reps", "1"]));
    assert_eq!(r["optimize_dp"].as_array().unwrap().len(), 2);
    assert_eq!(r["oracle_exact"][1]["n"], 5);
}

#[test]
fn full_pipeline_runs_end_to_end() {
    let w = Work::new();
    let data = w.path("d.csv");
    let model = w.path("h.json");
    let curve = w.path("c.json");
    assert_eq!(code(&mbp(&["gen-data", "simulated2", "--n", "400", "--d", "3", "--seed", "2", "--out", &data])), 0);
    assert_eq!(code(&mbp(&["train", "--data", &data, "--model", "logistic", "--out", &model])), 0);
    let o = mbp(&[
        "curve", "--model", &model, "--data", &data, "--epsilon", "log", "--samples", "50", "--out", &curve,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let parsed: Value = serde_json::from_slice(&read(PathBuf::from(&curve))).unwrap();
    assert_eq!(parsed["points"].as_array().unwrap().len(), 16);
}
