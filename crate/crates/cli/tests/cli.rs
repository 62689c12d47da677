use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use czreach::brs::Termination;
use czreach::sets::{ConstrainedZonotope, Hyperbox};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tempfile::TempDir;

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn czreach(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_czreach")).args(args).output().expect("binary runs")
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    czreach(&args)
}

fn write_config(dir: &TempDir, v: &Value) -> PathBuf {
    let p = dir.path().join("config.json");
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn stderr_doc(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|_| panic!("{}", String::from_utf8_lossy(&o.stderr)))
}

fn small_dubins() -> Value {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(shipped("dubins.json")).unwrap()).unwrap();
    v["horizon"] = 3.into();
    v["max_branches"] = 8.into();
    v["samples_per_step"] = 40.into();
    v.as_object_mut().unwrap().remove("out");
    v
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepDoc {
    step: usize,
    sets: Vec<ConstrainedZonotope>,
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepsDoc {
    termination: Termination,
    steps: Vec<StepDoc>,
}

#[test]
fn horizon_zero_writes_only_the_target() {
    let out = TempDir::new().unwrap();
    let o = run("reach", &shipped("horizon0.json"), out.path(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let steps: StepsDoc = serde_json::from_str(&std::fs::read_to_string(out.path().join("steps.json")).unwrap()).unwrap();
    assert_eq!(steps.termination, Termination::HorizonReached);
    assert_eq!(steps.steps.len(), 1);
    assert_eq!(steps.steps[0].sets.len(), 1);
    let bx = steps.steps[0].sets[0].interval_closure().unwrap();
    assert_eq!(bx, Hyperbox::from_slices(&[1.0, -0.5], &[2.0, 0.5]).unwrap());

    let csv = std::fs::read_to_string(out.path().join("points.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("step,piece,x1,x2"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| r.starts_with("0,0,")));
    let diag = read_json(&out.path().join("diag.json"));
    assert_eq!(diag["steps"].as_array().unwrap().len(), 1);
}

#[test]
fn ragged_matrix_is_a_schema_error_with_its_path() {
    let dir = TempDir::new().unwrap();
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(shipped("horizon0.json")).unwrap()).unwrap();
    v["target"]["G"] = serde_json::json!([[0.5, 0.0], [0.5]]);
    let out = dir.path().join("out");
    let o = run("reach", &write_config(&dir, &v), &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    let doc = stderr_doc(&o);
    assert_eq!(doc["error"], "schema");
    assert_eq!(doc["path"], "target.G[1]");
    assert_eq!(read_json(&out.join("error.json")), doc);
}

#[test]
fn schema_errors_name_the_field() {
    let base: Value = serde_json::from_str(&std::fs::read_to_string(shipped("horizon0.json")).unwrap()).unwrap();
    let cases: Vec<(Box<dyn Fn(&mut Value)>, &str)> = vec![
        (Box::new(|v| v["disturbance"]["G"] = serde_json::json!([[0.1, 0.0, 0.0], [0.0, 0.1, 0.0], [0.0, 0.0, 0.1]])), "disturbance.c"),
        (Box::new(|v| v["inputs"] = serde_json::json!({"lower": [-1.0, -1.0], "upper": [1.0, 1.0]})), "inputs"),
        (Box::new(|v| v["target"]["A"] = serde_json::json!([[1.0]])), "target.A[0]"),
        (Box::new(|v| v["horizon"] = serde_json::json!(-1)), "horizon"),
        (Box::new(|v| v["model"] = serde_json::json!("unicycle")), "model"),
        (Box::new(|v| v["alpha"] = serde_json::json!(0.5)), "alpha"),
        (Box::new(|v| v["safe"] = serde_json::json!([{"H": [[1.0, 0.0]], "a": [1.0, 2.0]}])), "safe[0].a"),
    ];
    for (edit, path) in cases {
        let dir = TempDir::new().unwrap();
        let mut v = base.clone();
        edit(&mut v);
        let o = run("reach", &write_config(&dir, &v), &dir.path().join("out"), &[]);
        assert_eq!(o.status.code(), Some(2), "{path}");
        assert_eq!(stderr_doc(&o)["path"], path);
    }

    let dir = TempDir::new().unwrap();
    let mut v = base.clone();
    v["horizn"] = 3.into();
    let o = run("reach", &write_config(&dir, &v), &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_doc(&o)["message"].as_str().unwrap().contains("unknown field `horizn`"));
}

#[test]
fn computation_failures_exit_with_three() {
    let dir = TempDir::new().unwrap();
    let mut v = small_dubins();
    v["l_bar"] = serde_json::json!([0.0, 0.0, 0.0]);
    let o = run("reach", &write_config(&dir, &v), &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_doc(&o)["error"], "runtime");
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, &small_dubins());
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for (out, seed) in [(&a, "4"), (&b, "4"), (&c, "5")] {
        let o = run("reach", &cfg, out, &["--seed", seed, "--svg"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["steps.json", "points.csv", "diag.json", "report.json", "plot_1_2.svg"] {
        let x = std::fs::read(a.join(f)).unwrap();
        assert_eq!(x, std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    // The seed only drives sampling.
    assert_eq!(std::fs::read(a.join("steps.json")).unwrap(), std::fs::read(c.join("steps.json")).unwrap());
    assert_ne!(std::fs::read(a.join("points.csv")).unwrap(), std::fs::read(c.join("points.csv")).unwrap());
}

#[test]
fn emitted_sets_round_trip() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = run("reach", &write_config(&dir, &small_dubins()), &out, &[]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(out.join("steps.json")).unwrap();
    let parsed: StepsDoc = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed.steps.len(), 4);
    assert!(parsed.steps.iter().skip(1).all(|s| !s.sets.is_empty()));
    assert_eq!(serde_json::to_string_pretty(&parsed).unwrap() + "\n", text);
    let again: StepsDoc = serde_json::from_str(&serde_json::to_string(&parsed).unwrap()).unwrap();
    assert_eq!(again, parsed);
}

#[test]
fn shipped_reach_configs_run() {
    for (name, steps) in [("example2.json", 2), ("tank.json", 20), ("dubins.json", 10)] {
        let dir = TempDir::new().unwrap();
        let o = run("reach", &shipped(name), dir.path(), &[]);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        let report = read_json(&dir.path().join("report.json"));
        assert_eq!(report["steps_computed"], steps, "{name}");
        assert!(dir.path().join("plot_1_2.svg").exists());
    }
}

#[test]
fn box_minus_box_has_no_gap() {
    let dir = TempDir::new().unwrap();
    let o = run("minkdiff", &shipped("box_minus_box.json"), dir.path(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&dir.path().join("report.json"));
    assert!(r["max_gap"].as_f64().unwrap().abs() < 1e-9);
    assert!(r["max_rich_gap"].as_f64().unwrap() < 1e-9);
    assert_eq!(r["oracle"]["gap_points"], 0);
    assert_eq!(r["soundness"]["violations"], 0);
    let d: czreach::minkdiff::DiffResult =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("difference.json")).unwrap()).unwrap();
    assert_eq!(d.difference.interval_closure().unwrap(), Hyperbox::from_slices(&[-1.5, -0.75], &[1.5, 0.75]).unwrap());
}

#[test]
fn gap_example_reports_the_gap() {
    let dir = TempDir::new().unwrap();
    let o = run("minkdiff", &shipped("gap_example.json"), dir.path(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&dir.path().join("report.json"));
    assert!(r["oracle"]["gap_points"].as_u64().unwrap() >= 1);
    assert!(r["max_gap"].as_f64().unwrap() > 0.05);
    assert_eq!(r["soundness"]["violations"], 0);
    assert!(dir.path().join("plot_1_2.svg").exists());
}

#[test]
fn random_batch_is_fully_sound() {
    let dir = TempDir::new().unwrap();
    let v = serde_json::json!({"batch": {"instances": 12, "diff_samples": 200, "sub_samples": 20}, "seed": 3});
    let o = run("minkdiff", &write_config(&dir, &v), &dir.path().join("out"), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&dir.path().join("out/report.json"));
    assert_eq!(r["batch"]["soundness_rate"], 1.0);
    assert!(r["batch"]["checked"].as_u64().unwrap() > 0);
}

#[test]
fn corrupted_tolerance_fails_the_named_criterion() {
    let dir = TempDir::new().unwrap();
    let o = run("validate", &shipped("corrupted_tolerance.json"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("[FAIL]  1 minkdiff soundness"), "{stdout}");
    let r = read_json(&dir.path().join("report.json"));
    assert_eq!(r["passed"], false);
    assert_eq!(r["criteria"][0]["id"], 1);
}

#[test]
fn validate_subset_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, &serde_json::json!({"only": [3, 7]}));
    let o = run("validate", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let cfg = write_config(&dir, &serde_json::json!({"only": [11]}));
    let o = run("validate", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_doc(&o)["path"], "only[0]");
}
