use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rwfn(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rwfn"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn rwfn")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn gen(dir: &Path, name: &str, extra: &[&str]) {
    let mut args = vec!["gen-synth", "--scenes", "12", "--seed", "7", "-o", name];
    args.extend_from_slice(extra);
    let out = rwfn(dir, &args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn gen_synth_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "a.json", &[]);
    gen(tmp.path(), "b.json", &[]);
    let a = std::fs::read(tmp.path().join("a.json")).unwrap();
    assert_eq!(a, std::fs::read(tmp.path().join("b.json")).unwrap());
    assert!(tmp.path().join("gen-synth.manifest.json").exists());
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&rwfn(tmp.path(), &["gen-synth", "--scenes", "5"])), 2);
    assert_eq!(code(&rwfn(tmp.path(), &["gen-synth", "--scenes", "0", "-o", "x.json"])), 2);
    gen(tmp.path(), "ds.json", &[]);
    let out = rwfn(tmp.path(), &["train", "--data", "ds.json", "--model", "mlp", "--task", "types"]);
    assert_eq!(code(&out), 2);
    let out = rwfn(tmp.path(), &["train", "--data", "ds.json", "--model", "rwfn", "--task", "types", "--grid", "depth=3"]);
    assert_eq!(code(&out), 2);
    assert_eq!(code(&rwfn(tmp.path(), &["frobnicate"])), 2);
}

#[test]
fn missing_artifacts_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rwfn(tmp.path(), &["eval", "--model", "nope.json", "--data", "nope.json"]);
    assert_eq!(code(&out), 1);
    let out = rwfn(tmp.path(), &["compare", "--data", "nope.json", "--repeats", "1"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn train_partof_then_eval() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    gen(dir, "ds.json", &[]);
    let out = rwfn(dir, &["train", "--data", "ds.json", "--model", "rwfn", "--task", "partof", "--epochs", "20", "--out-dir", "run"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let model = read_json(&dir.join("run/model.json"));
    let beta = model["predicates"]["partOf"]["beta"].as_array().unwrap();
    assert_eq!(beta.len(), 800);
    let trace = read_json(&dir.join("run/trace.json"));
    assert!(trace["epochs"].as_array().unwrap().last().unwrap()["epoch"].as_u64().unwrap() >= 19);

    let out = rwfn(dir, &["eval", "--model", "run/model.json", "--data", "run/test.json", "--out-dir", "run"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.join("run/eval.json"));
    let auc = report["auc"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&auc));
    let manifest = read_json(&dir.join("run/eval.manifest.json"));
    for artifact in manifest["artifacts"].as_array().unwrap() {
        let p = Path::new(artifact.as_str().unwrap());
        assert!(if p.is_absolute() { p.exists() } else { dir.join(p).exists() }, "{p:?}");
    }
}

#[test]
fn eval_on_unlabeled_split_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    gen(dir, "ds.json", &[]);
    let out = rwfn(dir, &["train", "--data", "ds.json", "--model", "rwfn", "--task", "types", "--epochs", "5"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut test = read_json(&dir.join("test.json"));
    for r in test["records"].as_array_mut().unwrap() {
        r["labels"] = Value::Array(vec![]);
    }
    std::fs::write(dir.join("unlabeled.json"), serde_json::to_string(&test).unwrap()).unwrap();
    let out = rwfn(dir, &["eval", "--model", "model.json", "--data", "unlabeled.json"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn ltn_types_has_24972_learnable_params_at_n64() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    gen(dir, "ds.json", &["--feature-dim", "64"]);
    let out = rwfn(dir, &["train", "--data", "ds.json", "--model", "ltn", "--task", "types", "--epochs", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("24972 learnable params per predicate"), "{}", stdout(&out));
}

#[test]
fn grid_writes_one_directory_per_point() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    gen(dir, "ds.json", &[]);
    let out = rwfn(dir, &["train", "--data", "ds.json", "--model", "rwfn", "--task", "types", "--epochs", "3", "--grid", "B=10,20"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("grid/B=10/model.json").exists());
    assert!(dir.join("grid/B=20/model.json").exists());
    assert_eq!(read_json(&dir.join("grid.json")).as_array().unwrap().len(), 2);
}

#[test]
fn compare_and_ablate_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    gen(dir, "ds.json", &[]);
    let out = rwfn(dir, &["compare", "--data", "ds.json", "--repeats", "2", "--epochs", "5", "--budget", "200"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.join("comparison.json"));
    assert_eq!(report["models"], serde_json::json!(["ltn", "rwfn", "rwfn-shared", "ir-baseline"]));
    assert!(stdout(&out).contains("ir-baseline"));
    assert_eq!(report["repeats"], 2);

    let out = rwfn(dir, &["ablate", "--data", "ds.json", "--epochs", "5", "--budget", "200"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.join("ablation.json"));
    assert_eq!(report["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn verify_and_params() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let out = rwfn(dir, &["verify", "--kernel-widths", "100,1000", "--gradcheck-trials", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("params: 400/24972 OK"), "{}", stdout(&out));
    assert!(dir.join("verify.json").exists());

    let out = rwfn(dir, &["params"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("learnable ratio rwfn:ltn = 400:24972"));
    assert_eq!(read_json(&dir.join("params.json"))["rwfn"]["total"], 26200);
}

#[test]
fn partof_trains_with_shipped_ontology() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    gen(dir, "ds.json", &[]);
    let kb = concat!(env!("CARGO_MANIFEST_DIR"), "/assets/ontology.kb");
    let args = ["train", "--data", "ds.json", "--model", "rwfn", "--task", "partof", "--epochs", "5", "--budget", "200", "--kb", kb];
    let out = rwfn(dir, &args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let model = read_json(&dir.join("model.json"));
    let predicates = model["predicates"].as_object().unwrap();
    for p in ["partOf", "person", "wheel", "backrest"] {
        assert!(predicates.contains_key(p), "{p} missing");
    }
}
