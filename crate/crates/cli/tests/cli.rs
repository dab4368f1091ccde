use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;

fn sigvol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sigvol")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim_end().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).to_string()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn algebra_golden_outputs() {
    let cases: &[(&[&str], &str)] = &[
        (&["shuffle", "12", "3"], "123 + 132 + 312"),
        (&["shuffle", "", "21"], "21"),
        (&["shuffle", "2", "2"], "2·22"),
        (&["radford", "212"], "21 ⧢ 2 − 2·221"),
        (&["radford", "2"], "2"),
        (&["radford", "12", "--avoid-letter", "2"], "1 ⧢ 2 − 21"),
        (&["radford", "122"], "1/2·1 ⧢ 2^⧢2 − 21 ⧢ 2 + 221"),
        (&["lyndon", "--dim", "2", "--max-len", "3"], "2\n1\n21\n221\n211"),
        (&["lyndon", "--dim", "2", "--max-len", "3", "--classical"], "1\n2\n12\n112\n122"),
    ];
    for (args, want) in cases {
        let o = sigvol(args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        assert_eq!(stdout(&o), *want, "{args:?}");
    }
}

#[test]
fn malformed_words_are_usage_errors() {
    for args in [&["shuffle", "1a", "2"][..], &["radford", "x"], &["shuffle", "13", "2", "--dim", "2"]] {
        let o = sigvol(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).starts_with("error:"));
    }
}

#[test]
fn signature_of_csv_paths() {
    let dir = tempfile::tempdir().unwrap();
    let seg = write(dir.path(), "seg.csv", "t,x1\n0,0\n0.5,0.4\n");
    let o = sigvol(&["sig", &seg, "--level", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["level"], 2);
    let entry = |w: &str| {
        v["entries"].as_array().unwrap().iter().find(|e| e["word"] == w).map(|e| e["value"].as_f64().unwrap())
    };
    assert!((entry("22").unwrap() - 0.08).abs() < 1e-15);
    assert!((entry("12").unwrap() - 0.1).abs() < 1e-15);
    assert!((entry("1").unwrap() - 0.5).abs() < 1e-15);

    // staircase: the value path goes 0 → 1 → 1 → 3
    let stairs = write(dir.path(), "stairs.csv", "t,x1\n0,0\n1,1\n2,1\n3,3\n");
    let v: serde_json::Value = serde_json::from_str(&stdout(&sigvol(&["sig", &stairs, "--level", "2"]))).unwrap();
    let e22 = v["entries"].as_array().unwrap().iter().find(|e| e["word"] == "22").unwrap();
    assert!((e22["value"].as_f64().unwrap() - 4.5).abs() < 1e-14);

    let bad = write(dir.path(), "bad.csv", "t,x1\n0,0\n0,1\n");
    assert_eq!(sigvol(&["sig", &bad, "--level", "2"]).status.code(), Some(2));
}

#[test]
fn expected_signature_output() {
    let o = sigvol(&["expected-sig", "--bm-dim", "1", "--horizon", "2", "--level", "3"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let entry = |w: &str| v["entries"].as_array().unwrap().iter().find(|e| e["word"] == w).map(|e| e["value"].as_f64().unwrap());
    assert_eq!(entry("22"), Some(1.0));
    assert_eq!(entry("122"), Some(1.0));
    assert_eq!(entry("2"), None);
    assert_eq!(sigvol(&["expected-sig", "--bm-dim", "1", "--horizon", "-1", "--level", "3"]).status.code(), Some(2));
}

const SMALL_SMILE: &str = r#"{
  "model": { "order": 3, "rho": -0.5, "s0": 1.0, "horizon": 1.0,
             "sigma_protocol": { "coef_seed": 1, "leading": 1.0 } },
  "sim": { "n_paths": 2000, "n_steps": 50, "seed": 9 },
  "strikes": { "log_moneyness": { "k_lo": -0.3, "k_hi": 0.3, "n": 7 } }
}"#;

#[test]
fn smile_writes_csv_json_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "smile.json", SMALL_SMILE);
    let out = dir.path().join("out");
    let o = sigvol(&["smile", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("smile.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "strike,k,put_iv,put_lo,put_hi,call_iv,call_lo,call_hi,n_effective");
    assert_eq!(lines.count(), 7);
    let manifest = read_json(&out.join("smile.manifest.json"));
    assert_eq!(manifest["experiment"]["command"], "smile");
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["config"]["sim"]["n_paths"], 2000);
    assert_eq!(manifest["outputs"].as_object().unwrap().len(), 2);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "smile.json", SMALL_SMILE);
    let run = |seed: &str, sub: &str| {
        let out = dir.path().join(sub);
        assert!(sigvol(&["smile", &cfg, "--seed", seed, "--out", out.to_str().unwrap()]).status.success());
        std::fs::read(out.join("smile.csv")).unwrap()
    };
    assert_eq!(run("5", "a"), run("5", "b"));
    assert_ne!(run("5", "a"), run("6", "c"));
}

#[test]
fn zero_sigma_never_explodes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "explode.json",
        r#"{ "model": { "order": 3, "rho": 0.5, "s0": 1.0, "horizon": 1.0,
                        "sigma": { "alphabet_dim": 2, "terms": [] } },
             "sim": { "n_paths": 500, "n_steps": 50, "seed": 1 } }"#,
    );
    let o = sigvol(&["explode", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(&dir.path().join("explode.json"));
    assert_eq!(v["report"]["stats"]["p_hat"], 0.0);
    assert!(v["verdict"].is_null());
}

#[test]
fn analytic_critical_case_is_finite() {
    let o = sigvol(&["critical", "../../configs/critical_finite.json", "--out", tempfile::tempdir().unwrap().path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("verdict Finite"));
}

#[test]
fn moments_and_simulate_run() {
    let dir = tempfile::tempdir().unwrap();
    let model = r#""model": { "order": 2, "rho": -0.9, "s0": 1.0, "horizon": 1.0,
                              "sigma_protocol": { "coef_seed": 2, "leading": 0.5 } },
                   "sim": { "n_paths": 1000, "n_steps": 20, "seed": 3 }"#;
    let m = write(dir.path(), "m.json", &format!("{{ {model}, \"m\": 2.0 }}"));
    let s = write(dir.path(), "s.json", &format!("{{ {model} }}"));
    let out = dir.path().to_str().unwrap();
    assert!(sigvol(&["moments", &m, "--out", out]).status.success());
    assert_eq!(read_json(&dir.path().join("moments.json"))["verdict"]["regime"], "finite");
    assert!(sigvol(&["simulate", &s, "--dump-samples", "--out", out]).status.success());
    let samples = std::fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 1001);
    assert!(read_json(&dir.path().join("simulate.json"))["variance"]["expected"].as_f64().unwrap() > 0.0);
}

#[test]
fn schema_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (SMALL_SMILE.replace("\"rho\": -0.5", "\"rho\": 1.5"), "rho"),
        (SMALL_SMILE.replace("\"n_paths\": 2000", "\"n_paths\": \"many\""), "sim.n_paths"),
        (SMALL_SMILE.replace("\"horizon\": 1.0", "\"horizon\": 0.0"), "horizon"),
        (SMALL_SMILE.replace("\"s0\": 1.0", "\"s0\": -1.0"), "s0"),
        (SMALL_SMILE.replace("\"seed\": 9", "\"seed\": 9, \"colour\": 1"), "sim"),
        (SMALL_SMILE.replace("\"coef_seed\": 1", "\"coef_seed\": -1"), "model.sigma_protocol.coef_seed"),
    ];
    for (body, field) in cases {
        let cfg = write(dir.path(), "bad.json", &body);
        let o = sigvol(&["smile", &cfg, "--out", dir.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{field}");
        assert!(stderr(&o).contains(field), "{field}: {}", stderr(&o));
    }
    let mismatch = write(
        dir.path(),
        "order.json",
        r#"{ "model": { "order": 2, "rho": 0.5, "s0": 1.0, "horizon": 1.0,
                        "sigma": { "alphabet_dim": 2, "terms": [{ "word": "222", "num": 1 }] } },
             "sim": { "n_paths": 10, "n_steps": 10, "seed": 1 } }"#,
    );
    let o = sigvol(&["simulate", &mismatch, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("model.order"));
    assert_eq!(sigvol(&["smile", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn replay_reproduces_and_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "smile.json", SMALL_SMILE);
    let first = dir.path().join("first");
    assert!(sigvol(&["smile", &cfg, "--workers", "1", "--out", first.to_str().unwrap()]).status.success());
    let manifest = first.join("smile.manifest.json");
    let second = dir.path().join("second");
    let o = sigvol(&["replay", manifest.to_str().unwrap(), "--workers", "3", "--out", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("smile.csv: identical"));
    assert_eq!(std::fs::read(first.join("smile.csv")).unwrap(), std::fs::read(second.join("smile.csv")).unwrap());

    let mut m = read_json(&manifest);
    m["outputs"]["smile.csv"] = serde_json::Value::String("0".repeat(64));
    std::fs::write(&manifest, serde_json::to_string(&m).unwrap()).unwrap();
    let o = sigvol(&["replay", manifest.to_str().unwrap(), "--out", dir.path().join("third").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn shuffle_command_is_commutative(u in "[1-3]{0,3}", v in "[1-3]{0,3}") {
        let a = sigvol(&["shuffle", &u, &v, "--dim", "3"]);
        let b = sigvol(&["shuffle", &v, &u, "--dim", "3"]);
        prop_assert!(a.status.success());
        prop_assert_eq!(stdout(&a), stdout(&b));
    }
}
