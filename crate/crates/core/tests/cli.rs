use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sl2adic-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Runs the binary, returning the exit code and the file written to --out.
fn run(args: &[&str], out: &str) -> (i32, String) {
    let path = scratch(out);
    let status = Command::new(env!("CARGO_BIN_EXE_sl2adic"))
        .args(args)
        .arg("--out")
        .arg(&path)
        .status()
        .unwrap();
    let text = std::fs::read_to_string(&path).unwrap_or_default();
    (status.code().unwrap(), text)
}

fn config_file(name: &str, json: &str) -> String {
    let path = scratch(name);
    std::fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn classify_example_matrix() {
    let (code, text) = run(&["classify"], "classify.json");
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&text).unwrap();
    let rec = &r["records"][0];
    assert_eq!(rec["family"], "F2");
    assert_eq!(rec["q"], "2");
    // 2 is a non-square unit mod 5, so K_a is the unramified E
    assert_eq!(rec["a_class"], "S");
    assert_eq!(rec["k_a"], "E of kind unram");
    assert_eq!(r["pass"], true);
}

#[test]
fn classify_sigma_family() {
    let cfg = config_file(
        "f1a.json",
        r#"{"classify": {"matrix": [[[0, 1], 5], [1, [0, 1]]], "gamma": "sigma"}}"#,
    );
    let (code, text) = run(&["classify", "--config", &cfg], "f1a-out.json");
    let r: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(code, 0, "{text}");
    assert_eq!(r["records"][0]["family"], "F1A");
    assert_eq!(r["records"][0]["certificate_level"], "K");
}

#[test]
fn empty_config_echoes_defaults() {
    let cfg = config_file("empty.json", "{}");
    let (code, text) = run(&["classify", "--config", &cfg], "empty-out.json");
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(r["config"]["p"], 5);
    assert_eq!(r["config"]["precision"], 40);
    assert_eq!(r["config"]["ext"], "unram");
    assert!(r["claim"].as_str().unwrap().contains("three families"));
}

#[test]
fn flags_override_config() {
    let cfg = config_file("p7.json", r#"{"p": 7, "seed": 3}"#);
    let (code, text) = run(
        &[
            "limits-real",
            "--config",
            &cfg,
            "--p",
            "11",
            "--ext",
            "ram-ps",
        ],
        "ov.json",
    );
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(r["config"]["p"], 11);
    assert_eq!(r["config"]["seed"], 3);
    assert_eq!(r["config"]["ext"], "ram-ps");
}

#[test]
fn config_errors_exit_two() {
    let cfg = config_file("bad.json", r#"{"polar": {"samples": "many"}}"#);
    let (code, text) = run(&["polar", "--config", &cfg], "bad-out.json");
    assert_eq!(code, 2);
    let r: Value = serde_json::from_str(&text).unwrap();
    assert!(r["error"].as_str().unwrap().contains("does not decode"));
    assert_eq!(r["pass"], false);
    let (code, _) = run(&["polar", "--p", "9"], "bad-p.json");
    assert_eq!(code, 2);
    let (code, _) = run(&["polar", "--ext", "quartic"], "bad-ext.json");
    assert_eq!(code, 2);
}

#[test]
fn reports_are_reproducible() {
    let cfg = config_file("small.json", r#"{"polar": {"samples": 40}, "seed": 12}"#);
    let (_, a) = run(&["polar", "--config", &cfg], "rep-a.json");
    let (_, b) = run(&["polar", "--config", &cfg], "rep-b.json");
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let (_, c) = run(&["polar", "--config", &cfg, "--seed", "13"], "rep-c.json");
    assert_ne!(a, c);
}

#[test]
fn htheta_rate_verdict_fails() {
    let cfg = config_file(
        "ht.json",
        r#"{"limits_padic": {"family": "htheta", "n_max": 6}}"#,
    );
    let (code, text) = run(&["limits-padic", "--config", &cfg], "ht-out.json");
    assert_eq!(code, 1);
    let r: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(r["verdicts"][0]["name"], "rate");
    assert_eq!(r["verdicts"][0]["pass"], false);
    assert_eq!(r["fitted"]["slope_min"], 4.0);
}

#[test]
fn limits_padic_small_grid() {
    let cfg = config_file(
        "grid.json",
        r#"{"limits_padic": {"c1_values": [1], "c2_values": [2], "n_max": 6, "sweep_samples": 20}}"#,
    );
    let (code, text) = run(
        &["limits-padic", "--config", &cfg, "--ext", "ram-p"],
        "grid.out",
    );
    assert_eq!(code, 0, "{text}");
    let r: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(r["records"].as_array().unwrap().len(), 4);
}

#[test]
fn tree_dot_writes_graph() {
    let (code, text) = run(&["tree-dot", "--p", "3"], "tree.dot");
    assert_eq!(code, 0);
    assert!(text.starts_with("graph bt {"));
    assert!(text.trim_end().ends_with('}'));
    // radius 2 around the base vertex of the unramified tree over Q_3: 1 + 10 + 90 vertices
    assert_eq!(text.matches("[label=").count(), 101);
}
