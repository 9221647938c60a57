use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_channel-optima");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("CHANNEL_OPTIMA_CONFIG")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn without_timing(mut v: Value) -> String {
    v.as_object_mut().unwrap().remove("timing");
    serde_json::to_string(&v).unwrap()
}

fn value_of(v: &Value) -> f64 {
    v["report"]["value"].as_f64().unwrap()
}

#[test]
fn minent_on_catalog_channel() {
    let out = run(&["minent", "--catalog", "depolarizing", "--dim", "2", "--p", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["command"], "minent");
    assert_eq!(v["log_base"], "2");
    assert!((value_of(&v) - 0.811_278_124_459_132_9).abs() < 1e-7);
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn inline_descriptor_and_natural_log() {
    let out = run(&["capacity", "depolarizing:d=2,p=0.5", "--log-base", "e"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let bits = 1.0 - 0.811_278_124_459_132_9;
    assert!((value_of(&v) - bits * std::f64::consts::LN_2).abs() < 1e-7);
    assert!(v["report"]["optimal_average"]["is_optimal_average"].as_bool().unwrap());
}

#[test]
fn channel_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("id.json");
    let doc = serde_json::json!({
        "dim_in": 2,
        "dim_out": 2,
        "kraus": [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]],
    });
    std::fs::write(&path, doc.to_string()).unwrap();
    let out = run(&["capacity", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!((value_of(&json_of(&out)) - 1.0).abs() < 1e-6);
}

#[test]
fn input_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    for args in [
        vec!["minent", bad.to_str().unwrap()],
        vec!["minent", "no-such-channel:d=2"],
        vec!["minent", "depolarizing:d=2,p=1.5"],
        vec!["minent"],
        vec!["minent", "--bogus"],
        vec!["hereditary", "--kind", "both", "identity:d=2"],
        vec!["additivity", "capacity", "identity:d=2", "identity:d=2", "identity:d=2"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn non_convergence_exits_with_two_and_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"capacity_iters": 1, "max_iters": 1, "restarts": 1}"#).unwrap();
    let out = run(&["capacity", "amplitude_damping:gamma=0.5", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let v = json_of(&out);
    assert_eq!(v["report"]["converged"], false);
    assert!(v["report"]["value"].is_number());
}

#[test]
fn config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let env_cfg = dir.path().join("env.json");
    let flag_cfg = dir.path().join("flag.json");
    std::fs::write(&env_cfg, r#"{"seed": 5, "restarts": 7}"#).unwrap();
    std::fs::write(&flag_cfg, r#"{"seed": 6, "restarts": 9}"#).unwrap();
    let base = ["minent", "identity:d=2"];
    let with_env = |extra: &[&str]| {
        let out = Command::new(BIN)
            .args(base)
            .args(extra)
            .env("CHANNEL_OPTIMA_CONFIG", &env_cfg)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        json_of(&out)
    };
    let v = with_env(&[]);
    assert_eq!(v["seed"], 5);
    assert_eq!(v["config"]["restarts"], 7);
    let v = with_env(&["--config", flag_cfg.to_str().unwrap()]);
    assert_eq!(v["seed"], 6);
    let v = with_env(&["--config", flag_cfg.to_str().unwrap(), "--seed", "8", "--restarts", "3"]);
    assert_eq!(v["seed"], 8);
    assert_eq!(v["config"]["restarts"], 3);
}

#[test]
fn mistyped_config_field_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"restarts": "many"}"#).unwrap();
    assert_eq!(run(&["minent", "identity:d=2", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn table_goes_next_to_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.json");
    let out = run(&["minent", "identity:d=2", "--table", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["command"], "minent");
    let tsv = std::fs::read_to_string(Path::new(&format!("{}.tsv", out_path.display()))).unwrap();
    let mut lines = tsv.lines();
    assert_eq!(lines.next(), Some("quantity\tvalue\tresidual"));
    assert!(lines.next().unwrap().starts_with("h_min\t"));

    let inline = run(&["minent", "identity:d=2", "--table"]);
    let text = String::from_utf8(inline.stdout).unwrap();
    assert!(text.contains("\nquantity\tvalue\tresidual\n"));
}

#[test]
fn repeated_runs_are_identical() {
    for args in [
        vec!["coincidence", "depolarizing:d=2,p=0.5", "--seed", "3"],
        vec!["optsets", "amplitude_damping:gamma=0.9", "--seed", "4", "--kind", "E"],
    ] {
        let a = without_timing(json_of(&run(&args)));
        let b = without_timing(json_of(&run(&args)));
        assert_eq!(a, b, "{args:?}");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["optsets", "depolarizing:d=2,p=0.5", "--kind", "C"];
    let one = without_timing(json_of(&run(&[&args[..], &["--threads", "1"]].concat())));
    let two = without_timing(json_of(&run(&[&args[..], &["--threads", "3"]].concat())));
    assert_eq!(one, two);
}

#[test]
fn coincidence_report_describes_the_condition() {
    let v = json_of(&run(&["coincidence", "depolarizing:d=2,p=0.5"]));
    let r = &v["report"];
    assert_eq!(r["coincide"], true);
    assert!((r["lambda"].as_f64().unwrap() - 1.0).abs() < 1e-4);
    assert!(r["condition"].as_str().unwrap().contains("lambda"));
}

#[test]
fn additivity_pairs_a_single_channel_with_itself() {
    let v = json_of(&run(&["additivity", "min-entropy", "depolarizing:d=2,p=0.5"]));
    assert_eq!(v["inputs"].as_array().unwrap().len(), 2);
    assert!(v["report"]["gap"].as_f64().unwrap().abs() < 1e-4);
}

#[test]
fn assumptions_screen_small_sample() {
    let out = run(&["assumptions", "--samples", "2", "identity:d=2", "completely_depolarizing:d=2,d_out=2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["report"]["defects"].as_array().unwrap().len(), 2);
    assert_eq!(v["report"]["assumption_a_holds"], true);
}
