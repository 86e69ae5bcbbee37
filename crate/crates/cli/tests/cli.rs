use std::process::{Command, Output};

use serde_json::Value;

fn koalg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_koalg")).args(args).env_remove("KOALG_SEED").output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = koalg(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn assert_fails(args: &[&str], code: i32) -> String {
    let out = koalg(args);
    assert_eq!(out.status.code(), Some(code), "{args:?}");
    assert!(out.stdout.is_empty(), "{args:?} wrote to stdout");
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error:"), "{err}");
    err
}

#[test]
fn domain_errors_exit_one_on_a_single_line() {
    let err = assert_fails(&["run", "pd-repeated", "--strategy", "1=sometimes"], 1);
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("sometimes"));
    assert_fails(&["tree", "no-such-game"], 1);
    assert_fails(&["outcome", "--spec", "/nonexistent/game.json"], 1);
    // a dummy opponent leaves the play undetermined
    assert_fails(&["run", "pd-repeated", "--strategy", "1=tit-for-tat"], 1);
}

#[test]
fn usage_errors_exit_two() {
    assert_fails(&["run", "pd-repeated", "--strategy", "tit-for-tat"], 2);
    assert_fails(&["tree", "pd", "--nodes", "3"], 2);
    assert_fails(&["tree", "network", "--k", "0.9"], 2);
    assert_fails(&["run", "pd", "--format", "dot", "--strategy", "1=d", "--strategy", "2=d"], 2);
    assert_fails(&["frobnicate"], 2);
}

#[test]
fn seeds_fix_the_trace() {
    let args = ["run", "pd-repeated", "--strategy", "1=copy-2/3", "--strategy", "2=copy-2/3", "--turns", "30"];
    let with = |seed: &str| {
        let mut a = args.to_vec();
        a.extend(["--seed", seed]);
        koalg(&a).stdout
    };
    assert_eq!(with("7"), with("7"));
    assert_ne!(with("7"), with("8"));
    let from_env = Command::new(env!("CARGO_BIN_EXE_koalg")).args(args).env("KOALG_SEED", "7").output().unwrap();
    assert_eq!(from_env.stdout, with("7"));
}

#[test]
fn dummy_policies_resolve_the_opponent() {
    let doc = json(&["run", "pd-repeated", "--strategy", "1=always-deny", "--ndet", "first", "--turns", "3"]);
    assert_eq!(doc["trace"].as_array().unwrap().len(), 3);
    assert_eq!(doc["strategies"][1], Value::Null);
}

#[test]
fn outcome_of_tit_for_tat() {
    let doc = json(&["outcome", "pd-repeated", "--strategy", "1=tit-for-tat", "--strategy", "2=tit-for-tat", "--lambda", "0.5"]);
    let bound = doc["outcome"]["error_bound"].as_f64().unwrap();
    assert!(bound <= 1e-6);
    for v in doc["outcome"]["value"].as_array().unwrap() {
        assert!((v.as_f64().unwrap() - 2.0).abs() <= bound);
    }
}

#[test]
fn monte_carlo_estimate_is_reported() {
    let doc = json(&[
        "outcome", "pd-repeated", "--strategy", "1=copy-2/3", "--strategy", "2=always-confess",
        "--samples", "200", "--turns", "40", "--seed", "3",
    ]);
    assert_eq!(doc["monte_carlo"]["samples"], 200);
    assert_eq!(doc["monte_carlo"]["mean"].as_array().unwrap().len(), 2);
}

#[test]
fn out_writes_the_same_bytes_as_stdout() {
    let dir = std::env::temp_dir().join(format!("koalg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("tree.json");
    let args = ["tree", "pd", "--depth", "1"];
    let mut with_out = args.to_vec();
    let p = path.to_str().unwrap();
    with_out.extend(["--out", p]);
    let out = koalg(&with_out);
    assert!(out.status.success() && out.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), koalg(&args).stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn text_format_is_readable() {
    let out = koalg(&["spc", "pd-repeated", "--strategy", "1=tit-for-tat", "--strategy", "2=tit-for-tat", "--lambda", "0.4", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("subgame_perfect: fails\n"), "{text}");
    assert!(text.contains("witness: player 1 switching to always-deny: 2 against 1.666666"), "{text}");
}

#[test]
fn listing() {
    let out = koalg(&["list", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["pd", "pd-repeated", "monitoring", "bayesian", "network"] {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(name)), "{name}");
    }
    let doc = json(&["list", "bayesian"]);
    assert!(doc.to_string().contains("type-contingent:UD"));
}

#[test]
fn matrix_spec_files_load() {
    let dir = std::env::temp_dir().join(format!("koalg-spec-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("coordination.json");
    std::fs::write(
        &path,
        r#"{"schema": "koalg-matrix/1", "players": ["a", "b"], "actions": [["x", "y"], ["x", "y"]],
            "payoffs": [{"profile": ["x", "x"], "payoff": [2, 2]}, {"profile": ["x", "y"], "payoff": [0, 0]},
                        {"profile": ["y", "x"], "payoff": [0, 0]}, {"profile": ["y", "y"], "payoff": [1, 1]}],
            "mode": "one-shot"}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let doc = json(&["nash", "--spec", p, "--strategy", "a=always:y", "--strategy", "b=always:y"]);
    assert_eq!(doc["verdict"]["holds"], true);
    let bad = json(&["nash", "--spec", p, "--strategy", "a=always:y", "--strategy", "b=always:x"]);
    assert_eq!(bad["verdict"]["holds"], false);
    std::fs::remove_dir_all(&dir).unwrap();
}
