//! End-to-end checks of the `skl-lab` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn skl_lab(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_skl-lab"));
    cmd.args(args).env_remove("SKL_LAB_OUT");
    if let Some(dir) = env_out {
        cmd.env("SKL_LAB_OUT", dir);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn help_lists_flags_and_subcommands() {
    let top = skl_lab(&["--help"], None);
    assert_eq!(code(&top), 0);
    let text = stdout(&top);
    for word in ["divergence", "sweep", "edgeworth", "stein", "zero-bias", "verify", "decompose", "report", "--config", "--out", "--print-config"] {
        assert!(text.contains(word), "top-level help lacks {word}:\n{text}");
    }
    let sweep = stdout(&skl_lab(&["sweep", "--help"], None));
    for flag in ["--family", "--n", "--ns", "--delta0", "--half-width", "--step", "--u", "--format", "--variant", "--timing"] {
        assert!(sweep.contains(flag), "sweep help lacks {flag}:\n{sweep}");
    }
    let verify = stdout(&skl_lab(&["verify", "--help"], None));
    for name in ["propA1", "propA2", "property24", "h1", "envelope"] {
        assert!(verify.contains(name), "verify help lacks {name}:\n{verify}");
    }
}

#[test]
fn divergence_prints_json_and_exits_zero() {
    let o = skl_lab(&["divergence", "--family", "laplace:1", "--n", "16"], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let d = v["d"].as_f64().unwrap();
    assert!(d > 0.0 && d < 1e-2, "{v}");
}

#[test]
fn validation_errors_exit_two() {
    // no density: the minorant has nothing to work with
    let o = skl_lab(&["verify", "propA1", "--family", "uniform:-1,1", "--n", "16"], None);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&skl_lab(&["divergence", "--family", "nosuch", "--n", "16"], None)), 2);
    assert_eq!(code(&skl_lab(&["divergence", "--family", "gaussian:0,1", "--n", "0"], None)), 2);
    assert_eq!(code(&skl_lab(&["sweep", "--step", "0.01"], None)), 2);
    assert_eq!(code(&skl_lab(&["no-such-command"], None)), 2);

    let dir = tempfile::tempdir().unwrap();
    let bad_schema = dir.path().join("schema.json");
    fs::write(&bad_schema, r#"{"schema": 2}"#).unwrap();
    let o = skl_lab(&["--config", bad_schema.to_str().unwrap(), "divergence", "--n", "8"], None);
    assert_eq!(code(&o), 2);
    let unknown = dir.path().join("unknown.json");
    fs::write(&unknown, r#"{"schema": 1, "colour": "blue"}"#).unwrap();
    let o = skl_lab(&["--config", unknown.to_str().unwrap(), "divergence", "--n", "8"], None);
    assert_eq!(code(&o), 2);
}

#[test]
fn printed_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = skl_lab(
        &["--print-config", "sweep", "--family", "mixture:.5,-1,1,.5,1,1", "--ns", "8:64", "--delta0", "0.5", "--format", "csv"],
        None,
    );
    assert_eq!(code(&first), 0);
    let text = stdout(&first);
    let path = dir.path().join("cfg.json");
    fs::write(&path, &text).unwrap();
    let second = skl_lab(&["--config", path.to_str().unwrap(), "--print-config", "sweep"], None);
    assert_eq!(code(&second), 0, "{}", String::from_utf8_lossy(&second.stderr));
    let a: serde_json::Value = serde_json::from_str(&text).unwrap();
    let b: serde_json::Value = serde_json::from_str(&stdout(&second)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a["delta0"], 0.5);
    assert_eq!(a["ns"], serde_json::json!([8, 16, 32, 64]));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    fs::write(&path, r#"{"schema": 1, "delta0": 0.25, "n": 32}"#).unwrap();
    let o = skl_lab(&["--config", path.to_str().unwrap(), "--print-config", "divergence", "--n", "64"], None);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n"], 64);
    assert_eq!(v["delta0"], 0.25);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |d: &Path| {
        vec![
            "--out".to_string(),
            d.to_str().unwrap().to_string(),
            "sweep".to_string(),
            "--family".to_string(),
            "logistic:1".to_string(),
            "--ns".to_string(),
            "8:32".to_string(),
        ]
    };
    for d in [a.path(), b.path()] {
        let argv = args(d);
        let o = skl_lab(&argv.iter().map(String::as_str).collect::<Vec<_>>(), None);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (fa, fb) = (read_dir_sorted(a.path()), read_dir_sorted(b.path()));
    assert!(fa.iter().any(|(n, _)| n.ends_with(".csv")));
    assert!(fa.iter().any(|(n, _)| n.ends_with(".json")));
    assert!(fa.iter().any(|(n, _)| n.ends_with(".svg")));
    assert_eq!(fa, fb);
}

#[test]
fn out_env_overrides_config_and_flag_overrides_env() {
    let cfg_dir = tempfile::tempdir().unwrap();
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let path = cfg_dir.path().join("cfg.json");
    let cfg = serde_json::json!({"schema": 1, "out_dir": cfg_dir.path().join("from_config")});
    fs::write(&path, cfg.to_string()).unwrap();

    let o = skl_lab(&["--config", path.to_str().unwrap(), "stein", "--g", "sin"], Some(env_dir.path()));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(env_dir.path().join("stein_sin.csv").exists());
    assert!(!cfg_dir.path().join("from_config").exists());

    let o = skl_lab(
        &["--config", path.to_str().unwrap(), "--out", flag_dir.path().to_str().unwrap(), "stein", "--g", "sin"],
        Some(env_dir.path()),
    );
    assert_eq!(code(&o), 0);
    assert!(flag_dir.path().join("stein_sin.csv").exists());
}

#[test]
fn verify_subcommands_succeed_on_smooth_families() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for args in [
        vec!["verify", "propA2", "--family", "laplace:1", "--n", "64"],
        vec!["verify", "property24", "--family", "laplace:1", "--n", "64"],
        vec!["verify", "envelope", "--family", "gaussian:0,1", "--n", "64"],
        vec!["verify", "h1", "--n", "1024", "--c", "0.05"],
        vec!["decompose", "--family", "gaussian:0,1", "--n", "64"],
    ] {
        let mut argv = vec!["--out", out];
        argv.extend(args.iter());
        let o = skl_lab(&argv, None);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn contract_violations_exit_three() {
    // a sum of two uniforms is bounded while the Gaussian is not
    let o = skl_lab(&["divergence", "--family", "uniform:-1,1", "--n", "2", "--half-width", "3", "--step", "0.09"], None);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("absolute continuity"));
}
