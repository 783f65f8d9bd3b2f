use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rieszwave"))
}

const TINY: &str = "grid = 16\nfine_level = 8\nwindow_side = 0.5\nlevels = [3, 4]\nreplicas = 3\n";

#[test]
fn params_reports_ok() {
    let out = bin().args(["params", "--beta", "1", "--p", "20", "--gamma", "0.05"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("eta=1.5000") && text.contains("eta1=0.3500") && text.trim_end().ends_with("OK"), "{text}");
}

#[test]
fn params_flags_discrepancy() {
    let out = bin().args(["params", "--beta", "1", "--p", "10", "--gamma", "0.1"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("eta1=-0.0400") && text.contains("DISCREPANCY"), "{text}");
}

#[test]
fn missing_config_exits_2() {
    let out = bin().args(["rate-study", "--config", "/definitely/not/here.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("config not found"));
}

#[test]
fn unknown_flag_is_rejected() {
    let out = bin().args(["rate-study", "--bogus"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn invalid_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "grid = 16\nnot_a_key = 1\n").unwrap();
    let out = bin().args(["rate-study", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("not_a_key"));
}

#[test]
fn inadmissible_sobolev_exponents_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    fs::write(&cfg, format!("{TINY}p = 6.0\n")).unwrap();
    let out = bin().args(["sobolev-moments", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("inadmissible"));
}

#[test]
fn rate_study_writes_outputs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    fs::write(&cfg, TINY).unwrap();
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["rate-study", "--seed", "7", "--threads", "1", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(matches!(out.status.code(), Some(0) | Some(1)), "{out:?}");
    let csv = fs::read_to_string(out_dir.join("rate.csv")).unwrap();
    assert!(csv.starts_with("agg,label,n,replica,x,p,estimate,ci_low,ci_high,replicas,gated_fraction,root_seed\n"));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["root_seed"], 7);
    assert_eq!(manifest["M"], 3);
    assert_eq!(manifest["J"], 7);
    assert_eq!(manifest["threads"], 1);
    assert!(out_dir.join("rate_summary.json").exists());
}

#[test]
fn json_format_and_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    fs::write(&cfg, TINY).unwrap();
    let out = bin().args(["sup-study", "--format", "json", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(matches!(out.status.code(), Some(0) | Some(1)), "{out:?}");
    let rows: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("sup-convergence.json")).unwrap()).unwrap();
    assert!(rows["rows"].as_array().is_some_and(|r| !r.is_empty()));
    let out = bin()
        .args(["simulate", "--equation", "regularized", "--replica", "2", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    assert!(dir.path().join("path_r2.npy").exists());
    assert!(dir.path().join("path_r2.json").exists());
}
