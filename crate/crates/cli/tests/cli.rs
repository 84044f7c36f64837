use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn hetsic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hetsic"))
        .args(args)
        .env_remove("HETSIC_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn last_line(o: &Output) -> String {
    stdout(o).lines().last().unwrap_or_default().to_string()
}

#[test]
fn eval_ps_can_at_zero_db() {
    let o = hetsic(&["eval", "ps_can", "--eta-db", "0", "--n", "1", "--alpha", "4"]);
    assert!(o.status.success());
    let expected = 1.0 / (1.0 + std::f64::consts::FRAC_PI_4);
    assert_eq!(last_line(&o), format!("{expected:.6}"));
    assert_eq!(last_line(&o), "0.560099");
    assert!(stdout(&o).contains("eta_db=0"));
}

#[test]
fn eval_c_integral_is_arctan() {
    let o = hetsic(&["eval", "c_integral", "--b", "1", "--alpha", "4"]);
    assert!(o.status.success());
    assert_eq!(last_line(&o), "0.785398");
}

#[test]
fn eval_rejects_bad_input_with_usage_code() {
    for args in [
        &["eval", "ps_can", "--n", "-1", "--eta-db", "0", "--alpha", "4"][..],
        &["eval", "ps_can", "--n", "1", "--eta-db", "0", "--eta", "1"],
        &["eval", "ps_can", "--n", "1", "--eta-db", "0", "--alpha", "1.5"],
        &["eval", "ps_can", "--n", "1"],
        &["eval", "ps_ic_rea", "--eta-db", "0"],
        &["sweep"],
        &["validate", "bogus"],
    ] {
        assert_eq!(hetsic(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unknown_formula_lists_registry() {
    let o = hetsic(&["eval", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    for name in ["ps_plain", "ps_sic", "load_pmf", "ps_ic_rea", "c_integral"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn eval_multi_tier_formulas() {
    let o = hetsic(&["eval", "ps_ic_rea", "--eta-db", "0", "--bias", "5", "--cancelled", "1"]);
    assert!(o.status.success());
    let v: f64 = last_line(&o).parse().unwrap();
    assert!(v > 0.0 && v < 1.0);
    let o = hetsic(&["eval", "outage_max_inst_sir", "--eta", "1"]);
    assert!(o.status.success());
}

fn result_dir(o: &Output) -> PathBuf {
    PathBuf::from(stdout(o).lines().next().unwrap())
}

fn data_columns(dir: &Path) -> Vec<Vec<String>> {
    let mut rd = csv::Reader::from_path(dir.join("result.csv")).unwrap();
    let header: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
    let keep: Vec<usize> = (0..header.len()).filter(|&i| header[i] != "runtime_ms").collect();
    rd.records()
        .map(|r| {
            let r = r.unwrap();
            keep.iter().map(|&i| r[i].to_string()).collect()
        })
        .collect()
}

#[test]
fn sweep_writes_files_under_env_dir() {
    let root = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_hetsic"))
        .args(["sweep", "--preset", "fig3", "--trials", "0"])
        .env("HETSIC_OUTPUT_DIR", root.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = result_dir(&o);
    assert!(dir.starts_with(root.path().join("fig3")));
    for f in ["result.csv", "plot.gp", "meta.json"] {
        assert!(dir.join(f).is_file());
    }
    assert!(stdout(&o).contains("66 rows"));
}

#[test]
fn sweep_is_thread_independent() {
    let root = tempfile::tempdir().unwrap();
    let out = root.path().to_str().unwrap();
    let run = |t: &str| {
        let o = hetsic(&["sweep", "--preset", "fig2", "--trials", "1000", "--seed", "5", "--threads", t, "--output-dir", out]);
        assert!(o.status.success());
        data_columns(&result_dir(&o))
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn sweep_config_file_and_flag_precedence() {
    let root = tempfile::tempdir().unwrap();
    let cfg = root.path().join("spec.json");
    std::fs::write(
        &cfg,
        r#"{"preset": "custom", "trials": 0, "seed": 9, "grid": [{"eta_db": 0.0, "n": 1}, {"eta_db": 3.0, "n": 2}]}"#,
    )
    .unwrap();
    let o = hetsic(&["sweep", "--config", cfg.to_str().unwrap(), "--seed", "11", "--output-dir", root.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = result_dir(&o);
    assert!(dir.to_str().unwrap().ends_with("-11"));
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 11);
    assert_eq!(meta["grid"].as_array().unwrap().len(), 2);
}

#[test]
fn sweep_unwritable_output_is_runtime_error() {
    let root = tempfile::tempdir().unwrap();
    let blocker = root.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = hetsic(&["sweep", "--preset", "fig3", "--trials", "0", "--output-dir", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validate_numerics_passes() {
    let o = hetsic(&["validate", "numerics"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("5/5 checks passed"));
}

#[test]
fn presets_and_inspect() {
    let o = hetsic(&["presets"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 6);
    let o = hetsic(&["inspect", "--preset", "fig5"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("lambda_eq"));
    assert_eq!(hetsic(&["inspect"]).status.code(), Some(2));
}

#[test]
fn help_documents_units() {
    let o = hetsic(&["eval", "--help"]);
    let text = stdout(&o);
    assert!(text.contains("dB"));
    assert!(text.contains("m^-2"));
}
