use std::path::Path;
use std::process::{Command, Output};

fn symmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symmix")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn growth_csv() -> &'static str {
    concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/orthodont.csv")
}

#[test]
fn sdp_demo_prints_predictive() {
    let o = symmix(&["sdp-demo", "--alpha", "1", "--past", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        "kind,location,weight\nbase,,0.5\natom,-2,0.25\natom,2,0.25\n"
    );
}

#[test]
fn sdp_demo_accepts_negative_past_and_writes_stick() {
    let dir = tempfile::tempdir().unwrap();
    let stick = dir.path().join("stick.csv");
    let o = symmix(&["sdp-demo", "--past", "-1.5,3", "--stick-out", stick.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&stick).unwrap();
    assert!(text.starts_with("atom,location,weight\n"));
    assert!(text.lines().last().unwrap().starts_with("remainder,,"));
}

#[test]
fn bvm_with_no_reps_writes_header() {
    let o = symmix(&["bvm", "--reps", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "n,rep,mean_gap,min_eig,max_eig,max_ks\n");
}

#[test]
fn bvm_refuses_non_mixture_truth() {
    let o = symmix(&["bvm", "--error", "E1", "--reps", "1"]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.starts_with("error[config]: "), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn unknown_error_token_is_a_config_error() {
    let o = symmix(&["simulate", "--error", "E12", "--reps", "1"]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error[config]: "));
}

#[test]
fn fit_reports_bad_rows_by_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "subject,sex,age,distance\nM01,0,8,26\nM01,0,ten,25\n").unwrap();
    let o = symmix(&["fit", "--model", "M1", "--data", bad.to_str().unwrap(), "--iters", "20", "--burnin", "5"]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.starts_with("error[parse]: line 3"), "{err}");
}

#[test]
fn fit_missing_file_is_io_error() {
    let o = symmix(&["fit", "--model", "M2", "--data", "/nonexistent/growth.csv"]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error[io]: "));
}

#[test]
fn fit_writes_summary_and_draws() {
    let dir = tempfile::tempdir().unwrap();
    let draws = dir.path().join("draws.csv");
    let o = symmix(&[
        "fit",
        "--model",
        "M3",
        "--data",
        growth_csv(),
        "--iters",
        "300",
        "--burnin",
        "100",
        "--draws-out",
        draws.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = String::from_utf8(o.stdout).unwrap();
    assert!(summary.lines().any(|l| l.starts_with("beta_2,")), "{summary}");
    let log = std::fs::read_to_string(&draws).unwrap();
    assert_eq!(log.lines().count(), 201);
}

fn simulate_into(dir: &Path, name: &str) -> (String, String) {
    let out = dir.join(format!("{name}-reps.csv"));
    let summary = dir.join(format!("{name}-summary.csv"));
    let o = symmix(&[
        "simulate",
        "--error",
        "E8",
        "--reps",
        "3",
        "--methods",
        "F1,F2,B3",
        "--iters",
        "300",
        "--burnin",
        "50",
        "--seed",
        "11",
        "--out",
        out.to_str().unwrap(),
        "--summary-out",
        summary.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    (std::fs::read_to_string(out).unwrap(), std::fs::read_to_string(summary).unwrap())
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate_into(dir.path(), "a");
    let b = simulate_into(dir.path(), "b");
    assert_eq!(a, b);
    assert_eq!(a.0.lines().count(), 1 + 3 * 3);
    assert!(a.1.lines().nth(3).unwrap().starts_with("E8,B3,"));
    assert!(a.1.lines().nth(3).unwrap().contains(",1,3,0"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"error":"E6","reps":50,"methods":["F1"],"groups":10}"#).unwrap();
    let o = symmix(&["simulate", "--config", cfg.to_str().unwrap(), "--reps", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("E6,F1,") && row.ends_with(",2,0"), "{row}");
}

#[test]
fn config_with_unknown_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"repz":5}"#).unwrap();
    let o = symmix(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error[json]: "));
}
