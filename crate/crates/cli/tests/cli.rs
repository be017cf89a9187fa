use std::io::Write;
use std::process::{Command, Output};

use stoint_cli::{ResultRecord, Status};

const S1: &str = "1 0 0 1.0";

fn stoint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stoint"))
        .args(args)
        .env_remove("STOINT_MU_TOL")
        .env_remove("STOINT_SERIES_TOL")
        .env_remove("STOINT_MU_CAP")
        .output()
        .expect("run stoint")
}

fn eval_args<'a>(class: &'a str, orbs: [&'a str; 4], r: &'a str) -> Vec<&'a str> {
    vec![
        "eval", "--class", class, "--orb1", orbs[0], "--orb2", orbs[1], "--orb3", orbs[2], "--orb4", orbs[3], "--R", r,
    ]
}

fn json_record(out: &Output) -> ResultRecord {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("{e}: {text}"))
}

#[test]
fn eval_coulomb_1s() {
    let mut args = eval_args("coulomb", [S1; 4], "1.4");
    args.extend(["--format", "json"]);
    let out = stoint(&args);
    assert_eq!(out.status.code(), Some(0));
    let rec = json_record(&out);
    assert_eq!(rec.status, Status::Ok);
    let v = rec.value.unwrap();
    assert!((v - 0.503_520_932_943_976_7).abs() < 1e-12, "{v}");
    assert!(rec.mu_used.is_some() && rec.terms_evaluated.is_some() && rec.truncation_estimate.is_some());
}

#[test]
fn eval_text_format_has_diagnostics() {
    let out = stoint(&eval_args("coulomb", [S1; 4], "1.4"));
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for key in ["status", "value", "mu_used", "terms_evaluated", "truncation_estimate"] {
        assert!(text.lines().any(|l| l.starts_with(key)), "{key} missing from\n{text}");
    }
    assert!(text.contains("5.035209329439"));
}

#[test]
fn eval_selection_zero() {
    let p = "2 1 1 1.0";
    let mut args = eval_args("exchange", [p, S1, S1, S1], "2.0");
    args.extend(["--format", "json"]);
    let out = stoint(&args);
    assert_eq!(out.status.code(), Some(0));
    let rec = json_record(&out);
    assert_eq!(rec.status, Status::ZeroBySelection);
    assert_eq!(rec.value, Some(0.0));
}

#[test]
fn eval_parse_errors_name_the_flag() {
    let cases: [(Vec<&str>, &str); 4] = [
        (eval_args("coulomb", [S1; 4], "-1"), "--R"),
        (eval_args("coulomb", [S1; 4], "abc"), "--R"),
        (eval_args("coulomb", [S1, S1, "1 0 1 1.0", S1], "1.4"), "--orb3"),
        (eval_args("coulomb", [S1, "1 0 0", S1, S1], "1.4"), "--orb2"),
    ];
    for (args, flag) in cases {
        let out = stoint(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.contains(flag), "{flag} not named in: {err}");
    }
    let out = stoint(&eval_args("ionic", [S1; 4], "1.4"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("--class"));
}

#[test]
fn eval_convergence_failure_exit_3() {
    let out = Command::new(env!("CARGO_BIN_EXE_stoint"))
        .args(eval_args("coulomb", [S1; 4], "1.4"))
        .env("STOINT_MU_CAP", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn env_tolerance_override() {
    let run = |tol: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_stoint"));
        c.args(eval_args("coulomb", [S1; 4], "1.4")).args(["--format", "json"]).env_remove("STOINT_MU_TOL");
        if let Some(t) = tol {
            c.env("STOINT_MU_TOL", t);
        }
        let out = c.output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        json_record(&out)
    };
    let tight = run(None);
    let loose = run(Some("1e-3"));
    assert!(loose.mu_used.unwrap() < tight.mu_used.unwrap());
    assert!((loose.value.unwrap() - tight.value.unwrap()).abs() < 1e-3);
    let bad = Command::new(env!("CARGO_BIN_EXE_stoint"))
        .args(eval_args("coulomb", [S1; 4], "1.4"))
        .env("STOINT_MU_TOL", "nope")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

fn write_input(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

const GOOD: &str = r#"{"id":"h2","class":"coulomb","orb1":[1,0,0,1.0],"orb2":[1,0,0,1.0],"orb3":[1,0,0,1.0],"orb4":[1,0,0,1.0],"R":1.4}"#;
const ZERO: &str = r#"{"id":"z","class":"exchange","orb1":[2,1,1,1.0],"orb2":[1,0,0,1.0],"orb3":[1,0,0,1.0],"orb4":[1,0,0,1.0],"R":2.0}"#;

#[test]
fn batch_with_malformed_line() {
    let input = write_input(&format!("# three cases\n{GOOD}\n{{\"id\":\"broken\",\"class\":\n{ZERO}\n"));
    let out = stoint(&["batch", input.path().to_str().unwrap()]);
    assert_ne!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let recs: Vec<ResultRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(recs.len(), 3);
    assert_eq!((recs[0].id.as_str(), recs[0].status), ("h2", Status::Ok));
    assert_eq!(recs[1].status, Status::Error);
    assert!(recs[1].message.is_some());
    assert_eq!((recs[2].id.as_str(), recs[2].status), ("z", Status::ZeroBySelection));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("ok=1 zero_by_selection=1 error=1"), "{err}");
}

#[test]
fn batch_invalid_case_keeps_id() {
    let bad = GOOD.replace("\"R\":1.4", "\"R\":-1.0").replace("h2", "neg");
    let input = write_input(&format!("{bad}\n{GOOD}\n"));
    let out = stoint(&["batch", input.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    let recs: Vec<ResultRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!((recs[0].id.as_str(), recs[0].status), ("neg", Status::Error));
    assert_eq!(recs[1].status, Status::Ok);
}

#[test]
fn batch_empty_file() {
    let input = write_input("");
    let dir = tempfile::tempdir().unwrap();
    let dest = dir.path().join("out.jsonl");
    let out = stoint(&["batch", input.path().to_str().unwrap(), "-o", dest.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&dest).unwrap(), "");
}

#[test]
fn batch_overrides_and_timing() {
    let loose = GOOD.replace("\"R\":1.4", "\"R\":1.4,\"overrides\":{\"mu_tol\":1e-3}");
    let input = write_input(&format!("{GOOD}\n{loose}\n"));
    let out = stoint(&["batch", input.path().to_str().unwrap(), "--timing", "--workers", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let recs: Vec<ResultRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(recs.iter().all(|r| r.elapsed.is_some()));
    assert!(recs[1].mu_used < recs[0].mu_used);
}

#[test]
fn batch_output_round_trips() {
    let input = write_input(&format!("{GOOD}\n{ZERO}\nnot json\n"));
    let out = stoint(&["batch", input.path().to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines() {
        let rec: ResultRecord = serde_json::from_str(line).unwrap();
        assert_eq!(rec.to_json(), line);
        let again: ResultRecord = serde_json::from_str(&rec.to_json()).unwrap();
        assert_eq!(again, rec);
    }
    assert!(text.lines().next().unwrap().starts_with(r#"{"id":"h2","status":"ok","value":"#));
}

#[test]
fn verify_defaults_to_small_and_passes() {
    let out = stoint(&["verify"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("small grid"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn verify_catches_phase_mutation() {
    let out = stoint(&["verify", "--mutate-phase"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("failed checks:"), "{err}");
    assert!(err.contains("engine_vs_neumann") || err.contains("engine_vs_1s_oracles"), "{err}");
}
