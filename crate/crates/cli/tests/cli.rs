use psh_cli::run::{execute, render, Artifact};
use psh_cli::{run_config, Command, RunConfig, EXIT_ERROR, EXIT_OK, EXIT_VERDICT};
use serde_json::Value;
use std::process::Command as Proc;

fn psh(args: &[&str]) -> (i32, String, String) {
    let out = Proc::new(env!("CARGO_BIN_EXE_psh")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn cfg(command: Command) -> RunConfig {
    let mut c = RunConfig::defaults(command);
    c.grid = 256;
    c
}

fn body(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

fn schema() -> jsonschema::Validator {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/artifact.schema.json")).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

#[test]
fn mass_of_green_is_one() {
    let mut c = cfg(Command::Mass);
    c.exhaustion = "green".into();
    let (code, text) = run_config(&c).unwrap();
    assert_eq!(code, EXIT_OK);
    let rows = body(&text);
    assert_eq!(rows[0], "exhaustion,ma,raw_ma");
    let cols: Vec<&str> = rows[1].split(',').collect();
    assert!((cols[1].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    assert!((cols[2].parse::<f64>().unwrap() - std::f64::consts::TAU).abs() < 1e-11);
}

#[test]
fn header_carries_version_and_config() {
    let c = cfg(Command::Mass);
    let (_, text) = run_config(&c).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), format!("# psh {}", env!("CARGO_PKG_VERSION")));
    let conf = lines.next().unwrap().strip_prefix("# config: ").unwrap();
    let back: RunConfig = serde_json::from_str(conf).unwrap();
    assert_eq!(back, c);
    assert!(!text.contains("timestamp:"));
}

#[test]
fn csv_is_deterministic() {
    let mut c = cfg(Command::Beta);
    c.grid = 128;
    let (_, a) = run_config(&c).unwrap();
    let (_, b) = run_config(&c).unwrap();
    assert_eq!(a, b);
    let rows = body(&a);
    assert_eq!(rows[0], "t,beta,tag_distance");
    assert_eq!(rows.len(), 129);
}

#[test]
fn compose_expectation_sets_exit_code() {
    let (code, out, _) = psh(&["compose-check", "--symbol", "rot:1", "--grid", "256", "--expect", "bounded"]);
    assert_eq!(code, EXIT_VERDICT);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["result"]["verdict"]["outcome"], "Fails");
    let (code, _, _) = psh(&["compose-check", "--symbol", "mobius:0.5,0", "--grid", "256", "--expect", "bounded"]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn membership_expectation() {
    let mut c = cfg(Command::Membership);
    c.f = Some("pow(1-z,-0.8)".into());
    c.expect = Some("member".into());
    assert_eq!(run_config(&c).unwrap().0, EXIT_VERDICT);
    c.expect = Some("nonmember".into());
    assert_eq!(run_config(&c).unwrap().0, EXIT_OK);
    c.expect = Some("maybe".into());
    assert!(run_config(&c).is_err());
}

#[test]
fn usage_errors_exit_one() {
    let (code, _, err) = psh(&["frobnicate"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(!err.is_empty());
    let (code, _, _) = psh(&["mass", "--exhaustion", "nowhere"]);
    assert_eq!(code, EXIT_ERROR);
    let (code, _, _) = psh(&["--help"]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn config_file_layers_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "exhaustion = \"green\"\ngrid = 64\n").unwrap();
    let (code, out, _) = psh(&["mass", "--config", path.to_str().unwrap(), "--grid", "128"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("\"exhaustion\":\"green\""));
    assert!(out.contains("\"grid\":128"));
    std::fs::write(&path, "exhaustoin = \"green\"\n").unwrap();
    let (code, _, err) = psh(&["mass", "--config", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("exhaustoin"), "{err}");
}

#[test]
fn lj_check_on_green() {
    let mut c = cfg(Command::LjCheck);
    c.exhaustion = "green".into();
    let (code, text) = run_config(&c).unwrap();
    assert_eq!(code, EXIT_OK);
    let rows = body(&text);
    let cols: Vec<&str> = rows[0].split(',').collect();
    let err_col = cols.iter().position(|c| *c == "rel_err").expect("rel_err column");
    for r in &rows[1..] {
        let v: f64 = r.split(',').nth(err_col).unwrap().parse().unwrap();
        assert!(v < 1e-10, "{r}");
    }
}

#[test]
fn json_artifacts_match_schema() {
    let v = schema();
    let mut f = cfg(Command::Factorize);
    f.f = Some("(z-0.5)/(1-0.5z)*(2+z)".into());
    f.timestamp = true;
    let mut k = cfg(Command::ComposeCheck);
    k.symbol = "monomial:2".into();
    let mut n = cfg(Command::Norm);
    n.f = Some("1+z/2".into());
    n.format = psh_cli::Format::Json;
    for c in [f, k, n] {
        let produced = execute(&c).unwrap();
        let text = render(&c, &produced.artifact).unwrap();
        let doc: Value = serde_json::from_str(&text).unwrap();
        let errors: Vec<String> = v.iter_errors(&doc).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{:?}: {errors:?}", c.command);
        let back: RunConfig = serde_json::from_value(doc["config"].clone()).unwrap();
        assert_eq!(back, c);
    }
}

#[test]
fn factorize_reports_zero_and_norm_identity() {
    let mut c = cfg(Command::Factorize);
    c.f = Some("(z-0.5)/(1-0.5z)*(2+z)".into());
    let produced = execute(&c).unwrap();
    let Artifact::Json(v) = produced.artifact else { panic!("factorize is JSON") };
    let z = &v["zeros"][0];
    assert!((z[0].as_f64().unwrap() - 0.5).abs() < 1e-10);
    let g = v["h2_split"]["norm_g_2"].as_f64().unwrap();
    let h = v["h2_split"]["norm_h_2"].as_f64().unwrap();
    let f1 = v["norms"]["f"].as_f64().unwrap();
    assert!((g * h / f1 - 1.0).abs() < 1e-6);
}

#[test]
fn reproduce_writes_case_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = cfg(Command::Reproduce);
    c.case = "mass-identity".into();
    c.grid = 512;
    c.out = Some(dir.path().to_path_buf());
    let (code, _) = run_config(&c).unwrap();
    assert_eq!(code, EXIT_OK);
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(summary.contains("mass-identity,PASS"), "{summary}");
    assert!(dir.path().join("mass-identity.csv").exists());
    c.case = "no-such-case".into();
    assert!(run_config(&c).is_err());
}
