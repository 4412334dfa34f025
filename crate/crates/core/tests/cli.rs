use std::process::{Command, Output};

use conformal_plap::cli::{BoundOutput, OracleOutput, TableOutput, VerifyOutput};

fn plap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plap")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn bound_happy_path() {
    let o = plap(&["bound", "--theorem", "infty", "--map", "epicycloid n=3", "--p", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out: BoundOutput = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(out.run.map, "epicycloid n=3");
    assert!(out.report.lower_bound_lambda.value > 0.0);
    assert!(out.report.optimal_q > 1.2 && out.report.optimal_q < 2.0);
}

#[test]
fn validation_exits_with_two() {
    let o = plap(&["bound", "--theorem", "quasidisc", "--p", "3", "--K", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = plap(&["bound", "--theorem", "infty", "--p", "3", "--alpha", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = plap(&["bound", "--theorem", "infty", "--p", "3", "--map", "epicycloid q=3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("q=3"));
}

#[test]
fn invalid_solver_settings_exit_with_two() {
    let o = plap(&["oracle", "--map", "identity", "--p", "3", "--h", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = plap(&["oracle", "--map", "identity", "--p", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_sine() {
    let o = plap(&["verify", "--map", "sine d=1", "--p", "3", "--h", "0.02", "--alpha", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: VerifyOutput = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.pass);
    assert_eq!(v.checks.len(), 2);
    for c in &v.checks {
        assert!(c.lower_bound_lambda.value <= c.oracle_lambda * 1.05);
    }
}

#[test]
fn oracle_json() {
    let o = plap(&["oracle", "--map", "identity", "--p", "2", "--h", "0.05"]);
    assert_eq!(o.status.code(), Some(0));
    let out: OracleOutput = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((out.estimate.lambda / 5.783_185_962_946_784 - 1.0).abs() < 0.05);
    assert_eq!(out.estimate.h, 0.05);
}

#[test]
fn table_csv_and_json() {
    let o = plap(&["table", "--map", "epicycloid n=2..6", "--p", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().next().unwrap().starts_with("map,p,theorem,optimal_q,"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("p=3"));

    let o = plap(&["table", "--map", "sine d=0.5,1,2", "--p", "2.5,3", "--format", "json"]);
    let t: TableOutput = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(t.rows.len(), 6);
    assert_eq!(t.trend.len(), 2);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("plap-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let o = plap(&["bound", "--theorem", "star", "--p", "3", "--beta", "0.5", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let out: BoundOutput = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(out.report.beta, Some(0.5));
    assert!((out.report.k.unwrap() - 5.828_427_124_746_19).abs() < 1e-12);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn constants_csv() {
    let o = plap(&["constants", "--r", "2", "--q", "1,1.5", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "r,q,ln_A,A,optimal_l");
    assert!(rows[1].starts_with("2,1,"));
    assert!(rows[2].contains("0.39585399866619"));
}

#[test]
fn help_exits_zero() {
    assert_eq!(plap(&["--help"]).status.code(), Some(0));
    assert_eq!(plap(&[]).status.code(), Some(2));
}
