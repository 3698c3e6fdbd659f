//! Runs the built `qaskey` binary and checks output and exit codes.

use std::process::{Command, Output};

fn qaskey(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qaskey")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn eval_families() {
    let o = qaskey(&["eval", "CqHermite", "--z", "3", "--q", "1/2", "--n", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "10/3");

    let o = qaskey(&["eval", "CqHermite", "--z", "3", "--q", "1/2", "--n", "1", "--rep", "2"]);
    assert_eq!(stdout(&o).trim(), "10/3");

    let o = qaskey(&["eval", "ASC", "--a", "1/3,1/5", "--z", "2", "--q", "1/2", "--n", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "59/30");
}

#[test]
fn eval_expressions_and_members() {
    let o = qaskey(&["eval", "poch(a; q; n)", "--a", "1/2", "--q", "1/3", "--n", "2"]);
    assert_eq!(stdout(&o).trim(), "5/12");

    let o = qaskey(&["eval", "cqH:def2", "--z", "3", "--q", "1/2", "--n", "1"]);
    assert_eq!(stdout(&o).trim(), "10/3");

    let o = qaskey(&["eval", "poch(a, b; q; n)", "--param", "a=2", "--param", "b=-1/2+1/3 i", "--q", "3", "--n", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "-3/2+1/3 i");
}

#[test]
fn eval_errors_exit_2() {
    let o = qaskey(&["eval", "CqHermite", "--z", "1", "--q", "1/2", "--n", "2", "--rep", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("poch(z^-2; q; n)"), "{}", stderr(&o));

    let o = qaskey(&["eval", "poch(a; q; n", "--q", "1/2"]);
    assert_eq!(o.status.code(), Some(2));

    let o = qaskey(&["eval", "ASC", "--a", "1/3", "--z", "2", "--q", "1/2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("takes 2 parameter"), "{}", stderr(&o));

    let o = qaskey(&["eval", "CqHermite", "--z", "3", "--q", "1/2", "--rep", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn list_filters_by_glob() {
    let o = qaskey(&["list", "cor4.*"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("cor4.3 ") && l.contains("13 members")), "{text}");
    assert!(!text.contains("cor5."));

    let o = qaskey(&["list", "nomatch*"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());

    let o = qaskey(&["list", "[bad"]);
    assert_eq!(o.status.code(), Some(2));

    let o = qaskey(&["list"]);
    assert!(stdout(&o).lines().count() >= 40);
}

#[test]
fn verify_exit_codes() {
    let o = qaskey(&["verify", "cor7.3a", "--mode", "exact"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("PASS  cor7.3a"));

    let o = qaskey(&["verify", "nosuch"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown identity"));

    let o = qaskey(&["verify", "cor5.5", "--height-bound", "1", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
}

#[test]
fn float_mode_reports_residuals() {
    let o = qaskey(&["verify", "cor4.5", "--mode", "float", "--trials", "5", "--format", "json", "--no-timestamp"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let r = &v["results"][0];
    assert!(r["max_residual"].as_f64().unwrap() <= 1e-10, "{r}");
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn json_reports_are_deterministic() {
    let args = ["verify", "cor5.5", "cor4.5", "--trials", "4", "--seed", "7", "--format", "json", "--no-timestamp"];
    let a = qaskey(&args);
    let b = qaskey(&args);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["config"]["seed"], 7);
    assert!(v.get("timestamp").is_none());
    assert!(v["results"][0].get("wall_time").is_none());

    let text = String::from_utf8(a.stdout).unwrap();
    let keys = ["\"schema_version\"", "\"tool\"", "\"command\"", "\"config\"", "\"summary\"", "\"results\""];
    let positions: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));

    let timed = qaskey(&["verify", "cor5.5", "--trials", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&timed.stdout).unwrap();
    assert!(v["timestamp"].is_string());
}

#[test]
fn counterexamples_reach_the_report() {
    let o = qaskey(&["verify", "watson", "--mode", "float", "--trials", "20", "--format", "json", "--no-timestamp"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let failing = !v["results"][0]["counterexamples"].as_array().unwrap().is_empty();
    assert_eq!(o.status.code(), Some(if failing { 1 } else { 0 }));
}

#[test]
fn csv_output() {
    let o = qaskey(&["verify", "cor5.5", "--trials", "2", "--format", "csv", "--no-timestamp"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("identity_id,kind,passed"));
    assert!(lines.next().unwrap().starts_with("cor5.5,interchange,true"));
}

#[test]
fn output_flag_writes_a_file() {
    let dir = std::env::temp_dir().join(format!("qaskey-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("list.json");
    let o = qaskey(&["list", "Zn*", "--format", "json", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(v["count"], 3);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn scheme_dot() {
    let o = qaskey(&["scheme"]);
    assert_eq!(o.status.code(), Some(0));
    let dot = stdout(&o);
    assert!(dot.starts_with("digraph scheme {"));
    assert!(dot.contains("CBqHermite -> ZnMinus [label=\"c→∞\"];"));
    assert_eq!(dot.lines().filter(|l| l.contains(" -> ")).count(), 20);
}

#[test]
fn scheme_limit_table() {
    let o = qaskey(&["scheme", "--check-limits", "--ladder", "2^10..2^14"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("edges converged"));
    assert_eq!(text.lines().filter(|l| l.starts_with("// ") && l.contains("→")).count(), 18);

    let o = qaskey(&["scheme", "--check-limits", "--ladder", "2^10..2^12", "--format", "json", "--no-timestamp"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["limits"].as_array().unwrap().len(), 18);
    assert_eq!(v["nodes"], 15);

    let o = qaskey(&["scheme", "--check-limits", "--ladder", "2^x..2^3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn budget_skips_trials() {
    let o = qaskey(&["verify", "cor4.3", "--budget", "0", "--trials", "200"]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(stdout(&o).contains("budget exceeded"));
}
