use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn ocssg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ocssg")).args(args).output().expect("binary runs")
}

fn ocssg_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ocssg"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn lines(o: &Output) -> Vec<String> {
    stdout(o).lines().map(str::to_string).collect()
}

#[test]
fn condon_fair_coin_pipeline() {
    let reduced = ocssg(&["reduce", &fixture("fair_coin.ssg"), "--kind", "condon-limit", "--s", "s", "--t", "t", "--t2", "u"]);
    assert!(reduced.status.success());
    let piped = ocssg_stdin(&["solve", "-", "--objective", "liminf-minus-inf"], &stdout(&reduced));
    assert_eq!(piped.status.code(), Some(0));
    assert!(lines(&piped).contains(&"s = 1/1".to_string()));

    let dir = std::env::temp_dir().join(format!("ocssg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("reduced.ssg");
    std::fs::write(&path, stdout(&reduced)).unwrap();
    let direct = ocssg(&["solve", path.to_str().unwrap(), "--objective", "liminf-minus-inf"]);
    assert_eq!(stdout(&direct), stdout(&piped));
}

#[test]
fn min_memory_termination_is_not_sure() {
    let o = ocssg(&["term", &fixture("min_memory.ocssg"), "--j", "1"]);
    assert!(o.status.success());
    let l = lines(&o);
    assert!(l.contains(&"value1 = false".to_string()), "{l:?}");
    assert!(l.contains(&"min.memory = 5".to_string()));
    assert!(l.contains(&"strategy_verified = true".to_string()));
}

#[test]
fn exit_status_reports_false_decisions() {
    let o = ocssg(&["term", &fixture("min_memory.ocssg"), "--j", "1", "--qual", "one", "--exit-status"]);
    assert_eq!(o.status.code(), Some(1));
    let o = ocssg(&["term", &fixture("fair_walk.ocssg"), "--j", "1", "--qual", "one", "--exit-status"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(lines(&o).contains(&"value1 = true".to_string()));
    let o = ocssg(&[
        "solve",
        &fixture("fair_coin.ssg"),
        "--objective",
        "mean-gt",
        "--state",
        "s",
        "--threshold",
        "1/2",
        "--relation",
        "ge",
        "--exit-status",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(lines(&o).contains(&"decision = false".to_string()));
}

#[test]
fn term_zero_reports_credit() {
    let o = ocssg(&["term", &fixture("fair_walk.ocssg"), "--j", "2", "--qual", "zero"]);
    let l = lines(&o);
    assert!(l.contains(&"value0 = false".to_string()));
    assert!(l.contains(&"credit = inf".to_string()));
    assert!(!l.iter().any(|x| x.starts_with("value1")));
}

#[test]
fn condon_term_output_parses() {
    let o = ocssg(&["reduce", &fixture("fair_coin.ssg"), "--kind", "condon-term", "--s", "s", "--t", "t", "--t2", "u"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# query: state s with counter 3\nocssg\n"));
    let t = ocssg_stdin(&["term", "-", "--j", "3", "--state", "s"], &text);
    assert!(lines(&t).contains(&"value1 = true".to_string()));
}

#[test]
fn simulation_needs_a_seed_and_is_reproducible() {
    let o = ocssg(&["simulate", &fixture("fair_walk.ocssg"), "--j", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let args = ["simulate", &fixture("fair_walk.ocssg"), "--j", "1", "--seed", "9", "--steps", "200", "--trials", "300"];
    let a = ocssg(&args);
    let b = ocssg(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(lines(&a).contains(&"rng = chacha8".to_string()));
}

#[test]
fn simulation_with_witnesses() {
    let o = ocssg(&["simulate", &fixture("min_memory.ocssg"), "--seed", "3", "--steps", "50", "--trials", "10", "--witness", "liminf-minus-inf"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = ocssg(&["simulate", &fixture("min_memory.ocssg"), "--seed", "3", "--steps", "50", "--trials", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_agrees_with_solver() {
    let o = ocssg(&["oracle", &fixture("min_memory.ocssg"), "--objective", "liminf-plus-inf"]);
    assert!(o.status.success());
    assert!(lines(&o).contains(&"agrees = true".to_string()));
}

#[test]
fn input_errors_exit_with_two() {
    let o = ocssg_stdin(&["solve", "-", "--objective", "mean-gt"], "ssg rewards=states\nstate a owner=max reward=0\ntrans a -> b\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    let o = ocssg(&["solve", &fixture("fair_coin.ssg"), "--objective", "mean-gt", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ocssg(&["solve", &fixture("missing.ssg"), "--objective", "mean-gt"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oversized_oracle_request_is_an_input_error() {
    let mut text = String::from("ssg rewards=states\n");
    for i in 0..21 {
        text += &format!("state s{i} owner=max reward=0\n");
    }
    for i in 0..21 {
        text += &format!("trans s{i} -> s{}\ntrans s{i} -> s0\n", (i + 1) % 21);
    }
    let o = ocssg_stdin(&["oracle", "-", "--objective", "mean-gt"], &text);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_is_byte_stable() {
    let args = ["solve", &fixture("min_memory.ocssg"), "--objective", "liminf-minus-inf"];
    assert_eq!(ocssg(&args).stdout, ocssg(&args).stdout);
}
