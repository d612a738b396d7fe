use std::path::Path;
use std::process::{Command, Output};

fn seagrasp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seagrasp"))
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn trial_args(out: &Path) -> Vec<String> {
    [
        "trial",
        "--controller",
        "mimo",
        "--object",
        "circle_67",
        "--location",
        "120",
        "--pose",
        "30",
        "--out",
    ]
    .iter()
    .map(|s| s.to_string())
    .chain([out.display().to_string()])
    .collect()
}

fn run(args: &[String]) -> Output {
    seagrasp(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn trial_writes_report_and_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&trial_args(dir.path()));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("fingertip_stable"));
    let trials = std::fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 2);
    assert!(trials
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("mimo,circle_67,120,30,rubber,"));
    for f in ["aggregate.csv", "summary.csv", "config.toml"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert!(!dir.path().join(".write-test").exists());
}

#[test]
fn config_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a");
    let second = dir.path().join("b");
    assert!(run(&trial_args(&first)).status.success());
    let mut args = trial_args(&second);
    args.extend([
        "--config".to_string(),
        first.join("config.toml").display().to_string(),
    ]);
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let a = std::fs::read_to_string(first.join("trials.csv")).unwrap();
    let b = std::fs::read_to_string(second.join("trials.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn traces_are_written_when_requested() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = trial_args(dir.path());
    args.extend(["--trace".to_string(), "all".to_string()]);
    assert!(run(&args).status.success());
    let traces: Vec<_> = std::fs::read_dir(dir.path().join("traces"))
        .unwrap()
        .collect();
    assert_eq!(traces.len(), 1);
    let trials = std::fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    assert!(trials.contains("traces/"));
}

#[test]
fn underactuated_trial_rejects_a_pose() {
    let dir = tempfile::tempdir().unwrap();
    let o = seagrasp(&[
        "trial",
        "--controller",
        "phys_ua_0.5",
        "--object",
        "box_39",
        "--location",
        "100",
        "--pose",
        "30",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[physics]\nsubstep = 0.001\nobject_mass = -1.0\n").unwrap();
    let mut args = trial_args(&dir.path().join("out"));
    args.extend(["--config".to_string(), cfg.display().to_string()]);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unwritable_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    std::fs::write(&file, "x").unwrap();
    let o = run(&trial_args(&file.join("sub")));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_object_is_a_usage_error() {
    let o = seagrasp(&[
        "trial",
        "--controller",
        "mimo",
        "--object",
        "sphere_3",
        "--location",
        "100",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_passes() {
    let o = seagrasp(&["validate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().count() >= 10);
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn enveloping_suite_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = seagrasp(&[
        "envelop",
        "--out",
        dir.path().to_str().unwrap(),
        "--jobs",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let trials = std::fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 9);
    assert_eq!(
        trials
            .lines()
            .skip(1)
            .filter(|l| l.contains(",enveloped,"))
            .count(),
        8
    );
}
