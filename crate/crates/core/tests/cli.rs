use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nonlocal-sir"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("cfg.toml");
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL: &str = r#"
stepper = "ssprk33"
t_final = 4.0
[grid]
p1 = 9
p2 = 9
[rule]
n = 4
[output]
snapshots = [0.0, 2.0]
[check]
states = 5
"#;

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        run(&["simulate", "--config", "/nonexistent/cfg.toml"])
            .status
            .code(),
        Some(1)
    );
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "stepper = \"rk4\"\n");
    assert_eq!(run(&["simulate", "--config", &cfg]).status.code(), Some(1));
}

#[test]
fn help_exits_0() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn simulate_writes_snapshots_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for name in [
        "S_0.csv",
        "I_0.csv",
        "R_0.csv",
        "S_4.csv",
        "I_4.csv",
        "R_4.csv",
        "report.csv",
    ] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    let snap = std::fs::read_to_string(out.join("S_0.csv")).unwrap();
    assert_eq!(snap.lines().count(), 9);
    assert!(snap.lines().all(|l| l.split(',').count() == 9));
    assert_eq!(
        snap.lines().next().unwrap().split(',').next().unwrap(),
        "20"
    );
    let report = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(
        report.lines().next().unwrap(),
        "step,d1,d2,d3,d4,worst_negative,conservation_drift"
    );
    assert!(report.lines().nth(1).unwrap().starts_with("1,1,1,1,1,"));
}

#[test]
fn violation_with_abort_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
stepper = "fe"
t_final = 2.0
[params]
a = 200.0
b = 0.01
c = 0.01
delta = 0.1
[grid]
p1 = 40
p2 = 40
[rule]
n = 20
[tau]
policy = "fixed"
value = 0.1448
"#,
    );
    let out = dir.path().join("out");
    let o = run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let report = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(report.lines().last().unwrap().starts_with("5,0,"));
}

#[test]
fn identical_config_and_seed_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("out{k}"));
        for cmd in ["simulate", "check", "cubature-test"] {
            let o = run(&[
                cmd,
                "--config",
                &cfg,
                "--seed",
                "11",
                "--out",
                out.to_str().unwrap(),
            ]);
            assert_eq!(
                o.status.code(),
                Some(0),
                "{cmd}: {}",
                String::from_utf8_lossy(&o.stdout)
            );
        }
        let mut files: Vec<_> = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        files.sort();
        outputs.push(
            files
                .iter()
                .map(|f| (f.file_name().unwrap().to_owned(), std::fs::read(f).unwrap()))
                .collect::<Vec<_>>(),
        );
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(outputs[0].iter().any(|(n, _)| n == "check.csv"));
}

#[test]
fn cubature_test_dumps_rule() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["cubature-test", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rule = std::fs::read_to_string(out.join("rule.csv")).unwrap();
    assert_eq!(rule.lines().next().unwrap(), "dx,dy,r,theta,weight");
    assert_eq!(rule.lines().count(), 1 + 10 * 20);
    let study = std::fs::read_to_string(out.join("cubature.csv")).unwrap();
    assert_eq!(study.lines().next().unwrap(), "kind,n,delta,value,error");
}

#[test]
fn convergence_and_bounds_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
t_final = 4.0
[grid]
p1 = 9
p2 = 9
[rule]
n = 4
[convergence]
steppers = ["fe", "ssprk22"]
tau0 = 0.5
rows = 3
[bounds_table]
sweep = "a"
values = [50.0, 100.0]
"#,
    );
    let out = dir.path().join("out");
    let o = run(&[
        "convergence",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let conv = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert_eq!(conv.lines().count(), 1 + 2 * 3);
    let o = run(&[
        "bounds-table",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let b = std::fs::read_to_string(out.join("bounds_table.csv")).unwrap();
    assert_eq!(
        b.lines().next().unwrap(),
        "a,tau_tilde,tau_tilde_over_tau_e,tau,tau_over_tau_e,tau_e,status"
    );
    assert_eq!(b.lines().count(), 3);
}
