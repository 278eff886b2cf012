use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nonlocal_sir::fmt::g17;
use nonlocal_sir::harness::suite::{property_suite, run_simulation};
use nonlocal_sir::harness::{
    bounds_table, convergence_table, cubature_error_study, halving_ladder, loglog_slope, presets,
    ExperimentConfig, Threshold,
};
use nonlocal_sir::integrators::{Stepper, TauPolicy};
use nonlocal_sir::{Error, RuleKind};

#[derive(Parser)]
#[command(
    name = "nonlocal-sir",
    version,
    about = "Nonlocal SIR solver and experiment harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in configuration: defaults, a-sweep, delta-sweep, ladder, overshoot, decay.
    #[arg(long, global = true, conflicts_with = "config")]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for randomized suites (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trajectory, writing snapshots and a per-step property report.
    Simulate,
    /// Step-size bounds and bisected empirical thresholds over a parameter sweep.
    BoundsTable,
    /// Errors and observed orders over a halving step-size ladder.
    Convergence,
    /// Disk-rule errors on the closed-form test integral, plus a dump of the configured rule.
    CubatureTest,
    /// Randomized property suite plus a checked trajectory.
    Check,
}

enum Outcome {
    Done,
    Violation,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(2),
        Err(e @ Error::PropertyViolation { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(p), _) => ExperimentConfig::load(p)?,
        (None, Some(name)) => presets::by_name(name)?,
        (None, None) => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Error> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let cfg = load(cli)?;
    match cli.command {
        Command::Simulate => simulate(&cfg, &cli.out),
        Command::BoundsTable => bounds(&cfg, &cli.out),
        Command::Convergence => convergence(&cfg, &cli.out),
        Command::CubatureTest => cubature(&cfg, &cli.out),
        Command::Check => check(&cfg, &cli.out),
    }
}

fn simulate(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, Error> {
    let res = run_simulation(cfg, Some(out))?;
    if let TauPolicy::Fixed(tau) = res.tau {
        println!("tau = {}", g17(tau));
    }
    for v in &res.violations {
        println!("step {}: {}", v.step, v.describe());
    }
    match (res.trajectory, res.aborted) {
        (_, Some(e)) => {
            eprintln!("aborted: {e}");
            Ok(Outcome::Violation)
        }
        (Some(t), None) => {
            let q = &t.final_state;
            println!("steps = {}, t = {}", t.steps, g17(q.t));
            println!(
                "max S = {}, max I = {}, max R = {}",
                g17(q.s.max()),
                g17(q.i.max()),
                g17(q.r.max())
            );
            Ok(Outcome::Done)
        }
        (None, None) => Ok(Outcome::Done),
    }
}

fn bounds(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, Error> {
    let rows = bounds_table(cfg)?;
    let mut w = create(out, "bounds_table.csv")?;
    writeln!(
        w,
        "{},tau_tilde,tau_tilde_over_tau_e,tau,tau_over_tau_e,tau_e,status",
        cfg.bounds_table.sweep
    )?;
    for r in &rows {
        let (te, status) = match r.tau_e {
            Threshold::Found(t) => (Some(t), "ok"),
            Threshold::FailsAtLower => (None, "violates-at-tau"),
            Threshold::PassesAtUpper => (None, "passes-at-upper"),
        };
        let ratio = |x: f64| te.map(|t| g17(x / t)).unwrap_or_default();
        let line = format!(
            "{},{},{},{},{},{},{status}",
            g17(r.param),
            g17(r.tau_tilde),
            ratio(r.tau_tilde),
            g17(r.tau),
            ratio(r.tau),
            te.map(g17).unwrap_or_default()
        );
        writeln!(w, "{line}")?;
        println!("{line}");
    }
    w.flush()?;
    Ok(Outcome::Done)
}

fn convergence(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, Error> {
    let ladder = halving_ladder(cfg.convergence.tau0, cfg.convergence.rows);
    let mut w = create(out, "convergence.csv")?;
    writeln!(w, "stepper,tau,error,order")?;
    for name in &cfg.convergence.steppers {
        let stepper: Stepper = name.parse()?;
        for r in convergence_table(cfg, &stepper, &ladder)? {
            let line = format!(
                "{name},{},{},{}",
                g17(r.tau),
                g17(r.error),
                r.order.map(g17).unwrap_or_default()
            );
            writeln!(w, "{line}")?;
            println!("{line}");
        }
    }
    w.flush()?;
    Ok(Outcome::Done)
}

fn cubature(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, Error> {
    let spec = &cfg.cubature_test;
    let mut w = create(out, "cubature.csv")?;
    writeln!(w, "kind,n,delta,value,error")?;
    for kind in &spec.kinds {
        let kind: RuleKind = kind.parse()?;
        let rows = cubature_error_study(kind, &spec.n, &spec.delta, spec.sigma)?;
        for r in &rows {
            writeln!(
                w,
                "{:?},{},{},{},{}",
                r.kind,
                r.n,
                g17(r.delta),
                g17(r.value),
                g17(r.error)
            )?;
        }
        if spec.delta.len() >= 2 {
            for &n in &spec.n {
                let sel: Vec<_> = rows.iter().filter(|r| r.n == n && r.error > 0.0).collect();
                if sel.len() >= 2 {
                    let d: Vec<f64> = sel.iter().map(|r| r.delta).collect();
                    let e: Vec<f64> = sel.iter().map(|r| r.error).collect();
                    println!(
                        "{kind:?} n={n}: slope in delta = {:.3}",
                        loglog_slope(&d, &e)
                    );
                }
            }
        }
    }
    w.flush()?;
    let mut r = create(out, "rule.csv")?;
    cfg.make_rule()?.write_csv(&mut r)?;
    r.flush()?;
    Ok(Outcome::Done)
}

fn check(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, Error> {
    let (lines, run) = property_suite(cfg)?;
    let mut w = create(out, "check.csv")?;
    writeln!(w, "suite,cases,failures,worst")?;
    let mut failed = false;
    for l in &lines {
        writeln!(w, "{},{},{},{}", l.name, l.cases, l.failures, g17(l.worst))?;
        println!(
            "[{}] {} ({} cases, {} failures, worst {:e})",
            if l.ok() { "PASS" } else { "FAIL" },
            l.name,
            l.cases,
            l.failures,
            l.worst
        );
        failed |= !l.ok();
    }
    if let Some(r) = run {
        let ok = r.aborted.is_none() && r.violations.is_empty();
        println!(
            "[{}] trajectory/{}",
            if ok { "PASS" } else { "FAIL" },
            cfg.stepper
        );
        if let Some(e) = &r.aborted {
            println!("  {e}");
        }
        failed |= !ok;
    }
    w.flush()?;
    Ok(if failed {
        Outcome::Violation
    } else {
        Outcome::Done
    })
}
