//! Simulation runs with file output, and the randomized property suite.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{initial_state, ExperimentConfig};
use crate::error::{Error, Result};
use crate::fmt::g;
use crate::grid::{Field, Grid};
use crate::integrators::{adaptive_bound, simulate, Observer, Stepper, TauPolicy, Trajectory};
use crate::model::{SemiDiscrete, State};
use crate::properties::{check_step, PropertyMonitor, PropertyReport, Tolerances};

pub fn snapshot_name(species: &str, t: f64) -> String {
    format!("{species}_{}.csv", g(t, 10))
}

pub fn write_snapshot(dir: &Path, q: &State) -> Result<()> {
    for (name, f) in [("S", &q.s), ("I", &q.i), ("R", &q.r)] {
        let mut w = BufWriter::new(File::create(dir.join(snapshot_name(name, q.t)))?);
        f.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

/// Writes S/I/R snapshots at the first step reaching each requested time.
pub struct SnapshotWriter {
    dir: PathBuf,
    times: Vec<f64>,
    next: usize,
    pub written: Vec<f64>,
}

impl SnapshotWriter {
    pub fn new(dir: &Path, mut times: Vec<f64>) -> Self {
        times.sort_by(f64::total_cmp);
        Self {
            dir: dir.to_path_buf(),
            times,
            next: 0,
            written: Vec::new(),
        }
    }

    fn offer(&mut self, q: &State) -> Result<()> {
        let mut hit = false;
        while self.next < self.times.len() && q.t >= self.times[self.next] - 1e-9 {
            self.next += 1;
            hit = true;
        }
        if hit {
            write_snapshot(&self.dir, q)?;
            self.written.push(q.t);
        }
        Ok(())
    }
}

impl Observer for SnapshotWriter {
    fn observe(&mut self, _step: usize, _prev: &State, next: &State) -> Result<()> {
        self.offer(next)
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub trajectory: Option<Trajectory>,
    pub violations: Vec<PropertyReport>,
    /// Set when the run stopped on a property violation.
    pub aborted: Option<Error>,
    pub tau: TauPolicy,
}

/// Runs the configured simulation, writing snapshots and `report.csv` into `out`.
pub fn run_simulation(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<RunOutcome> {
    let sd = cfg.semi_discrete()?;
    let q0 = initial_state(cfg)?;
    let stepper = cfg.make_stepper()?;
    let policy = cfg.tau_policy(&sd, &q0)?;
    let mut report_file = match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            Some(BufWriter::new(File::create(dir.join("report.csv"))?))
        }
        None => None,
    };
    let mut snaps = out.map(|d| SnapshotWriter::new(d, cfg.output.snapshots.clone()));
    if let Some(s) = snaps.as_mut() {
        s.offer(&q0)?;
    }
    let mut monitor = PropertyMonitor::new(cfg.tolerances(&q0), cfg.on_violation()?);
    if let Some(w) = report_file.as_mut() {
        monitor = monitor.with_csv(w)?;
    }
    let result = {
        let mut obs: Vec<&mut dyn Observer> = Vec::new();
        if cfg.properties.enabled {
            obs.push(&mut monitor);
        }
        if let Some(s) = snaps.as_mut() {
            obs.push(s);
        }
        simulate(&sd, &q0, cfg.t_final, &stepper, policy, &mut obs)
    };
    let violations = monitor.reports.clone();
    drop(monitor);
    if let Some(mut w) = report_file {
        w.flush()?;
    }
    match result {
        Ok(traj) => {
            if let (Some(dir), true) = (out, cfg.output.final_snapshot) {
                let already = snaps
                    .as_ref()
                    .is_some_and(|s| s.written.last() == Some(&traj.final_state.t));
                if !already {
                    write_snapshot(dir, &traj.final_state)?;
                }
            }
            Ok(RunOutcome {
                trajectory: Some(traj),
                violations,
                aborted: None,
                tau: policy,
            })
        }
        Err(e @ Error::PropertyViolation { .. }) => Ok(RunOutcome {
            trajectory: None,
            violations,
            aborted: Some(e),
            tau: policy,
        }),
        Err(e) => Err(e),
    }
}

/// Nonnegative random state with entries in `[0, max)` per species.
pub fn random_state<R: Rng>(grid: Grid, rng: &mut R, max: f64) -> State {
    let mut f = || Field::from_fn(grid, |_, _| rng.random::<f64>() * max);
    let (s, i, r) = (f(), f(), f());
    State { s, i, r, t: 0.0 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteLine {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub worst: f64,
}

impl SuiteLine {
    pub fn ok(&self) -> bool {
        self.failures == 0
    }
}

/// Per-step conservation drift of every stepper on random states, at the
/// stepper's SSP-scaled improved bound for each state.
pub fn conservation_suite(
    sd: &SemiDiscrete,
    states: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<SuiteLine>> {
    let names = ["fe", "ssprk22", "ssprk33", "ssprk104", "integral"];
    let mut out = Vec::new();
    for name in names {
        let stepper: Stepper = name.parse()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut line = SuiteLine {
            name: format!("conservation/{name}"),
            cases: states,
            failures: 0,
            worst: 0.0,
        };
        for _ in 0..states {
            let q = random_state(sd.grid(), &mut rng, 20.0);
            let b = crate::integrators::improved_bound(&q, sd, stepper.ssp_c())?;
            let tau = b.rk_scaled * (0.5 + rng.random::<f64>());
            let tau = if stepper == Stepper::Integral {
                tau.min(1.0 / sd.params().b)
            } else {
                tau
            };
            let next = stepper.step(sd, &q, tau)?;
            let rep = check_step(&q, &next, f64::INFINITY, tol)?;
            line.worst = line.worst.max(rep.conservation_drift);
            if !rep.d2_ok {
                line.failures += 1;
            }
        }
        out.push(line);
    }
    Ok(out)
}

/// D1–D4 for forward Euler at the adaptive bound on random states.
pub fn adaptive_euler_suite(sd: &SemiDiscrete, states: usize, seed: u64) -> Result<SuiteLine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut line = SuiteLine {
        name: "d1-d4/fe-adaptive".into(),
        cases: states,
        failures: 0,
        worst: 0.0,
    };
    for _ in 0..states {
        let q = random_state(sd.grid(), &mut rng, 20.0);
        let t = sd.t_field(&q.i)?;
        let tau = adaptive_bound(&t, sd.params());
        let next = crate::integrators::euler_step(sd, &q, tau)?;
        let tol = Tolerances::for_state(&q);
        let rep = check_step(&q, &next, tol.neg, tol.cons)?;
        line.worst = line.worst.min(rep.worst_negative);
        if !rep.all_ok() {
            line.failures += 1;
        }
    }
    Ok(line)
}

/// Randomized suites plus, if configured, the configured trajectory.
pub fn property_suite(cfg: &ExperimentConfig) -> Result<(Vec<SuiteLine>, Option<RunOutcome>)> {
    let sd = cfg.semi_discrete()?;
    let mut lines = conservation_suite(&sd, cfg.check.states, cfg.seed, 1e-12)?;
    lines.push(adaptive_euler_suite(&sd, cfg.check.states, cfg.seed)?);
    let run = if cfg.check.trajectory {
        Some(run_simulation(cfg, None)?)
    } else {
        None
    };
    Ok((lines, run))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_names() {
        assert_eq!(snapshot_name("S", 80.0), "S_80.csv");
        assert_eq!(snapshot_name("I", 0.30000000000000004), "I_0.3.csv");
    }

    #[test]
    fn random_states_are_reproducible() {
        let g = Grid::over(1.0, 1.0, 4, 4).unwrap();
        let a = random_state(g, &mut ChaCha8Rng::seed_from_u64(7), 1.0);
        let b = random_state(g, &mut ChaCha8Rng::seed_from_u64(7), 1.0);
        assert_eq!(a, b);
        assert!(a.s.values.iter().all(|&v| (0.0..1.0).contains(&v)));
    }
}
