//! Driver loop: fixed or adaptive steps up to a final time.

use super::bounds::adaptive_bound;
use super::steppers::{euler_step_given_t, Stepper};
use crate::error::{invalid, Result};
use crate::model::{SemiDiscrete, State};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauPolicy {
    Fixed(f64),
    /// Forward Euler only: each step uses the bound from the current `T`.
    Adaptive,
}

/// Called after every accepted step. Returning an error aborts the run.
pub trait Observer {
    fn observe(&mut self, step: usize, prev: &State, next: &State) -> Result<()>;
}

impl<F: FnMut(usize, &State, &State) -> Result<()>> Observer for F {
    fn observe(&mut self, step: usize, prev: &State, next: &State) -> Result<()> {
        self(step, prev, next)
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub final_state: State,
    pub steps: usize,
    pub min_tau: f64,
    pub max_tau: f64,
}

/// Number of fixed steps covering `span`; exact multiples within 1e-9 round.
pub fn fixed_step_count(span: f64, tau: f64) -> usize {
    let n = span / tau;
    let r = n.round();
    if (n - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        n.ceil() as usize
    }
}

pub fn simulate(
    sd: &SemiDiscrete,
    initial: &State,
    t_final: f64,
    stepper: &Stepper,
    policy: TauPolicy,
    observers: &mut [&mut dyn Observer],
) -> Result<Trajectory> {
    if !(t_final >= initial.t) {
        return Err(invalid(format!(
            "final time {t_final} precedes start {}",
            initial.t
        )));
    }
    let t0 = initial.t;
    let mut q = initial.clone();
    let mut traj = Trajectory {
        final_state: initial.clone(),
        steps: 0,
        min_tau: f64::INFINITY,
        max_tau: 0.0,
    };
    if t_final == t0 {
        return Ok(traj);
    }
    let mut emit = |step: usize, prev: &State, next: &State| -> Result<()> {
        for o in observers.iter_mut() {
            o.observe(step, prev, next)?;
        }
        Ok(())
    };
    match policy {
        TauPolicy::Fixed(tau) => {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(invalid(format!("step size must be positive, got {tau}")));
            }
            let n = fixed_step_count(t_final - t0, tau);
            for k in 0..n {
                let h = if k + 1 == n {
                    t_final - (t0 + k as f64 * tau)
                } else {
                    tau
                };
                let mut next = stepper.step(sd, &q, h)?;
                next.t = if k + 1 == n {
                    t_final
                } else {
                    t0 + (k + 1) as f64 * tau
                };
                traj.min_tau = traj.min_tau.min(h);
                traj.max_tau = traj.max_tau.max(h);
                emit(k + 1, &q, &next)?;
                q = next;
            }
            traj.steps = n;
        }
        TauPolicy::Adaptive => {
            if *stepper != Stepper::Euler {
                return Err(invalid(
                    "adaptive step sizes are only offered for forward Euler",
                ));
            }
            let mut k = 0;
            while q.t < t_final {
                let t = sd.t_field(&q.i)?;
                let bound = adaptive_bound(&t, sd.params());
                let remaining = t_final - q.t;
                let last = bound >= remaining * (1.0 - 1e-12);
                let h = if last { remaining } else { bound };
                let mut next = euler_step_given_t(sd, &q, &t, h)?;
                if last {
                    next.t = t_final;
                }
                k += 1;
                traj.min_tau = traj.min_tau.min(h);
                traj.max_tau = traj.max_tau.max(h);
                emit(k, &q, &next)?;
                q = next;
            }
            traj.steps = k;
        }
    }
    traj.final_state = q;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubature::product_disk_rule;
    use crate::grid::{Field, Grid};
    use crate::interp::InterpMethod;
    use crate::model::Params;

    fn setup() -> (SemiDiscrete, State) {
        let g = Grid::over(1.0, 1.0, 9, 9).unwrap();
        let sd = SemiDiscrete::new(
            g,
            Params::default(),
            product_disk_rule(3, 0.05).unwrap(),
            InterpMethod::Bilinear,
        )
        .unwrap();
        let q = State::new(
            Field::constant(g, 20.0),
            Field::from_fn(g, |x, y| {
                10.0 * (-((x - 0.5).powi(2) + (y - 0.5).powi(2)) / 0.02).exp()
            }),
            Field::zeros(g),
            0.0,
        )
        .unwrap();
        (sd, q)
    }

    #[test]
    fn step_counts() {
        assert_eq!(fixed_step_count(80.0, 0.4), 200);
        assert_eq!(fixed_step_count(1.0, 0.1), 10);
        assert_eq!(fixed_step_count(1.0, 0.3), 4);
    }

    #[test]
    fn zero_span_returns_initial() {
        let (sd, q) = setup();
        let tr = simulate(
            &sd,
            &q,
            0.0,
            &Stepper::Euler,
            TauPolicy::Fixed(0.1),
            &mut [],
        )
        .unwrap();
        assert_eq!(tr.steps, 0);
        assert_eq!(tr.final_state, q);
    }

    #[test]
    fn lands_on_final_time() {
        let (sd, q) = setup();
        let mut count = 0;
        let mut obs = |_: usize, _: &State, _: &State| -> Result<()> {
            count += 1;
            Ok(())
        };
        let tr = simulate(
            &sd,
            &q,
            1.0,
            &Stepper::Euler,
            TauPolicy::Fixed(0.3),
            &mut [&mut obs],
        )
        .unwrap();
        assert_eq!(tr.steps, 4);
        assert_eq!(count, 4);
        assert_eq!(tr.final_state.t, 1.0);
        assert!((tr.min_tau - 0.1).abs() < 1e-12);
    }

    #[test]
    fn adaptive_is_euler_only() {
        let (sd, q) = setup();
        let rk: Stepper = "ssprk22".parse().unwrap();
        assert!(simulate(&sd, &q, 1.0, &rk, TauPolicy::Adaptive, &mut []).is_err());
        let tr = simulate(&sd, &q, 5.0, &Stepper::Euler, TauPolicy::Adaptive, &mut []).unwrap();
        assert_eq!(tr.final_state.t, 5.0);
        assert!(tr.steps >= 1);
    }

    #[test]
    fn observer_error_aborts() {
        let (sd, q) = setup();
        let mut obs = |step: usize, _: &State, _: &State| -> Result<()> {
            if step == 3 {
                Err(crate::Error::PropertyViolation {
                    step,
                    detail: "test".into(),
                })
            } else {
                Ok(())
            }
        };
        let r = simulate(
            &sd,
            &q,
            1.0,
            &Stepper::Euler,
            TauPolicy::Fixed(0.1),
            &mut [&mut obs],
        );
        assert!(matches!(
            r,
            Err(crate::Error::PropertyViolation { step: 3, .. })
        ));
    }
}
