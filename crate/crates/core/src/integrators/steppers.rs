use std::str::FromStr;

use super::rk::RkMethod;
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::model::{Rates, SemiDiscrete, State};

/// Time stepper selected by name: `fe`, `ssprk22`, `ssprk33`, `ssprk104`, `integral`.
#[derive(Debug, Clone, PartialEq)]
pub enum Stepper {
    Euler,
    Rk(RkMethod),
    Integral,
}

impl FromStr for Stepper {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fe" => Ok(Stepper::Euler),
            "integral" => Ok(Stepper::Integral),
            other => RkMethod::registry()
                .into_iter()
                .find(|m| m.name == other)
                .map(Stepper::Rk)
                .ok_or_else(|| Error::UnknownMethod(s.into())),
        }
    }
}

impl Stepper {
    pub fn name(&self) -> &'static str {
        match self {
            Stepper::Euler => "fe",
            Stepper::Rk(m) => m.name,
            Stepper::Integral => "integral",
        }
    }

    /// SSP coefficient multiplying the forward-Euler bound.
    pub fn ssp_c(&self) -> f64 {
        match self {
            Stepper::Rk(m) => m.ssp_c,
            _ => 1.0,
        }
    }

    pub fn order(&self) -> u32 {
        match self {
            Stepper::Rk(m) => m.order,
            _ => 1,
        }
    }

    pub fn step(&self, sd: &SemiDiscrete, q: &State, tau: f64) -> Result<State> {
        match self {
            Stepper::Euler => euler_step(sd, q, tau),
            Stepper::Rk(m) => ssp_rk_step(sd, q, tau, m),
            Stepper::Integral => integral_scheme_step(sd, q, tau),
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive, got {tau}"
        )));
    }
    Ok(())
}

// q + tau * d, fieldwise.
fn advance(q: &State, d: &Rates, tau: f64) -> State {
    let f = |x: &Field, dx: &Field| Field {
        grid: x.grid,
        values: x
            .values
            .iter()
            .zip(&dx.values)
            .map(|(a, b)| a + tau * b)
            .collect(),
    };
    State {
        s: f(&q.s, &d.ds),
        i: f(&q.i, &d.di),
        r: f(&q.r, &d.dr),
        t: q.t + tau,
    }
}

pub fn euler_step(sd: &SemiDiscrete, q: &State, tau: f64) -> Result<State> {
    check_tau(tau)?;
    Ok(advance(q, &sd.rhs(q)?, tau))
}

/// Forward Euler reusing an already assembled `T` for `q`.
pub(crate) fn euler_step_given_t(
    sd: &SemiDiscrete,
    q: &State,
    t: &Field,
    tau: f64,
) -> Result<State> {
    check_tau(tau)?;
    Ok(advance(q, &sd.rates_given_t(q, t), tau))
}

pub fn ssp_rk_step(sd: &SemiDiscrete, q0: &State, tau: f64, rk: &RkMethod) -> Result<State> {
    check_tau(tau)?;
    let h = tau / rk.ssp_c;
    let n = q0.grid().len();
    // Euler substeps E_j = Q_j + h F(Q_j), kept only while referenced.
    let mut euler: Vec<Option<State>> = vec![None; rk.m];
    let mut stage = q0.clone();
    for i in 0..=rk.m {
        if i > 0 {
            let vi = rk.v[i];
            let mut next = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
            let mut first = true;
            if vi != 0.0 {
                for (dst, src) in next.iter_mut().zip(q0.fields()) {
                    for (d, s) in dst.iter_mut().zip(&src.values) {
                        *d = vi * s;
                    }
                }
                first = false;
            }
            for (j, e) in euler.iter().enumerate().take(i) {
                let a = rk.alpha[i][j];
                if a == 0.0 {
                    continue;
                }
                let e = e.as_ref().expect("referenced substep was computed");
                for (dst, src) in next.iter_mut().zip(e.fields()) {
                    if first {
                        for (d, s) in dst.iter_mut().zip(&src.values) {
                            *d = a * s;
                        }
                    } else {
                        for (d, s) in dst.iter_mut().zip(&src.values) {
                            *d += a * s;
                        }
                    }
                }
                first = false;
            }
            let g = q0.grid();
            let [s, iv, r] = next;
            stage = State {
                s: Field { grid: g, values: s },
                i: Field {
                    grid: g,
                    values: iv,
                },
                r: Field { grid: g, values: r },
                t: q0.t,
            };
            // Drop substeps no later stage refers to.
            for (j, e) in euler.iter_mut().enumerate().take(i) {
                if e.is_some() && !(i + 1..=rk.m).any(|k| rk.alpha[k][j] != 0.0) {
                    *e = None;
                }
            }
        }
        if i < rk.m && rk.needed(i) {
            let mut e = advance(&stage, &sd.rhs(&stage)?, h);
            e.t = q0.t;
            euler[i] = Some(e);
        }
    }
    stage.t = q0.t + tau;
    Ok(stage)
}

/// S' = S exp(-tau (T + c)); R' = R + b tau I + c tau S'; I' = (S + I + R) - S' - R'.
pub fn integral_scheme_step(sd: &SemiDiscrete, q: &State, tau: f64) -> Result<State> {
    check_tau(tau)?;
    let p = *sd.params();
    if tau > 1.0 / p.b {
        return Err(Error::Precondition(format!(
            "integral scheme needs tau <= 1/b = {}, got {tau}",
            1.0 / p.b
        )));
    }
    let t = sd.t_field(&q.i)?;
    let g = q.grid();
    let n = g.len();
    let (mut s1, mut i1, mut r1) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for k in 0..n {
        let (s, i, r) = (q.s.values[k], q.i.values[k], q.r.values[k]);
        s1[k] = s * (-tau * (t.values[k] + p.c)).exp();
        r1[k] = r + p.b * tau * i + p.c * tau * s1[k];
        i1[k] = (s + i + r) - s1[k] - r1[k];
    }
    Ok(State {
        s: Field {
            grid: g,
            values: s1,
        },
        i: Field {
            grid: g,
            values: i1,
        },
        r: Field {
            grid: g,
            values: r1,
        },
        t: q.t + tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubature::product_disk_rule;
    use crate::grid::Grid;
    use crate::interp::InterpMethod;
    use crate::model::Params;

    fn setup() -> (SemiDiscrete, State) {
        let g = Grid::over(1.0, 1.0, 11, 11).unwrap();
        let sd = SemiDiscrete::new(
            g,
            Params::default(),
            product_disk_rule(4, 0.05).unwrap(),
            InterpMethod::Bilinear,
        )
        .unwrap();
        let q = State::new(
            Field::constant(g, 20.0),
            Field::from_fn(g, |x, y| {
                15.0 * (-((x - 0.5).powi(2) + (y - 0.5).powi(2)) / 0.02).exp()
            }),
            Field::from_fn(g, |x, _| x),
            0.0,
        )
        .unwrap();
        (sd, q)
    }

    #[test]
    fn grammar() {
        for name in ["fe", "ssprk22", "ssprk33", "ssprk104", "integral"] {
            assert_eq!(name.parse::<Stepper>().unwrap().name(), name);
        }
        assert!(matches!(
            "rk4".parse::<Stepper>(),
            Err(Error::UnknownMethod(_))
        ));
    }

    #[test]
    fn fe_tableau_reproduces_euler_bitwise() {
        let (sd, q) = setup();
        let a = euler_step(&sd, &q, 0.37).unwrap();
        let b = ssp_rk_step(&sd, &q, 0.37, &RkMethod::forward_euler()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn linear_decay_without_infection() {
        let (sd, mut q) = setup();
        q.i = Field::zeros(q.grid());
        let e = euler_step(&sd, &q, 0.5).unwrap();
        for &v in &e.s.values {
            assert!((v - (1.0 - 0.01 * 0.5) * 20.0).abs() < 1e-13);
        }
        let tau = 2.0;
        let err = |tau: f64| {
            (ssp_rk_step(&sd, &q, tau, &RkMethod::ssprk22())
                .unwrap()
                .s
                .values[0]
                - (-0.01 * tau).exp() * 20.0)
                .abs()
        };
        let ratio = err(tau) / err(tau / 2.0);
        assert!((ratio - 8.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn integral_scheme_basics() {
        let (_, q) = setup();
        let g = q.grid();
        let p = Params {
            c: 0.0,
            ..Params::default()
        };
        let sd = SemiDiscrete::new(
            g,
            p,
            product_disk_rule(4, 0.05).unwrap(),
            InterpMethod::Bilinear,
        )
        .unwrap();
        let mut q0 = q.clone();
        q0.i = Field::zeros(g);
        let n = integral_scheme_step(&sd, &q0, 1.0).unwrap();
        assert_eq!(n.s, q0.s);
        assert!(integral_scheme_step(&sd, &q, 10.5).is_err());
        let n = integral_scheme_step(&sd, &q, 3.0).unwrap();
        for (a, b) in n.total().iter().zip(q.total()) {
            assert!((a - b).abs() <= 1e-14 * b);
        }
    }

    #[test]
    fn invalid_tau_rejected() {
        let (sd, q) = setup();
        assert!(euler_step(&sd, &q, 0.0).is_err());
        assert!(ssp_rk_step(&sd, &q, -1.0, &RkMethod::ssprk33()).is_err());
    }
}
