//! Error norms, convergence tables, bound tables and the cubature study.

use rayon::prelude::*;

use super::config::{initial_state, ExperimentConfig};
use crate::cubature::{erf_test, CubatureRule, RuleKind};
use crate::error::{invalid, Error, Result};
use crate::grid::Field;
use crate::integrators::{improved_bound, simulate, Stepper, TauPolicy};
use crate::model::{SemiDiscrete, State};
use crate::properties::{OnViolation, PropertyMonitor, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
    Linf,
}

fn field_norm(a: &Field, b: &Field, p: Norm) -> f64 {
    let diffs = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs());
    let area = a.grid.cell_area();
    match p {
        Norm::L1 => area * diffs.sum::<f64>(),
        Norm::L2 => (area * diffs.map(|d| d * d).sum::<f64>()).sqrt(),
        Norm::Linf => diffs.fold(0.0, f64::max),
    }
}

/// Discrete norm of `state - reference`, summed over S, I and R.
pub fn error_norm(state: &State, reference: &State, p: Norm) -> Result<f64> {
    if state.grid() != reference.grid() {
        return Err(invalid("states live on different grids"));
    }
    Ok(state
        .fields()
        .iter()
        .zip(reference.fields())
        .map(|(a, b)| field_norm(a, b, p))
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub tau: f64,
    pub error: f64,
    /// `log2(e_prev / e)`; `None` on the first row or when undefined.
    pub order: Option<f64>,
}

/// `tau0 / 2^k` for `k = 0..rows`.
pub fn halving_ladder(tau0: f64, rows: usize) -> Vec<f64> {
    (0..rows).map(|k| tau0 / f64::powi(2.0, k as i32)).collect()
}

fn check_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.is_empty() || ladder.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(invalid("ladder needs positive step sizes"));
    }
    for w in ladder.windows(2) {
        if (w[0] / w[1] - 2.0).abs() > 1e-6 {
            return Err(invalid(format!("ladder must halve: {} -> {}", w[0], w[1])));
        }
    }
    Ok(())
}

/// Errors of `run(tau)` against `run(tau_min / 2)` in the L1 norm.
pub fn convergence_table_with<F>(ladder: &[f64], run: F) -> Result<Vec<ConvergenceRow>>
where
    F: Fn(f64) -> Result<State> + Sync,
{
    check_ladder(ladder)?;
    let tau_ref = ladder[ladder.len() - 1] / 2.0;
    let all: Vec<f64> = ladder
        .iter()
        .copied()
        .chain(std::iter::once(tau_ref))
        .collect();
    let runs: Vec<State> = all.par_iter().map(|&t| run(t)).collect::<Result<_>>()?;
    let reference = &runs[ladder.len()];
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(ladder.len());
    for (k, &tau) in ladder.iter().enumerate() {
        let error = error_norm(&runs[k], reference, Norm::L1)?;
        let order = rows.last().and_then(|prev| {
            (prev.error > 0.0 && error > 0.0).then(|| (prev.error / error).log2())
        });
        rows.push(ConvergenceRow { tau, error, order });
    }
    Ok(rows)
}

pub fn convergence_table(
    cfg: &ExperimentConfig,
    stepper: &Stepper,
    ladder: &[f64],
) -> Result<Vec<ConvergenceRow>> {
    let sd = cfg.semi_discrete()?;
    let q0 = initial_state(cfg)?;
    convergence_table_with(ladder, |tau| {
        Ok(simulate(
            &sd,
            &q0,
            cfg.t_final,
            stepper,
            TauPolicy::Fixed(tau),
            &mut [],
        )?
        .final_state)
    })
}

/// Whether a fixed-step run keeps D1–D4 at every step.
pub fn preserves_properties(
    sd: &SemiDiscrete,
    q0: &State,
    t_final: f64,
    stepper: &Stepper,
    tau: f64,
) -> Result<bool> {
    let mut mon = PropertyMonitor::new(Tolerances::for_state(q0), OnViolation::Abort);
    match simulate(
        sd,
        q0,
        t_final,
        stepper,
        TauPolicy::Fixed(tau),
        &mut [&mut mon],
    ) {
        Ok(_) => Ok(true),
        Err(Error::PropertyViolation { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Threshold {
    Found(f64),
    /// Violations already at the lower end.
    FailsAtLower,
    /// No violation up to the upper end.
    PassesAtUpper,
}

/// Largest forward-Euler step keeping D1–D4 up to `t_final`, bisected in
/// `[lo, hi]` to relative width `rel_tol`.
pub fn empirical_threshold(
    sd: &SemiDiscrete,
    q0: &State,
    t_final: f64,
    lo: f64,
    hi: f64,
    rel_tol: f64,
) -> Result<Threshold> {
    let fe = Stepper::Euler;
    if !preserves_properties(sd, q0, t_final, &fe, lo)? {
        return Ok(Threshold::FailsAtLower);
    }
    if preserves_properties(sd, q0, t_final, &fe, hi)? {
        return Ok(Threshold::PassesAtUpper);
    }
    let (mut a, mut b) = (lo, hi);
    while (b - a) > rel_tol * a {
        let mid = 0.5 * (a + b);
        if preserves_properties(sd, q0, t_final, &fe, mid)? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Threshold::Found(a))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsRow {
    pub param: f64,
    pub tau_tilde: f64,
    pub tau: f64,
    pub tau_e: Threshold,
}

impl BoundsRow {
    pub fn tau_e_value(&self) -> Option<f64> {
        match self.tau_e {
            Threshold::Found(t) => Some(t),
            _ => None,
        }
    }
}

/// Configuration for one row of a bound table sweep.
pub fn sweep_config(base: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
    let mut c = base.clone();
    match base.bounds_table.sweep.as_str() {
        "a" => c.params.a = value,
        "delta" => c.params.delta = value,
        other => return Err(Error::Config(format!("unknown sweep parameter `{other}`"))),
    }
    Ok(c)
}

pub fn bounds_row(cfg: &ExperimentConfig, param: f64, with_threshold: bool) -> Result<BoundsRow> {
    let sd = cfg.semi_discrete()?;
    let q0 = initial_state(cfg)?;
    let b = improved_bound(&q0, &sd, 1.0)?;
    let tau_e = if with_threshold {
        let spec = &cfg.bounds_table;
        empirical_threshold(
            &sd,
            &q0,
            cfg.t_final,
            b.improved,
            spec.upper_factor * b.improved,
            spec.rel_tol,
        )?
    } else {
        Threshold::PassesAtUpper
    };
    Ok(BoundsRow {
        param,
        tau_tilde: b.pessimistic,
        tau: b.improved,
        tau_e,
    })
}

/// Rows over `cfg.bounds_table.values`, evaluated in parallel.
pub fn bounds_table(cfg: &ExperimentConfig) -> Result<Vec<BoundsRow>> {
    cfg.bounds_table
        .values
        .par_iter()
        .map(|&v| bounds_row(&sweep_config(cfg, v)?, v, true))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubatureErrorRow {
    pub kind: RuleKind,
    pub n: usize,
    pub delta: f64,
    pub value: f64,
    pub error: f64,
}

/// Absolute errors of each rule on the closed-form erf test integral.
pub fn cubature_error_study(
    kind: RuleKind,
    ns: &[usize],
    deltas: &[f64],
    sigma: f64,
) -> Result<Vec<CubatureErrorRow>> {
    let mut rows = Vec::new();
    for &n in ns {
        for &delta in deltas {
            let rule = CubatureRule::new(kind, n, delta)?;
            let value = rule.integrate(erf_test::integrand(delta, sigma));
            let error = (value - erf_test::exact(delta, sigma)).abs();
            rows.push(CubatureErrorRow {
                kind,
                n,
                delta,
                value,
                error,
            });
        }
    }
    Ok(rows)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn state(g: Grid, v: f64) -> State {
        State::new(
            Field::constant(g, v),
            Field::constant(g, v),
            Field::constant(g, v),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn norms() {
        let g = Grid::new(3, 3, 0.5, 0.5).unwrap();
        let a = state(g, 1.0);
        assert_eq!(error_norm(&a, &a, Norm::L1).unwrap(), 0.0);
        let mut b = a.clone();
        b.i.set(1, 2, 1.25);
        assert_eq!(error_norm(&b, &a, Norm::Linf).unwrap(), 0.25);
        let g2 = Grid::new(3, 3, 1.0, 0.5).unwrap();
        let (a2, mut b2) = (state(g2, 1.0), state(g2, 1.0));
        b2.i.set(1, 2, 1.25);
        let ratio = error_norm(&b2, &a2, Norm::L1).unwrap() / error_norm(&b, &a, Norm::L1).unwrap();
        assert!((ratio - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exact_stub_gives_zero_errors_and_no_orders() {
        let g = Grid::new(2, 2, 1.0, 1.0).unwrap();
        let rows = convergence_table_with(&halving_ladder(0.4, 4), |_| Ok(state(g, 3.0))).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.error == 0.0 && r.order.is_none()));
    }

    #[test]
    fn first_order_stub_gives_order_one() {
        let g = Grid::new(2, 2, 1.0, 1.0).unwrap();
        let rows = convergence_table_with(&halving_ladder(0.4, 4), |t| {
            let mut s = state(g, 0.0);
            s.s.values[0] = if t < 0.04 { 0.0 } else { t };
            Ok(s)
        })
        .unwrap();
        for r in &rows[1..] {
            assert!((r.order.unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn non_halving_ladder_rejected() {
        let g = Grid::new(2, 2, 1.0, 1.0).unwrap();
        assert!(convergence_table_with(&[0.4, 0.3], |_| Ok(state(g, 0.0))).is_err());
        assert!(convergence_table_with(&[], |_| Ok(state(g, 0.0))).is_err());
    }

    #[test]
    fn cubature_error_shrinks_with_delta() {
        let rows = cubature_error_study(
            RuleKind::GaussLegendreProduct,
            &[3],
            &[0.2, 0.02, 0.002],
            0.1,
        )
        .unwrap();
        assert!(rows[0].error > rows[1].error && rows[1].error > rows[2].error);
    }

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 2.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(3)).collect();
        assert!((loglog_slope(&x, &y) - 3.0).abs() < 1e-12);
    }
}
