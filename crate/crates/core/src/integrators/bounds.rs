//! Step-size bounds for the forward Euler scheme and its SSP multiples.

use crate::error::{invalid, Result};
use crate::grid::Field;
use crate::model::{Params, SemiDiscrete, State};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepBounds {
    /// `min{ min_kl 1/(T_kl + c), 1/b }` at the initial state.
    pub adaptive: f64,
    pub improved: f64,
    pub pessimistic: f64,
    /// `ssp_c * improved`.
    pub rk_scaled: f64,
    /// Constant-field sum `(sum_m w_m g1 g2) * m~`.
    pub t_tilde_value: f64,
}

pub fn adaptive_bound(t_field: &Field, params: &Params) -> f64 {
    let worst = t_field.values.iter().fold(0.0f64, |m, &t| m.max(t));
    (1.0 / (worst + params.c)).min(1.0 / params.b)
}

/// Bounds from the initial state, with `m~ = max(S + I + R)`.
pub fn improved_bound(initial: &State, sd: &SemiDiscrete, ssp_c: f64) -> Result<StepBounds> {
    let rule = &sd.rule;
    if rule.is_empty() {
        return Err(invalid("empty cubature rule"));
    }
    let p = sd.params();
    let m_tilde = initial
        .total()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let mass: f64 = sd.kernel.weighted(rule).iter().sum();
    let t_tilde = mass * m_tilde;
    let improved = (1.0 / (t_tilde + p.c)).min(1.0 / p.b);
    let kappa = sd.kernel.kappa1().max(sd.kernel.kappa2());
    let crude = rule.max_weight() * kappa * kappa * m_tilde * rule.len() as f64;
    let pessimistic = (1.0 / (crude + p.c)).min(1.0 / p.b);
    let t0 = sd.t_field(&initial.i)?;
    Ok(StepBounds {
        adaptive: adaptive_bound(&t0, p),
        improved,
        pessimistic,
        rk_scaled: ssp_c * improved,
        t_tilde_value: t_tilde,
    })
}
