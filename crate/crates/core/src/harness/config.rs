//! Experiment configuration, read from TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cubature::{CubatureRule, RuleKind};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::integrators::{improved_bound, Stepper, TauPolicy};
use crate::interp::InterpMethod;
use crate::model::{Params, SemiDiscrete, State};
use crate::properties::{OnViolation, Tolerances};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub p1: usize,
    pub p2: usize,
    pub l1: f64,
    pub l2: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            p1: 20,
            p2: 20,
            l1: 1.0,
            l2: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RuleSpec {
    /// `product` or `elhay-kautsky`.
    pub kind: String,
    /// Radial node count; the angular count is twice this.
    pub n: usize,
}

impl Default for RuleSpec {
    fn default() -> Self {
        Self {
            kind: "product".into(),
            n: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TauSpec {
    /// `improved` (factor * C * improved bound), `fixed` (uses `value`) or `adaptive`.
    pub policy: String,
    pub value: Option<f64>,
    pub factor: f64,
}

impl Default for TauSpec {
    fn default() -> Self {
        Self {
            policy: "improved".into(),
            value: None,
            factor: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSpec {
    pub s0: f64,
    /// Defaults to min(l1, l2) / 10.
    pub sigma: Option<f64>,
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self {
            s0: 20.0,
            sigma: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    /// Snapshot times; each is written at the first step reaching it.
    pub snapshots: Vec<f64>,
    pub final_snapshot: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            snapshots: Vec::new(),
            final_snapshot: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropertySpec {
    pub enabled: bool,
    /// `abort` or `record`.
    pub on_violation: String,
    pub tol_neg: Option<f64>,
    pub tol_cons: Option<f64>,
}

impl Default for PropertySpec {
    fn default() -> Self {
        Self {
            enabled: true,
            on_violation: "abort".into(),
            tol_neg: None,
            tol_cons: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsTableSpec {
    /// `a` or `delta`.
    pub sweep: String,
    pub values: Vec<f64>,
    pub rel_tol: f64,
    pub upper_factor: f64,
}

impl Default for BoundsTableSpec {
    fn default() -> Self {
        Self {
            sweep: "a".into(),
            values: vec![50.0, 100.0, 150.0, 200.0],
            rel_tol: 1e-3,
            upper_factor: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceSpec {
    pub steppers: Vec<String>,
    pub tau0: f64,
    pub rows: usize,
}

impl Default for ConvergenceSpec {
    fn default() -> Self {
        Self {
            steppers: vec![
                "fe".into(),
                "ssprk22".into(),
                "ssprk33".into(),
                "ssprk104".into(),
            ],
            tau0: 0.429,
            rows: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CubatureTestSpec {
    pub kinds: Vec<String>,
    pub n: Vec<usize>,
    pub delta: Vec<f64>,
    pub sigma: f64,
}

impl Default for CubatureTestSpec {
    fn default() -> Self {
        Self {
            kinds: vec!["product".into(), "elhay-kautsky".into()],
            n: vec![5, 10, 13, 15, 20],
            delta: vec![0.1, 0.05, 0.025, 0.0125],
            sigma: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckSpec {
    /// Randomized states per stepper.
    pub states: usize,
    /// Also run the configured trajectory with property checks.
    pub trajectory: bool,
}

impl Default for CheckSpec {
    fn default() -> Self {
        Self {
            states: 100,
            trajectory: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub params: Params,
    pub grid: GridSpec,
    pub rule: RuleSpec,
    pub interp: String,
    pub stepper: String,
    pub tau: TauSpec,
    pub t_final: f64,
    pub initial: InitialSpec,
    pub output: OutputSpec,
    pub properties: PropertySpec,
    pub seed: u64,
    pub bounds_table: BoundsTableSpec,
    pub convergence: ConvergenceSpec,
    pub cubature_test: CubatureTestSpec,
    pub check: CheckSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            params: Params::default(),
            grid: GridSpec::default(),
            rule: RuleSpec::default(),
            interp: "bilinear".into(),
            stepper: "ssprk104".into(),
            tau: TauSpec::default(),
            t_final: 80.0,
            initial: InitialSpec::default(),
            output: OutputSpec::default(),
            properties: PropertySpec::default(),
            seed: 0,
            bounds_table: BoundsTableSpec::default(),
            convergence: ConvergenceSpec::default(),
            cubature_test: CubatureTestSpec::default(),
            check: CheckSpec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Resolves every named spec and checks numeric ranges.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.make_grid()?;
        self.make_rule()?;
        self.interp_method()?;
        self.make_stepper()?;
        self.tau_policy_kind()?;
        self.on_violation()?;
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        if self.tau.policy == "fixed" && !self.tau.value.is_some_and(|v| v > 0.0) {
            return Err(Error::Config(
                "fixed tau policy needs a positive `value`".into(),
            ));
        }
        if !(self.tau.factor > 0.0) {
            return Err(Error::Config("tau factor must be positive".into()));
        }
        Ok(())
    }

    pub fn make_grid(&self) -> Result<Grid> {
        Grid::over(self.grid.l1, self.grid.l2, self.grid.p1, self.grid.p2)
    }

    pub fn rule_kind(&self) -> Result<RuleKind> {
        self.rule.kind.parse()
    }

    pub fn make_rule(&self) -> Result<CubatureRule> {
        CubatureRule::new(self.rule_kind()?, self.rule.n, self.params.delta)
    }

    pub fn interp_method(&self) -> Result<InterpMethod> {
        self.interp.parse()
    }

    pub fn make_stepper(&self) -> Result<Stepper> {
        self.stepper.parse()
    }

    pub fn semi_discrete(&self) -> Result<SemiDiscrete> {
        SemiDiscrete::new(
            self.make_grid()?,
            self.params,
            self.make_rule()?,
            self.interp_method()?,
        )
    }

    pub fn sigma(&self) -> f64 {
        self.initial
            .sigma
            .unwrap_or(self.grid.l1.min(self.grid.l2) / 10.0)
    }

    fn tau_policy_kind(&self) -> Result<&str> {
        match self.tau.policy.as_str() {
            p @ ("improved" | "fixed" | "adaptive") => Ok(p),
            other => Err(Error::Config(format!("unknown tau policy `{other}`"))),
        }
    }

    /// Resolves the step-size policy against the initial state.
    pub fn tau_policy(&self, sd: &SemiDiscrete, initial: &State) -> Result<TauPolicy> {
        let stepper = self.make_stepper()?;
        match self.tau_policy_kind()? {
            "fixed" => Ok(TauPolicy::Fixed(self.tau.value.expect("validated"))),
            "adaptive" => Ok(TauPolicy::Adaptive),
            _ => {
                let b = improved_bound(initial, sd, stepper.ssp_c())?;
                Ok(TauPolicy::Fixed(self.tau.factor * b.rk_scaled))
            }
        }
    }

    pub fn on_violation(&self) -> Result<OnViolation> {
        match self.properties.on_violation.as_str() {
            "abort" => Ok(OnViolation::Abort),
            "record" => Ok(OnViolation::Record),
            other => Err(Error::Config(format!("unknown on_violation `{other}`"))),
        }
    }

    pub fn tolerances(&self, initial: &State) -> Tolerances {
        let d = Tolerances::for_state(initial);
        Tolerances {
            neg: self.properties.tol_neg.unwrap_or(d.neg),
            cons: self.properties.tol_cons.unwrap_or(d.cons),
        }
    }
}

/// S = s0, R = 0, I a unit-mass Gaussian of width sigma at the domain center.
pub fn initial_state(cfg: &ExperimentConfig) -> Result<State> {
    let g = cfg.make_grid()?;
    let sigma = cfg.sigma();
    let (cx, cy) = (g.l1() / 2.0, g.l2() / 2.0);
    let amp = 1.0 / (2.0 * std::f64::consts::PI * sigma * sigma);
    let i = Field::from_fn(g, |x, y| {
        let (u, v) = ((x - cx) / sigma, (y - cy) / sigma);
        amp * (-(u * u + v * v) / 2.0).exp()
    });
    State::new(Field::constant(g, cfg.initial.s0), i, Field::zeros(g), 0.0)
}

/// Named configurations of the published experiments.
pub mod presets {
    use super::*;

    /// Bound tables: 20x20 grid, b = c = 0.01, bilinear, 20-node product rule, FE.
    pub fn bounds(a: f64, delta: f64) -> ExperimentConfig {
        ExperimentConfig {
            params: Params {
                a,
                b: 0.01,
                c: 0.01,
                delta,
                ..Params::default()
            },
            rule: RuleSpec {
                kind: "product".into(),
                n: 20,
            },
            stepper: "fe".into(),
            ..ExperimentConfig::default()
        }
    }

    pub fn a_sweep() -> ExperimentConfig {
        let mut c = bounds(100.0, 0.05);
        c.bounds_table = BoundsTableSpec {
            sweep: "a".into(),
            values: vec![50.0, 100.0, 150.0, 200.0],
            ..Default::default()
        };
        c
    }

    pub fn delta_sweep() -> ExperimentConfig {
        let mut c = bounds(100.0, 0.05);
        c.bounds_table = BoundsTableSpec {
            sweep: "delta".into(),
            values: vec![0.05, 0.075, 0.1, 0.25, 0.5],
            ..Default::default()
        };
        c
    }

    /// Convergence table: 20x20 grid, bilinear, 10-node product rule, b = 0.01.
    pub fn ladder() -> ExperimentConfig {
        ExperimentConfig {
            params: Params {
                a: 100.0,
                b: 0.01,
                c: 0.01,
                delta: 0.05,
                ..Params::default()
            },
            rule: RuleSpec {
                kind: "product".into(),
                n: 10,
            },
            ..ExperimentConfig::default()
        }
    }

    /// Negative-S demonstration: a = 200, delta = 0.1, 40x40 grid, FE.
    pub fn overshoot() -> ExperimentConfig {
        ExperimentConfig {
            params: Params {
                a: 200.0,
                b: 0.01,
                c: 0.01,
                delta: 0.1,
                ..Params::default()
            },
            grid: GridSpec {
                p1: 40,
                p2: 40,
                ..GridSpec::default()
            },
            rule: RuleSpec {
                kind: "product".into(),
                n: 20,
            },
            stepper: "fe".into(),
            ..ExperimentConfig::default()
        }
    }

    /// Long-time decay: defaults with spline, 30x30 grid, 15-node rule, SSPRK104.
    pub fn decay() -> ExperimentConfig {
        ExperimentConfig {
            grid: GridSpec {
                p1: 30,
                p2: 30,
                ..GridSpec::default()
            },
            rule: RuleSpec {
                kind: "product".into(),
                n: 15,
            },
            interp: "spline".into(),
            stepper: "ssprk104".into(),
            ..ExperimentConfig::default()
        }
    }

    pub fn by_name(name: &str) -> Result<ExperimentConfig> {
        match name {
            "defaults" => Ok(ExperimentConfig::default()),
            "a-sweep" => Ok(a_sweep()),
            "delta-sweep" => Ok(delta_sweep()),
            "ladder" => Ok(ladder()),
            "overshoot" => Ok(overshoot()),
            "decay" => Ok(decay()),
            other => Err(Error::Config(format!("unknown preset `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let c = presets::overshoot();
        let back = ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_file_uses_defaults() {
        let c = ExperimentConfig::from_toml_str("stepper = \"fe\"\n[params]\na = 50.0\n").unwrap();
        assert_eq!(c.params.a, 50.0);
        assert_eq!(c.params.b, 0.1);
        assert_eq!(c.grid.p1, 20);
    }

    #[test]
    fn unresolvable_specs_rejected() {
        for bad in [
            "stepper = \"rk4\"",
            "interp = \"nearest\"",
            "t_final = 0.0",
            "[tau]\npolicy = \"fixed\"",
            "[rule]\nkind = \"hex\"",
            "bogus = 1",
        ] {
            assert!(ExperimentConfig::from_toml_str(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn initial_state_values() {
        let c = ExperimentConfig {
            grid: GridSpec {
                p1: 21,
                p2: 21,
                l1: 1.0,
                l2: 1.0,
            },
            ..Default::default()
        };
        let q = initial_state(&c).unwrap();
        let peak = 1.0 / (2.0 * std::f64::consts::PI * 0.01);
        assert!((q.i.get(10, 10) - peak).abs() < 1e-12);
        assert!((peak - 15.9155).abs() < 1e-4);
        assert!(q.i.get(0, 0) <= (-25.0f64).exp() * peak);
        assert!(q.s.values.iter().all(|&v| v == 20.0));
        assert!(q.r.values.iter().all(|&v| v == 0.0));
    }
}
