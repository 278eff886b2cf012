//! Checks of the discrete properties between consecutive time levels:
//! D1 nonnegativity, D2 pointwise conservation of S + I + R,
//! D3 S non-increasing, D4 R non-decreasing.

use std::fmt;
use std::io::Write;

use crate::error::{invalid, Error, Result};
use crate::fmt::g17;
use crate::integrators::Observer;
use crate::model::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Species {
    S,
    I,
    R,
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Species::S => "S",
            Species::I => "I",
            Species::R => "R",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub species: Species,
    pub k: usize,
    pub l: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub neg: f64,
    pub cons: f64,
}

impl Tolerances {
    /// `neg = 1e-12 * max(S + I + R)`, `cons = 1e-12`.
    pub fn for_state(q: &State) -> Self {
        let m = q.total().into_iter().fold(0.0, f64::max);
        Self {
            neg: 1e-12 * m,
            cons: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub step: usize,
    pub d1_ok: bool,
    pub d2_ok: bool,
    pub d3_ok: bool,
    pub d4_ok: bool,
    /// Smallest entry of S, I, R at the new level, capped at 0.
    pub worst_negative: f64,
    /// `max |delta (S+I+R)| / max (S+I+R)_prev`.
    pub conservation_drift: f64,
    /// Largest increase of S (0 if none).
    pub monotonicity_violation_s: f64,
    /// Largest decrease of R (0 if none).
    pub monotonicity_violation_r: f64,
    /// Worst offender of the first failing property, if any.
    pub location: Option<Location>,
}

impl PropertyReport {
    pub fn all_ok(&self) -> bool {
        self.d1_ok && self.d2_ok && self.d3_ok && self.d4_ok
    }

    pub const CSV_HEADER: &'static str = "step,d1,d2,d3,d4,worst_negative,conservation_drift";

    pub fn csv_line(&self) -> String {
        let b = |x: bool| if x { "1" } else { "0" };
        format!(
            "{},{},{},{},{},{},{}",
            self.step,
            b(self.d1_ok),
            b(self.d2_ok),
            b(self.d3_ok),
            b(self.d4_ok),
            g17(self.worst_negative),
            g17(self.conservation_drift)
        )
    }

    pub fn describe(&self) -> String {
        let mut failed = Vec::new();
        for (ok, name) in [
            (self.d1_ok, "D1"),
            (self.d2_ok, "D2"),
            (self.d3_ok, "D3"),
            (self.d4_ok, "D4"),
        ] {
            if !ok {
                failed.push(name);
            }
        }
        let at = self
            .location
            .map(|l| format!(" at {}({},{})", l.species, l.k, l.l))
            .unwrap_or_default();
        format!(
            "{} failed{at}; worst_negative={:e} drift={:e} dS+={:e} dR-={:e}",
            failed.join(","),
            self.worst_negative,
            self.conservation_drift,
            self.monotonicity_violation_s,
            self.monotonicity_violation_r
        )
    }
}

pub fn check_step(
    prev: &State,
    next: &State,
    tol_neg: f64,
    tol_cons: f64,
) -> Result<PropertyReport> {
    if prev.grid() != next.grid() {
        return Err(invalid("states live on different grids"));
    }
    let g = prev.grid();
    let loc = |species, n: usize| Location {
        species,
        k: n / g.p2,
        l: n % g.p2,
    };

    let mut min_val = f64::INFINITY;
    let mut min_at = loc(Species::S, 0);
    for (sp, f) in [
        (Species::S, &next.s),
        (Species::I, &next.i),
        (Species::R, &next.r),
    ] {
        for (n, &v) in f.values.iter().enumerate() {
            if v < min_val {
                min_val = v;
                min_at = loc(sp, n);
            }
        }
    }

    let (mut drift, mut drift_at, mut scale) = (0.0f64, 0, 0.0f64);
    let (mut ds_max, mut ds_at) = (f64::NEG_INFINITY, 0);
    let (mut dr_min, mut dr_at) = (f64::INFINITY, 0);
    for n in 0..g.len() {
        let before = prev.s.values[n] + prev.i.values[n] + prev.r.values[n];
        let after = next.s.values[n] + next.i.values[n] + next.r.values[n];
        scale = scale.max(before.abs());
        let d = (after - before).abs();
        if d > drift {
            drift = d;
            drift_at = n;
        }
        let ds = next.s.values[n] - prev.s.values[n];
        if ds > ds_max {
            ds_max = ds;
            ds_at = n;
        }
        let dr = next.r.values[n] - prev.r.values[n];
        if dr < dr_min {
            dr_min = dr;
            dr_at = n;
        }
    }
    let drift_rel = if scale > 0.0 { drift / scale } else { drift };

    let d1_ok = min_val >= -tol_neg;
    let d2_ok = drift_rel <= tol_cons;
    let d3_ok = ds_max <= tol_neg;
    let d4_ok = dr_min >= -tol_neg;
    let location = if !d1_ok {
        Some(min_at)
    } else if !d2_ok {
        Some(loc(Species::S, drift_at))
    } else if !d3_ok {
        Some(loc(Species::S, ds_at))
    } else if !d4_ok {
        Some(loc(Species::R, dr_at))
    } else {
        None
    };
    Ok(PropertyReport {
        step: 0,
        d1_ok,
        d2_ok,
        d3_ok,
        d4_ok,
        worst_negative: min_val.min(0.0),
        conservation_drift: drift_rel,
        monotonicity_violation_s: ds_max.max(0.0),
        monotonicity_violation_r: (-dr_min).max(0.0),
        location,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnViolation {
    Abort,
    Record,
}

/// Observer running [`check_step`] after every step.
pub struct PropertyMonitor<'w> {
    pub tol: Tolerances,
    pub mode: OnViolation,
    pub reports: Vec<PropertyReport>,
    pub keep_passing: bool,
    sink: Option<&'w mut dyn Write>,
}

impl<'w> PropertyMonitor<'w> {
    pub fn new(tol: Tolerances, mode: OnViolation) -> Self {
        Self {
            tol,
            mode,
            reports: Vec::new(),
            keep_passing: false,
            sink: None,
        }
    }

    /// Writes the CSV header now and one line per step afterwards.
    pub fn with_csv(mut self, sink: &'w mut dyn Write) -> Result<Self> {
        writeln!(sink, "{}", PropertyReport::CSV_HEADER)?;
        self.sink = Some(sink);
        Ok(self)
    }

    pub fn violations(&self) -> impl Iterator<Item = &PropertyReport> {
        self.reports.iter().filter(|r| !r.all_ok())
    }

    pub fn first_violation(&self) -> Option<&PropertyReport> {
        self.violations().next()
    }
}

impl Observer for PropertyMonitor<'_> {
    fn observe(&mut self, step: usize, prev: &State, next: &State) -> Result<()> {
        let mut rep = check_step(prev, next, self.tol.neg, self.tol.cons)?;
        rep.step = step;
        if let Some(w) = self.sink.as_mut() {
            writeln!(w, "{}", rep.csv_line())?;
        }
        let ok = rep.all_ok();
        let detail = (!ok).then(|| rep.describe());
        if !ok || self.keep_passing {
            self.reports.push(rep);
        }
        match (detail, self.mode) {
            (Some(detail), OnViolation::Abort) => Err(Error::PropertyViolation { step, detail }),
            _ => Ok(()),
        }
    }
}
