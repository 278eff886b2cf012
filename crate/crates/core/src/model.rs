//! Kernel, nonlocal infection operator and semi-discrete right-hand side.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cubature::CubatureRule;
use crate::error::{invalid, Result};
use crate::grid::{Field, Grid};
use crate::interp::{InterpMethod, Interpolant};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            a: 100.0,
            b: 0.1,
            c: 0.01,
            delta: 0.05,
            alpha: 0.0,
            beta: 1.0,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        let ok =
            self.a > 0.0 && self.b > 0.0 && self.c >= 0.0 && self.delta > 0.0 && self.beta >= 0.0;
        let finite = [self.a, self.b, self.c, self.delta, self.alpha, self.beta]
            .iter()
            .all(|v| v.is_finite());
        if !(ok && finite) {
            return Err(invalid(format!(
                "need a,b,delta > 0 and c,beta >= 0: {self:?}"
            )));
        }
        Ok(())
    }
}

/// G(r, theta) = g1(r) g2(theta) with g1 = a (delta - r)_+ and
/// g2 = beta sin(theta + alpha) + beta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    pub params: Params,
}

impl Kernel {
    pub fn new(params: Params) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn g1(&self, r: f64) -> Result<f64> {
        if r < 0.0 || r.is_nan() {
            return Err(invalid(format!("radius must be nonnegative, got {r}")));
        }
        Ok(self.radial(r))
    }

    #[inline]
    pub(crate) fn radial(&self, r: f64) -> f64 {
        let p = &self.params;
        if r < p.delta {
            p.a * (p.delta - r)
        } else {
            0.0
        }
    }

    pub fn g2(&self, theta: f64) -> f64 {
        let p = &self.params;
        let th = theta.rem_euclid(std::f64::consts::TAU);
        p.beta * (th + p.alpha).sin() + p.beta
    }

    pub fn kappa1(&self) -> f64 {
        self.params.a * self.params.delta
    }

    pub fn kappa2(&self) -> f64 {
        2.0 * self.params.beta
    }

    /// Per-point products `weight * g1(r) * g2(theta)`.
    pub fn weighted(&self, rule: &CubatureRule) -> Vec<f64> {
        rule.points
            .iter()
            .map(|p| p.weight * self.radial(p.r) * self.g2(p.theta))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub s: Field,
    pub i: Field,
    pub r: Field,
    pub t: f64,
}

impl State {
    pub fn new(s: Field, i: Field, r: Field, t: f64) -> Result<Self> {
        s.same_grid(&i)?;
        s.same_grid(&r)?;
        Ok(Self { s, i, r, t })
    }

    pub fn grid(&self) -> Grid {
        self.s.grid
    }

    pub fn fields(&self) -> [&Field; 3] {
        [&self.s, &self.i, &self.r]
    }

    pub fn fields_mut(&mut self) -> [&mut Field; 3] {
        [&mut self.s, &mut self.i, &mut self.r]
    }

    pub fn total(&self) -> Vec<f64> {
        (0..self.s.values.len())
            .map(|n| self.s.values[n] + self.i.values[n] + self.r.values[n])
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.fields().iter().all(|f| f.is_finite())
    }
}

#[derive(Debug, Clone)]
enum Assembly {
    /// Bilinear: T = K (correlation) I, with I zero outside the grid.
    Correlation {
        ox: isize,
        oy: isize,
        nx: usize,
        ny: usize,
        k: Vec<f64>,
    },
    /// Per-point interpolation at `x_k + dx_m, y_l + dy_m`.
    Pointwise {
        offsets: Vec<(f64, f64)>,
        w: Vec<f64>,
    },
}

/// Discretized nonlocal operator `I -> T` for one grid, rule, kernel and method.
#[derive(Debug, Clone)]
pub struct NonlocalOperator {
    grid: Grid,
    method: InterpMethod,
    assembly: Assembly,
}

impl NonlocalOperator {
    pub fn new(
        grid: Grid,
        kernel: &Kernel,
        rule: &CubatureRule,
        method: InterpMethod,
    ) -> Result<Self> {
        if (rule.delta - kernel.params.delta).abs() > 1e-14 * kernel.params.delta {
            return Err(invalid(format!(
                "rule radius {} differs from kernel radius {}",
                rule.delta, kernel.params.delta
            )));
        }
        let w = kernel.weighted(rule);
        let assembly = match method {
            InterpMethod::Bilinear => correlation_kernel(&grid, rule, &w),
            _ => Assembly::Pointwise {
                offsets: rule.points.iter().map(|p| (p.dx, p.dy)).collect(),
                w,
            },
        };
        Ok(Self {
            grid,
            method,
            assembly,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn method(&self) -> InterpMethod {
        self.method
    }

    pub fn apply(&self, i: &Field) -> Result<Field> {
        if i.grid != self.grid {
            return Err(invalid("field grid differs from operator grid"));
        }
        let mut out = Field::zeros(self.grid);
        self.apply_into(i, &mut out.values);
        Ok(out)
    }

    pub(crate) fn apply_into(&self, i: &Field, out: &mut [f64]) {
        let g = self.grid;
        let (p1, p2) = (g.p1 as isize, g.p2 as isize);
        match &self.assembly {
            Assembly::Correlation { ox, oy, nx, ny, k } => {
                let iv = &i.values;
                for kk in 0..p1 {
                    let a0 = (-ox - kk).max(0) as usize;
                    let a1 = ((p1 - 1 - kk - ox + 1).min(*nx as isize)).max(0) as usize;
                    for ll in 0..p2 {
                        let b0 = (-oy - ll).max(0) as usize;
                        let b1 = ((p2 - 1 - ll - oy + 1).min(*ny as isize)).max(0) as usize;
                        let mut acc = 0.0;
                        for a in a0..a1 {
                            let base = (kk + ox + a as isize) * p2 + ll + oy;
                            let krow = &k[a * ny..(a + 1) * ny];
                            for b in b0..b1 {
                                acc += krow[b] * iv[(base + b as isize) as usize];
                            }
                        }
                        out[(kk * p2 + ll) as usize] = acc;
                    }
                }
            }
            Assembly::Pointwise { offsets, w } => {
                let it = Interpolant::new(i, self.method);
                out.par_chunks_mut(g.p2).enumerate().for_each(|(kk, row)| {
                    let x = g.x(kk);
                    for (ll, slot) in row.iter_mut().enumerate() {
                        let y = g.y(ll);
                        let mut acc = 0.0;
                        for (m, &(dx, dy)) in offsets.iter().enumerate() {
                            acc += w[m] * it.eval(x + dx, y + dy);
                        }
                        *slot = acc;
                    }
                });
            }
        }
    }
}

fn correlation_kernel(grid: &Grid, rule: &CubatureRule, w: &[f64]) -> Assembly {
    let cells = |d: f64, h: f64| (d / h).ceil() as isize + 1;
    let (rx, ry) = (cells(rule.delta, grid.h1), cells(rule.delta, grid.h2));
    let (ox, oy) = (-rx, -ry);
    let (nx, ny) = ((2 * rx + 1) as usize, (2 * ry + 1) as usize);
    let mut k = vec![0.0; nx * ny];
    for (p, &wm) in rule.points.iter().zip(w) {
        if wm == 0.0 {
            continue;
        }
        let u = p.dx / grid.h1;
        let v = p.dy / grid.h2;
        let sx = u.ceil() - 1.0;
        let sy = v.ceil() - 1.0;
        let (tx, ty) = (u - sx, v - sy);
        let a = (sx as isize - ox) as usize;
        let b = (sy as isize - oy) as usize;
        k[a * ny + b] += wm * (1.0 - tx) * (1.0 - ty);
        k[a * ny + b + 1] += wm * (1.0 - tx) * ty;
        k[(a + 1) * ny + b] += wm * tx * (1.0 - ty);
        k[(a + 1) * ny + b + 1] += wm * tx * ty;
    }
    Assembly::Correlation { ox, oy, nx, ny, k }
}

/// `T_kl = sum_m w_m g1(r_m) g2(theta_m) I~(x_k + dx_m, y_l + dy_m)`.
pub fn assemble_t(
    i_field: &Field,
    kernel: &Kernel,
    rule: &CubatureRule,
    method: InterpMethod,
) -> Result<Field> {
    NonlocalOperator::new(i_field.grid, kernel, rule, method)?.apply(i_field)
}

/// Semi-discrete system `Q' = F(Q)` with a cached nonlocal operator.
#[derive(Debug, Clone)]
pub struct SemiDiscrete {
    pub kernel: Kernel,
    pub rule: CubatureRule,
    pub op: NonlocalOperator,
}

/// Time derivatives of the three species.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    pub ds: Field,
    pub di: Field,
    pub dr: Field,
}

impl SemiDiscrete {
    pub fn new(
        grid: Grid,
        params: Params,
        rule: CubatureRule,
        method: InterpMethod,
    ) -> Result<Self> {
        let kernel = Kernel::new(params)?;
        let op = NonlocalOperator::new(grid, &kernel, &rule, method)?;
        Ok(Self { kernel, rule, op })
    }

    pub fn params(&self) -> &Params {
        &self.kernel.params
    }

    pub fn grid(&self) -> Grid {
        self.op.grid()
    }

    pub fn t_field(&self, i: &Field) -> Result<Field> {
        self.op.apply(i)
    }

    /// ds = -S T - c S, di = S T - b I, dr = b I + c S.
    pub fn rhs(&self, q: &State) -> Result<Rates> {
        let t = self.t_field(&q.i)?;
        Ok(self.rates_given_t(q, &t))
    }

    pub(crate) fn rates_given_t(&self, q: &State, t: &Field) -> Rates {
        let Params { b, c, .. } = *self.params();
        let g = q.grid();
        let n = g.len();
        let (mut ds, mut di, mut dr) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for k in 0..n {
            let s = q.s.values[k];
            let i = q.i.values[k];
            let st = s * t.values[k];
            ds[k] = -st - c * s;
            di[k] = st - b * i;
            dr[k] = b * i + c * s;
        }
        Rates {
            ds: Field {
                grid: g,
                values: ds,
            },
            di: Field {
                grid: g,
                values: di,
            },
            dr: Field {
                grid: g,
                values: dr,
            },
        }
    }
}

pub fn rhs(
    state: &State,
    kernel: &Kernel,
    rule: &CubatureRule,
    method: InterpMethod,
) -> Result<Rates> {
    let sd = SemiDiscrete::new(state.grid(), kernel.params, rule.clone(), method)?;
    sd.rhs(state)
}
