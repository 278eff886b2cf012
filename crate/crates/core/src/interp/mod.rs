//! Off-grid sampling of fields.
//!
//! Coordinates are physical; `u = x / h1`, `v = y / h2` are grid units.
//! Inside the grid a point belongs to cell `ceil(u) - 1` (clamped), so a
//! point on a shared edge goes to the lower-index cell. Outside, the value
//! fades linearly to zero over one cell, which is what a ring of zero ghost
//! nodes gives for bilinear interpolation; beyond that band it is 0.

mod monotone;
pub mod spline;

use crate::error::{invalid, Result};
use crate::grid::{Field, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterpMethod {
    Bilinear,
    CubicSpline,
    MonotoneCubic,
}

impl InterpMethod {
    pub fn positivity_preserving(self) -> bool {
        !matches!(self, InterpMethod::CubicSpline)
    }

    pub fn is_linear(self) -> bool {
        !matches!(self, InterpMethod::MonotoneCubic)
    }
}

impl std::str::FromStr for InterpMethod {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bilinear" | "linear" => Ok(Self::Bilinear),
            "spline" | "cubic-spline" | "cubic_spline" => Ok(Self::CubicSpline),
            "makima" | "monotone" | "monotone-cubic" | "monotone_cubic" => Ok(Self::MonotoneCubic),
            _ => Err(crate::Error::UnknownMethod(s.into())),
        }
    }
}

/// A field prepared for repeated sampling with one method.
#[derive(Debug, Clone)]
pub struct Interpolant {
    method: InterpMethod,
    grid: Grid,
    f: Vec<f64>,
    // Spline second derivatives: d2/dx2, d2/dy2, d4/dx2dy2.
    mxx: Vec<f64>,
    myy: Vec<f64>,
    mxxyy: Vec<f64>,
}

impl Interpolant {
    pub fn new(field: &Field, method: InterpMethod) -> Self {
        let grid = field.grid;
        let f = field.values.clone();
        let (mut mxx, mut myy, mut mxxyy) = (Vec::new(), Vec::new(), Vec::new());
        if method == InterpMethod::CubicSpline {
            mxx = along_x(&grid, &f);
            myy = along_y(&grid, &f);
            mxxyy = along_y(&grid, &mxx);
        }
        Self {
            method,
            grid,
            f,
            mxx,
            myy,
            mxxyy,
        }
    }

    pub fn method(&self) -> InterpMethod {
        self.method
    }

    pub fn sample(&self, x: f64, y: f64) -> Result<f64> {
        if x.is_nan() || y.is_nan() {
            return Err(invalid("NaN sample coordinate"));
        }
        Ok(self.eval(x, y))
    }

    /// Like [`Interpolant::sample`] but without the NaN check.
    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let g = &self.grid;
        let u = x / g.h1;
        let v = y / g.h2;
        let (iu, tu, lu) = locate(u, g.p1);
        if lu <= 0.0 {
            return 0.0;
        }
        let (iv, tv, lv) = locate(v, g.p2);
        if lv <= 0.0 {
            return 0.0;
        }
        let inner = match self.method {
            InterpMethod::Bilinear => self.bilinear(iu, tu, iv, tv),
            InterpMethod::CubicSpline => self.spline(iu, tu, iv, tv),
            InterpMethod::MonotoneCubic => self.monotone(iu, tu, iv, tv),
        };
        if lu == 1.0 && lv == 1.0 {
            inner
        } else {
            lu * lv * inner
        }
    }

    #[inline]
    fn bilinear(&self, i: usize, tx: f64, j: usize, ty: f64) -> f64 {
        let p2 = self.grid.p2;
        let f = &self.f;
        let a = i * p2 + j;
        let b = a + p2;
        (1.0 - tx) * ((1.0 - ty) * f[a] + ty * f[a + 1]) + tx * ((1.0 - ty) * f[b] + ty * f[b + 1])
    }

    fn spline(&self, i: usize, tx: f64, j: usize, ty: f64) -> f64 {
        let g = &self.grid;
        let bx = spline::basis(tx, g.h1);
        let by = spline::basis(ty, g.h2);
        let mut acc = 0.0;
        for (ci, k) in [i, i + 1].into_iter().enumerate() {
            for (cj, l) in [j, j + 1].into_iter().enumerate() {
                let n = k * g.p2 + l;
                let (ax, cx) = (bx[ci], bx[ci + 2]);
                let (ay, cy) = (by[cj], by[cj + 2]);
                acc += ax * ay * self.f[n]
                    + cx * ay * self.mxx[n]
                    + ax * cy * self.myy[n]
                    + cx * cy * self.mxxyy[n];
            }
        }
        acc
    }

    fn monotone(&self, i: usize, tx: f64, j: usize, ty: f64) -> f64 {
        let g = &self.grid;
        let k0 = i.saturating_sub(2);
        let k1 = (i + 3).min(g.p1 - 1);
        let l0 = j.saturating_sub(2);
        let l1 = (j + 3).min(g.p2 - 1);
        let mut col = [0.0; 6];
        let mut row = [0.0; 6];
        for (s, l) in (l0..=l1).enumerate() {
            for (q, k) in (k0..=k1).enumerate() {
                col[q] = self.f[k * g.p2 + l];
            }
            row[s] = monotone::eval(&col[..=k1 - k0], i - k0, tx);
        }
        monotone::eval(&row[..=l1 - l0], j - l0, ty)
    }
}

/// Cell index, local coordinate and fade factor for grid coordinate `u`.
#[inline]
fn locate(u: f64, p: usize) -> (usize, f64, f64) {
    let last = (p - 1) as f64;
    let (uc, fade) = if u < 0.0 {
        (0.0, 1.0 + u)
    } else if u > last {
        (last, 1.0 - (u - last))
    } else {
        (u, 1.0)
    };
    let i = (uc.ceil() - 1.0).clamp(0.0, (p - 2) as f64) as usize;
    (i, uc - i as f64, fade)
}

fn along_x(g: &Grid, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    let mut line = vec![0.0; g.p1];
    for l in 0..g.p2 {
        for k in 0..g.p1 {
            line[k] = f[k * g.p2 + l];
        }
        for (k, m) in spline::second_derivatives(&line, g.h1)
            .into_iter()
            .enumerate()
        {
            out[k * g.p2 + l] = m;
        }
    }
    out
}

fn along_y(g: &Grid, f: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    for k in 0..g.p1 {
        out.extend(spline::second_derivatives(
            &f[k * g.p2..(k + 1) * g.p2],
            g.h2,
        ));
    }
    out
}

pub fn sample(field: &Field, method: InterpMethod, x: f64, y: f64) -> Result<f64> {
    Interpolant::new(field, method).sample(x, y)
}

pub fn sample_many(field: &Field, method: InterpMethod, points: &[(f64, f64)]) -> Result<Vec<f64>> {
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let it = Interpolant::new(field, method);
    points.iter().map(|&(x, y)| it.sample(x, y)).collect()
}

/// Bilinear stencil at an interior point: up to four `(flat index, weight)`
/// pairs with nonnegative weights summing to 1. `None` outside the grid.
pub fn bilinear_stencil(grid: &Grid, x: f64, y: f64) -> Option<[(usize, f64); 4]> {
    let (i, tx, lx) = locate(x / grid.h1, grid.p1);
    let (j, ty, ly) = locate(y / grid.h2, grid.p2);
    if lx != 1.0 || ly != 1.0 {
        return None;
    }
    let a = grid.index(i, j);
    let b = grid.index(i + 1, j);
    Some([
        (a, (1.0 - tx) * (1.0 - ty)),
        (a + 1, (1.0 - tx) * ty),
        (b, tx * (1.0 - ty)),
        (b + 1, tx * ty),
    ])
}
