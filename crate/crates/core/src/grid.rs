//! Uniform grid on [0, L1] x [0, L2] and fields stored on it.

use std::io::{BufRead, Write};

use crate::error::{invalid, Error, Result};
use crate::fmt::g17;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub p1: usize,
    pub p2: usize,
    pub h1: f64,
    pub h2: f64,
}

impl Grid {
    pub fn new(p1: usize, p2: usize, h1: f64, h2: f64) -> Result<Self> {
        if p1 < 2 || p2 < 2 {
            return Err(invalid(format!(
                "grid needs at least 2 points per axis, got {p1}x{p2}"
            )));
        }
        if !(h1 > 0.0 && h2 > 0.0 && h1.is_finite() && h2.is_finite()) {
            return Err(invalid("grid spacings must be positive"));
        }
        Ok(Self { p1, p2, h1, h2 })
    }

    /// `p1 x p2` points spanning `[0, l1] x [0, l2]`.
    pub fn over(l1: f64, l2: f64, p1: usize, p2: usize) -> Result<Self> {
        if p1 < 2 || p2 < 2 {
            return Err(invalid(format!(
                "grid needs at least 2 points per axis, got {p1}x{p2}"
            )));
        }
        Self::new(p1, p2, l1 / (p1 - 1) as f64, l2 / (p2 - 1) as f64)
    }

    pub fn l1(&self) -> f64 {
        (self.p1 - 1) as f64 * self.h1
    }

    pub fn l2(&self) -> f64 {
        (self.p2 - 1) as f64 * self.h2
    }

    pub fn len(&self) -> usize {
        self.p1 * self.p2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, k: usize, l: usize) -> usize {
        k * self.p2 + l
    }

    #[inline]
    pub fn x(&self, k: usize) -> f64 {
        k as f64 * self.h1
    }

    #[inline]
    pub fn y(&self, l: usize) -> f64 {
        l as f64 * self.h2
    }

    pub fn cell_area(&self) -> f64 {
        self.h1 * self.h2
    }
}

/// Values at gridpoints; entry `(k, l)` sits at `(k h1, l h2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, v: f64) -> Self {
        Self {
            grid,
            values: vec![v; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for k in 0..grid.p1 {
            for l in 0..grid.p2 {
                values.push(f(grid.x(k), grid.y(l)));
            }
        }
        Self { grid, values }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.values[self.grid.index(k, l)]
    }

    #[inline]
    pub fn set(&mut self, k: usize, l: usize, v: f64) {
        let i = self.grid.index(k, l);
        self.values[i] = v;
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(invalid("fields live on different grids"));
        }
        Ok(())
    }

    /// Row `k` holds `(k, 0..p2)`; values are `%.17g`, no header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for k in 0..self.grid.p1 {
            let row = &self.values[k * self.grid.p2..(k + 1) * self.grid.p2];
            let line: Vec<String> = row.iter().map(|&v| g17(v)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(grid: Grid, r: R) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            for cell in line.split(',') {
                let v = cell
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("line {}: `{cell}`: {e}", n + 1)))?;
                values.push(v);
            }
        }
        Self::from_values(grid, values)
    }
}
