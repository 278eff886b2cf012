//! Positive-weight cubature rules on the disk of radius `delta`.

pub mod erf_test;
mod gauss;

use std::f64::consts::PI;
use std::io::Write;

pub use gauss::{gauss_legendre_unit, gauss_legendre_unit_gw, golub_welsch};

use crate::error::{invalid, Result};
use crate::fmt::g17;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubaturePoint {
    pub dx: f64,
    pub dy: f64,
    pub r: f64,
    pub theta: f64,
    pub weight: f64,
}

impl CubaturePoint {
    fn polar(r: f64, theta: f64, weight: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            dx: r * c,
            dy: r * s,
            r,
            theta,
            weight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    ElhayKautsky,
    GaussLegendreProduct,
}

impl std::str::FromStr for RuleKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "product" | "gauss-legendre" | "gl" => Ok(Self::GaussLegendreProduct),
            "elhay-kautsky" | "ek" => Ok(Self::ElhayKautsky),
            _ => Err(crate::Error::UnknownMethod(s.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubatureRule {
    pub points: Vec<CubaturePoint>,
    pub delta: f64,
    pub kind: RuleKind,
    pub n_radial: usize,
    pub n_angular: usize,
}

impl CubatureRule {
    pub fn new(kind: RuleKind, n: usize, delta: f64) -> Result<Self> {
        match kind {
            RuleKind::GaussLegendreProduct => product_disk_rule(n, delta),
            RuleKind::ElhayKautsky => elhay_kautsky_rule(n, delta),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.points.iter().map(|p| p.weight).sum()
    }

    pub fn max_weight(&self) -> f64 {
        self.points.iter().map(|p| p.weight).fold(0.0, f64::max)
    }

    /// Sequential sum of `weight * f(dx, dy, r, theta)` in point order.
    pub fn integrate<F: Fn(f64, f64, f64, f64) -> f64>(&self, f: F) -> f64 {
        integrate(self, f)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "dx,dy,r,theta,weight")?;
        for p in &self.points {
            writeln!(
                w,
                "{},{},{},{},{}",
                g17(p.dx),
                g17(p.dy),
                g17(p.r),
                g17(p.theta),
                g17(p.weight)
            )?;
        }
        Ok(())
    }
}

pub fn integrate<F: Fn(f64, f64, f64, f64) -> f64>(rule: &CubatureRule, f: F) -> f64 {
    let mut acc = 0.0;
    for p in &rule.points {
        acc += p.weight * f(p.dx, p.dy, p.r, p.theta);
    }
    acc
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid(format!(
            "disk radius must be positive, got {delta}"
        )));
    }
    Ok(())
}

/// Gauss–Legendre product rule on [0,1]^2 mapped to the disk by
/// r = delta xi, theta = 2 pi eta, with n_eta = 2 n_xi.
pub fn product_disk_rule(n_xi: usize, delta: f64) -> Result<CubatureRule> {
    check_delta(delta)?;
    let (xi, wxi) = gauss_legendre_unit(n_xi)?;
    let n_eta = 2 * n_xi;
    let (eta, weta) = gauss_legendre_unit(n_eta)?;
    let scale = 2.0 * PI * delta * delta;
    let mut points = Vec::with_capacity(n_xi * n_eta);
    for i in 0..n_xi {
        for j in 0..n_eta {
            points.push(CubaturePoint::polar(
                delta * xi[i],
                2.0 * PI * eta[j],
                wxi[i] * weta[j] * scale * xi[i],
            ));
        }
    }
    Ok(CubatureRule {
        points,
        delta,
        kind: RuleKind::GaussLegendreProduct,
        n_radial: n_xi,
        n_angular: n_eta,
    })
}

/// Polar rule with Gauss–Legendre nodes in the area coordinate u = r^2/delta^2
/// (Golub–Welsch) and 2 n_r equally spaced angles with equal weights.
pub fn elhay_kautsky_rule(n_r: usize, delta: f64) -> Result<CubatureRule> {
    check_delta(delta)?;
    let (u, wu) = gauss_legendre_unit_gw(n_r)?;
    let n_theta = 2 * n_r;
    let mut points = Vec::with_capacity(n_r * n_theta);
    for i in 0..n_r {
        let r = delta * u[i].sqrt();
        let w = PI * delta * delta * wu[i] / n_theta as f64;
        for j in 0..n_theta {
            points.push(CubaturePoint::polar(
                r,
                2.0 * PI * j as f64 / n_theta as f64,
                w,
            ));
        }
    }
    Ok(CubatureRule {
        points,
        delta,
        kind: RuleKind::ElhayKautsky,
        n_radial: n_r,
        n_angular: n_theta,
    })
}
