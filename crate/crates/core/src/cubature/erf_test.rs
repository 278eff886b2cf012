//! Closed-form test integral for disk rules.
//!
//! f = g1(r) g2(theta) I0(r) with g1 = 100 (delta - r), g2 = 1 + sin(theta)
//! and I0 = 100 / (2 pi sigma^2) exp(-r^2 / (2 sigma^2)). The sine part
//! integrates to zero, leaving 5000 (2 delta - sqrt(2 pi) sigma erf(delta / (sqrt 2 sigma))).

use std::f64::consts::{PI, SQRT_2};

pub fn integrand(delta: f64, sigma: f64) -> impl Fn(f64, f64, f64, f64) -> f64 {
    let amp = 100.0 / (2.0 * PI * sigma * sigma);
    move |_dx, _dy, r, theta| {
        let g1 = if r < delta { 100.0 * (delta - r) } else { 0.0 };
        g1 * (1.0 + theta.sin()) * amp * (-r * r / (2.0 * sigma * sigma)).exp()
    }
}

/// Closed form via `erf`. Loses digits to cancellation when delta << sigma.
pub fn exact_erf_form(delta: f64, sigma: f64) -> f64 {
    5000.0 * (2.0 * delta - (2.0 * PI).sqrt() * sigma * libm::erf(delta / (SQRT_2 * sigma)))
}

/// Same value from the alternating series in x = delta / (sqrt 2 sigma):
/// 1e4 sqrt2 sigma sum_{n>=1} (-1)^(n+1) x^(2n+1) / (n! (2n+1)).
pub fn exact(delta: f64, sigma: f64) -> f64 {
    let x = delta / (SQRT_2 * sigma);
    let x2 = x * x;
    let mut term = x; // x^(2n+1) / n!, starting at n = 0
    let mut sum = 0.0;
    for n in 1..200 {
        term *= x2 / n as f64;
        let t = term / (2 * n + 1) as f64;
        let signed = if n % 2 == 1 { t } else { -t };
        sum += signed;
        if t < 1e-18 * sum.abs() {
            break;
        }
    }
    1e4 * SQRT_2 * sigma * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_matches_erf_form() {
        for &d in &[0.2, 0.1, 0.05, 0.025] {
            let a = exact(d, 0.1);
            let b = exact_erf_form(d, 0.1);
            assert!(((a - b) / a).abs() < 1e-11, "delta={d}: {a} vs {b}");
        }
    }

    #[test]
    fn tends_to_zero_with_delta() {
        let v: Vec<f64> = [0.1, 0.01, 0.001].iter().map(|&d| exact(d, 0.1)).collect();
        assert!(v[0] > v[1] && v[1] > v[2] && v[2] > 0.0);
        // Leading term ~ 1e4 sqrt2 sigma x^3 / 3.
        let x: f64 = 0.001 / (SQRT_2 * 0.1);
        let lead = 1e4 * SQRT_2 * 0.1 * x.powi(3) / 3.0;
        assert!(((v[2] - lead) / lead).abs() < 1e-3);
    }
}
