//! Not-a-knot cubic spline second derivatives on a uniform 1-D grid.

/// Second derivatives `M` of the not-a-knot spline through `f` at spacing `h`.
/// Two points give a line, three a parabola.
pub fn second_derivatives(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    let r = |i: usize| 6.0 * (f[i - 1] - 2.0 * f[i] + f[i + 1]) / (h * h);
    if n == 3 {
        m.fill(r(1) / 6.0);
        return m;
    }
    m[1] = r(1) / 6.0;
    m[n - 2] = r(n - 2) / 6.0;
    // Tridiagonal (1, 4, 1) system for m[2..n-2].
    let k = n - 4;
    if k > 0 {
        let mut c = vec![0.0; k];
        let mut d = vec![0.0; k];
        for s in 0..k {
            let i = s + 2;
            let mut rhs = r(i);
            if s == 0 {
                rhs -= m[1];
            }
            if s == k - 1 {
                rhs -= m[n - 2];
            }
            let denom = if s == 0 { 4.0 } else { 4.0 - c[s - 1] };
            c[s] = 1.0 / denom;
            d[s] = if s == 0 {
                rhs / denom
            } else {
                (rhs - d[s - 1]) / denom
            };
        }
        m[k + 1] = d[k - 1];
        for s in (0..k - 1).rev() {
            m[s + 2] = d[s] - c[s] * m[s + 3];
        }
    }
    m[0] = 2.0 * m[1] - m[2];
    m[n - 1] = 2.0 * m[n - 2] - m[n - 3];
    m
}

/// Spline basis on a cell with local coordinate `t` in [0, 1].
#[inline]
pub fn basis(t: f64, h: f64) -> [f64; 4] {
    let a = 1.0 - t;
    let b = t;
    let h2 = h * h / 6.0;
    [a, b, (a * a * a - a) * h2, (b * b * b - b) * h2]
}
