//! 1-D makima Hermite interpolation with a Fritsch–Carlson limiter.
//!
//! Slopes are in units of value per index step.

/// Interpolates `v` on cell `[i, i+1]` at local coordinate `t`.
/// Slopes at `i` and `i+1` use secants up to two cells away, extended
/// linearly past the ends of `v`.
pub fn eval(v: &[f64], i: usize, t: f64) -> f64 {
    let n = v.len();
    debug_assert!(n >= 2 && i + 1 < n);
    if n == 2 {
        return v[0] + t * (v[1] - v[0]);
    }
    let d0 = slope(v, i);
    let d1 = slope(v, i + 1);
    let (y0, y1) = (v[i], v[i + 1]);
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1
}

// Secant m_j = v[j+1] - v[j] for j in -2..=n, extended linearly.
fn secant(v: &[f64], j: isize) -> f64 {
    let last = v.len() as isize - 2;
    let raw = |j: isize| v[j as usize + 1] - v[j as usize];
    if j < 0 {
        let m0 = raw(0);
        let m1 = if last >= 1 { raw(1) } else { m0 };
        let mm1 = 2.0 * m0 - m1;
        if j == -1 {
            mm1
        } else {
            2.0 * mm1 - m0
        }
    } else if j > last {
        let ml = raw(last);
        let ml1 = if last >= 1 { raw(last - 1) } else { ml };
        let mp1 = 2.0 * ml - ml1;
        if j == last + 1 {
            mp1
        } else {
            2.0 * mp1 - ml
        }
    } else {
        raw(j)
    }
}

fn slope(v: &[f64], j: usize) -> f64 {
    let j = j as isize;
    let (m2, m1, m0, p1) = (
        secant(v, j - 2),
        secant(v, j - 1),
        secant(v, j),
        secant(v, j + 1),
    );
    let w1 = (p1 - m0).abs() + 0.5 * (p1 + m0).abs();
    let w2 = (m1 - m2).abs() + 0.5 * (m1 + m2).abs();
    let mut d = if w1 + w2 > 0.0 {
        (w1 * m1 + w2 * m0) / (w1 + w2)
    } else {
        0.0
    };
    // Limiter: flat at extrema, |d| <= 3 min(|m1|, |m0|) with matching sign.
    let left = if j == 0 { m0 } else { m1 };
    let right = if j as usize == v.len() - 1 { m1 } else { m0 };
    if left * right <= 0.0 || d * right <= 0.0 {
        return 0.0;
    }
    let cap = 3.0 * left.abs().min(right.abs());
    if d.abs() > cap {
        d = cap.copysign(right);
    }
    d
}
