//! Explicit SSP Runge–Kutta methods in Shu–Osher form.
//!
//! Stage `i` (0-based, stage 0 is the old state) is
//! `Q_i = v_i Q_0 + sum_{j<i} alpha_ij (Q_j + tau / C * F(Q_j))`;
//! the last stage is the new state.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RkMethod {
    pub name: &'static str,
    /// Number of function evaluations.
    pub m: usize,
    /// `(m+1) x m`, row-major; row `i` may only use columns `j < i`.
    pub alpha: Vec<Vec<f64>>,
    /// Length `m+1`; `v[0] = 1`.
    pub v: Vec<f64>,
    pub ssp_c: f64,
    pub order: u32,
}

impl RkMethod {
    fn from_rows(
        name: &'static str,
        m: usize,
        ssp_c: f64,
        order: u32,
        rows: &[(f64, &[(usize, f64)])],
    ) -> Self {
        let mut alpha = vec![vec![0.0; m]; m + 1];
        let mut v = vec![0.0; m + 1];
        v[0] = 1.0;
        for (i, (vi, entries)) in rows.iter().enumerate() {
            v[i + 1] = *vi;
            for &(j, a) in entries.iter() {
                alpha[i + 1][j] = a;
            }
        }
        Self {
            name,
            m,
            alpha,
            v,
            ssp_c,
            order,
        }
    }

    pub fn forward_euler() -> Self {
        Self::from_rows("fe", 1, 1.0, 1, &[(0.0, &[(0, 1.0)])])
    }

    pub fn ssprk22() -> Self {
        Self::from_rows(
            "ssprk22",
            2,
            1.0,
            2,
            &[(0.0, &[(0, 1.0)]), (0.5, &[(1, 0.5)])],
        )
    }

    pub fn ssprk33() -> Self {
        Self::from_rows(
            "ssprk33",
            3,
            1.0,
            3,
            &[
                (0.0, &[(0, 1.0)]),
                (0.75, &[(1, 0.25)]),
                (1.0 / 3.0, &[(2, 2.0 / 3.0)]),
            ],
        )
    }

    /// Ketcheson's ten-stage fourth-order method, C = 6.
    pub fn ssprk104() -> Self {
        let rows: Vec<(f64, Vec<(usize, f64)>)> = (1..=10)
            .map(|i| match i {
                5 => (0.6, vec![(4, 0.4)]),
                10 => (1.0 / 25.0, vec![(4, 9.0 / 25.0), (9, 0.6)]),
                _ => (0.0, vec![(i - 1, 1.0)]),
            })
            .collect();
        let borrowed: Vec<(f64, &[(usize, f64)])> =
            rows.iter().map(|(v, e)| (*v, e.as_slice())).collect();
        Self::from_rows("ssprk104", 10, 6.0, 4, &borrowed)
    }

    /// Methods selectable by name: `ssprk22`, `ssprk33`, `ssprk104`.
    pub fn registry() -> Vec<RkMethod> {
        vec![Self::ssprk22(), Self::ssprk33(), Self::ssprk104()]
    }

    pub fn by_name(name: &str) -> Result<RkMethod> {
        match name {
            "fe" => Ok(Self::forward_euler()),
            _ => Self::registry()
                .into_iter()
                .find(|m| m.name == name)
                .ok_or_else(|| Error::UnknownMethod(name.into())),
        }
    }

    /// Whether stage `j`'s Euler substep is used by any later stage.
    pub(crate) fn needed(&self, j: usize) -> bool {
        (j + 1..=self.m).any(|i| self.alpha[i][j] != 0.0)
    }

    /// Butcher form `(A, b, c)` implied by the Shu–Osher arrays.
    pub fn butcher(&self) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
        let m = self.m;
        let mut a = vec![vec![0.0; m]; m + 1];
        for i in 1..=m {
            for k in 0..m {
                let mut s = self.alpha[i][k] / self.ssp_c;
                for j in 0..i {
                    s += self.alpha[i][j] * a[j][k];
                }
                a[i][k] = s;
            }
        }
        let b = a.pop().expect("m+1 rows");
        let c = a.iter().map(|row| row.iter().sum()).collect();
        (a, b, c)
    }

    /// Largest residual of the order conditions up to `self.order` (max 4).
    pub fn order_residual(&self) -> f64 {
        let (a, b, c) = self.butcher();
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
        let matvec = |x: &[f64]| a.iter().map(|row| dot(row, x)).collect::<Vec<f64>>();
        let ones = vec![1.0; self.m];
        let c2: Vec<f64> = c.iter().map(|x| x * x).collect();
        let c3: Vec<f64> = c.iter().map(|x| x * x * x).collect();
        let ac = matvec(&c);
        let mut res: Vec<f64> = vec![dot(&b, &ones) - 1.0];
        if self.order >= 2 {
            res.push(dot(&b, &c) - 0.5);
        }
        if self.order >= 3 {
            res.push(dot(&b, &c2) - 1.0 / 3.0);
            res.push(dot(&b, &ac) - 1.0 / 6.0);
        }
        if self.order >= 4 {
            let c_ac: Vec<f64> = c.iter().zip(&ac).map(|(x, y)| x * y).collect();
            res.push(dot(&b, &c3) - 0.25);
            res.push(dot(&b, &c_ac) - 0.125);
            res.push(dot(&b, &matvec(&c2)) - 1.0 / 12.0);
            res.push(dot(&b, &matvec(&ac)) - 1.0 / 24.0);
        }
        res.into_iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// Largest `|v_i + sum_j alpha_ij - 1|` over rows.
    pub fn consistency_residual(&self) -> f64 {
        (0..=self.m)
            .map(|i| (self.v[i] + self.alpha[i].iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.v
            .iter()
            .chain(self.alpha.iter().flatten())
            .all(|&x| x >= 0.0)
    }

    /// Stability polynomial applied to `z = lambda tau` (scalar linear test).
    pub fn amplification(&self, z: f64) -> f64 {
        let mut q = vec![0.0; self.m + 1];
        q[0] = 1.0;
        for i in 1..=self.m {
            let mut s = self.v[i];
            for j in 0..i {
                if self.alpha[i][j] != 0.0 {
                    s += self.alpha[i][j] * (q[j] + z / self.ssp_c * q[j]);
                }
            }
            q[i] = s;
        }
        q[self.m]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableaus_are_consistent_nonnegative_and_accurate() {
        for m in std::iter::once(RkMethod::forward_euler()).chain(RkMethod::registry()) {
            assert!(m.consistency_residual() <= 1e-15, "{}", m.name);
            assert!(m.is_nonnegative(), "{}", m.name);
            assert!(
                m.order_residual() <= 1e-12,
                "{}: {}",
                m.name,
                m.order_residual()
            );
            assert_eq!(m.alpha.len(), m.m + 1);
        }
    }

    #[test]
    fn ssprk104_has_no_fifth_order_accident() {
        // Order 4 exactly: the order-5 bushy-tree condition b.c^4 = 1/5 fails.
        let m = RkMethod::ssprk104();
        let (_, b, c) = m.butcher();
        let s: f64 = b.iter().zip(&c).map(|(b, c)| b * c.powi(4)).sum();
        assert!((s - 0.2).abs() > 1e-6);
        assert_eq!(m.ssp_c, 6.0);
        assert_eq!(m.m, 10);
    }

    #[test]
    fn ssprk33_matches_cubic_taylor() {
        let m = RkMethod::ssprk33();
        for &z in &[-0.5, 0.1, 0.3] {
            let taylor = 1.0 + z + z * z / 2.0 + z * z * z / 6.0;
            assert!((m.amplification(z) - taylor).abs() < 1e-15);
        }
    }

    #[test]
    fn registry_lookup() {
        assert_eq!(RkMethod::by_name("ssprk104").unwrap().order, 4);
        assert_eq!(RkMethod::by_name("fe").unwrap().m, 1);
        assert!(matches!(
            RkMethod::by_name("rk4"),
            Err(Error::UnknownMethod(_))
        ));
    }
}
