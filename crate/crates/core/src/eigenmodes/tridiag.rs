//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for the
//! eigenvalues, inverse iteration for the eigenvectors.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(!diag.is_empty());
        assert_eq!(off.len() + 1, diag.len());
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn pivmin(&self) -> f64 {
        let emax = self.off.iter().fold(0.0f64, |a, e| a.max(e * e));
        f64::MIN_POSITIVE * emax.max(1.0)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = self.pivmin();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (zero based), bisected to roundoff.
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        if k >= self.len() {
            return Err(Error::Eigensolver(format!("index {k} out of range")));
        }
        let (mut lo, mut hi) = self.gershgorin();
        let pad = 1e-12 * (hi - lo).abs().max(f64::MIN_POSITIVE);
        lo -= pad;
        hi += pad;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let value = 0.5 * (lo + hi);
        if !value.is_finite() {
            return Err(Error::Eigensolver("bisection produced a non-finite eigenvalue".into()));
        }
        Ok(value)
    }

    /// Eigenvector for the (already accurate) eigenvalue `lambda`, unit Euclidean norm.
    pub fn eigenvector(&self, lambda: f64) -> Result<Vec<f64>> {
        let n = self.len();
        // asymmetric start so both parities are represented
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * (0.7 * i as f64 + 0.3).sin()).collect();
        let scale = self.diag.iter().fold(0.0f64, |a, d| a.max(d.abs()))
            + self.off.iter().fold(0.0f64, |a, e| a.max(e.abs()));
        let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
        let mut prev_resid = f64::INFINITY;
        for _ in 0..8 {
            x = self.shifted_solve(lambda, &x, tiny);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::Eigensolver("inverse iteration broke down".into()));
            }
            x.iter_mut().for_each(|v| *v /= norm);
            let resid = self.residual(lambda, &x);
            if resid <= 1e3 * f64::EPSILON * scale || resid >= prev_resid {
                break;
            }
            prev_resid = resid;
        }
        Ok(x)
    }

    /// Infinity norm of `(T - lambda) x`.
    pub fn residual(&self, lambda: f64, x: &[f64]) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut r = (self.diag[i] - lambda) * x[i];
                if i > 0 {
                    r += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    r += self.off[i] * x[i + 1];
                }
                r.abs()
            })
            .fold(0.0, f64::max)
    }

    /// Solves `(T - shift) y = b` by Gaussian elimination with partial pivoting.
    fn shifted_solve(&self, shift: f64, b: &[f64], tiny: f64) -> Vec<f64> {
        let n = self.len();
        if n == 1 {
            let d = self.diag[0] - shift;
            return vec![b[0] / if d.abs() < tiny { tiny } else { d }];
        }
        // rows stored as (main, upper, upper2) after elimination
        let mut d: Vec<f64> = self.diag.iter().map(|v| v - shift).collect();
        let mut du: Vec<f64> = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut dl: Vec<f64> = self.off.clone();
        let mut rhs = b.to_vec();
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i].abs() < tiny {
                    d[i] = tiny;
                }
                let f = dl[i] / d[i];
                d[i + 1] -= f * du[i];
                rhs[i + 1] -= f * rhs[i];
                dl[i] = 0.0;
            } else {
                // swap rows i and i+1
                let f = d[i] / dl[i];
                d[i] = dl[i];
                let tmp = d[i + 1];
                d[i + 1] = du[i] - f * tmp;
                if i + 1 < n - 1 {
                    du2[i] = du[i + 1];
                    du[i + 1] = -f * du2[i];
                }
                du[i] = tmp;
                rhs.swap(i, i + 1);
                rhs[i + 1] -= f * rhs[i];
            }
        }
        if d[n - 1].abs() < tiny {
            d[n - 1] = tiny;
        }
        let mut y = vec![0.0; n];
        y[n - 1] = rhs[n - 1] / d[n - 1];
        y[n - 2] = (rhs[n - 2] - du[n - 2] * y[n - 1]) / d[n - 2];
        for i in (0..n.saturating_sub(2)).rev() {
            y[i] = (rhs[i] - du[i] * y[i + 1] - du2[i] * y[i + 2]) / d[i];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn discrete_laplacian_spectrum() {
        // tridiag(-1, 2, -1) has eigenvalues 2 - 2 cos(k pi / (n + 1))
        let n = 50;
        let t = SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]);
        for k in 0..n {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n + 1) as f64).cos();
            assert_relative_eq!(t.eigenvalue(k).unwrap(), exact, epsilon = 1e-13);
        }
        let lam = t.eigenvalue(1).unwrap();
        let v = t.eigenvector(lam).unwrap();
        assert!(t.residual(lam, &v) < 1e-12);
        // second mode is odd about the centre
        for i in 0..n {
            assert_relative_eq!(v[i], -v[n - 1 - i], epsilon = 1e-10);
        }
    }

    #[test]
    fn pivoting_solver_matches_dense() {
        let t = SymTridiagonal::new(vec![0.0, 1.0, -2.0, 0.5], vec![3.0, 1.0, -1.0]);
        let b = [1.0, 2.0, 3.0, 4.0];
        let y = t.shifted_solve(0.25, &b, 1e-300);
        // check (T - 0.25) y = b
        let d = [-0.25, 0.75, -2.25, 0.25];
        let e = [3.0, 1.0, -1.0];
        for i in 0..4 {
            let mut r = d[i] * y[i];
            if i > 0 {
                r += e[i - 1] * y[i - 1];
            }
            if i < 3 {
                r += e[i] * y[i + 1];
            }
            assert_relative_eq!(r, b[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn out_of_range_index() {
        let t = SymTridiagonal::new(vec![1.0, 2.0], vec![0.5]);
        assert!(t.eigenvalue(2).is_err());
    }
}
