//! Continuous evaluators of the guide modes `Phi_m`, `Phi_a` and their slopes.

use std::f64::consts::FRAC_1_SQRT_2;

use super::{ModeBasis, RectangularModes};
use crate::error::{Error, Result};

/// Guide-mode values and first derivatives at one `y`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModeValues {
    pub phi_m: f64,
    pub phi_a: f64,
    pub dphi_m: f64,
    pub dphi_a: f64,
}

/// Natural cubic spline on a uniform grid.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn uniform(x0: f64, h: f64, y: Vec<f64>) -> Self {
        let n = y.len();
        assert!(n >= 3);
        // second derivatives: M_{i-1} + 4 M_i + M_{i+1} = 6 (y_{i-1} - 2 y_i + y_{i+1}) / h^2
        let mut m = vec![0.0; n];
        let k = n - 2;
        let mut c = vec![0.0; k];
        let mut d = vec![0.0; k];
        for j in 0..k {
            let i = j + 1;
            let rhs = 6.0 * (y[i - 1] - 2.0 * y[i] + y[i + 1]) / (h * h);
            let denom = if j == 0 { 4.0 } else { 4.0 - c[j - 1] };
            c[j] = 1.0 / denom;
            d[j] = if j == 0 { rhs / denom } else { (rhs - d[j - 1]) / denom };
        }
        for j in (0..k).rev() {
            let next = if j + 1 < k { m[j + 2] } else { 0.0 };
            m[j + 1] = d[j] - c[j] * next;
        }
        Self { x0, h, y, m }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x0, self.x0 + self.h * (self.y.len() - 1) as f64)
    }

    /// Value and first derivative; zero outside the knot range.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return (0.0, 0.0);
        }
        let n = self.y.len();
        let i = (((x - self.x0) / self.h).floor() as usize).min(n - 2);
        let h = self.h;
        let a = (self.x0 + (i + 1) as f64 * h - x) / h;
        let b = 1.0 - a;
        let (y0, y1, m0, m1) = (self.y[i], self.y[i + 1], self.m[i], self.m[i + 1]);
        let val = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let der = (y1 - y0) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 + (3.0 * b * b - 1.0) * h * m1 / 6.0;
        (val, der)
    }
}

/// Spline interpolation of a hybridized finite-difference basis; works for any well shape.
#[derive(Debug, Clone)]
pub struct SplineModes {
    phi_m: CubicSpline,
    phi_a: CubicSpline,
}

impl SplineModes {
    pub fn from_basis(basis: &ModeBasis) -> Result<Self> {
        let (pm, pa) = match (basis.phi_m(), basis.phi_a()) {
            (Some(m), Some(a)) => (m.to_vec(), a.to_vec()),
            _ => return Err(Error::ModeStructure("basis has not been hybridized".into())),
        };
        let h = basis.spacing();
        Ok(Self {
            phi_m: CubicSpline::uniform(basis.y[0], h, pm),
            phi_a: CubicSpline::uniform(basis.y[0], h, pa),
        })
    }
}

/// Transverse mode profiles consumed by the two-dimensional field.
#[derive(Debug, Clone)]
pub enum ModeProfiles {
    /// Exact piecewise-analytic modes (rectangular wells).
    Exact(RectangularModes),
    /// Cubic-spline interpolation of finite-difference modes.
    Spline(SplineModes),
}

impl ModeProfiles {
    pub fn eval(&self, y: f64) -> ModeValues {
        match self {
            ModeProfiles::Exact(modes) => {
                let (p, dp) = modes.phi_plus(y);
                let (q, dq) = modes.phi_minus(y);
                ModeValues {
                    phi_m: FRAC_1_SQRT_2 * (q + p),
                    phi_a: FRAC_1_SQRT_2 * (q - p),
                    dphi_m: FRAC_1_SQRT_2 * (dq + dp),
                    dphi_a: FRAC_1_SQRT_2 * (dq - dp),
                }
            }
            ModeProfiles::Spline(s) => {
                let (pm, dpm) = s.phi_m.eval(y);
                let (pa, dpa) = s.phi_a.eval(y);
                ModeValues { phi_m: pm, phi_a: pa, dphi_m: dpm, dphi_a: dpa }
            }
        }
    }

    pub fn half_width(&self) -> f64 {
        match self {
            ModeProfiles::Exact(modes) => modes.half_width(),
            ModeProfiles::Spline(s) => s.phi_m.domain().1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spline_reproduces_smooth_function() {
        let h = 0.01;
        let y: Vec<f64> = (0..=600).map(|i| (i as f64 * h).sin()).collect();
        let s = CubicSpline::uniform(0.0, h, y);
        for &x in &[0.5, 1.2345, 3.0, 5.5] {
            let (v, d) = s.eval(x);
            assert_relative_eq!(v, x.sin(), epsilon = 1e-8);
            assert_relative_eq!(d, x.cos(), epsilon = 1e-6);
        }
        assert_eq!(s.eval(-1.0), (0.0, 0.0));
        // derivative is the exact slope of the interpolant
        let x = 2.001;
        let e = 1e-6;
        let fd = (s.eval(x + e).0 - s.eval(x - e).0) / (2.0 * e);
        assert_relative_eq!(fd, s.eval(x).1, epsilon = 1e-8);
    }
}
