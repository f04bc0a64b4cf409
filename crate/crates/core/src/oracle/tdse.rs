//! One-dimensional Crank-Nicolson propagator for `H = -d^2/dx^2 / 2m + V(x) - i Gamma/2`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest tolerated norm gain per step before the run is declared unstable.
const GROWTH_TOL: f64 = 1e-6;

/// Wave function on a uniform grid with Dirichlet ends.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState1D {
    pub x: Vec<f64>,
    pub psi: Vec<C64>,
    /// Potential samples; negative imaginary parts absorb.
    pub v: Vec<C64>,
    pub t: f64,
    pub m: f64,
    /// Uniform loss rate, applied as the exact factor `exp(-Gamma dt / 2)`.
    pub gamma: f64,
}

impl GridState1D {
    pub fn new(x: Vec<f64>, psi: Vec<C64>, v: Vec<C64>, m: f64, gamma: f64) -> Result<Self> {
        let n = x.len();
        if n < 3 || psi.len() != n || v.len() != n {
            return Err(Error::Tdse("grid, psi and V must share a length >= 3".into()));
        }
        let h = (x[n - 1] - x[0]) / (n - 1) as f64;
        if !(h > 0.0) || x.iter().enumerate().any(|(i, xi)| (xi - x[0] - i as f64 * h).abs() > 1e-9 * h) {
            return Err(Error::Tdse("grid must be uniform and increasing".into()));
        }
        if !(m > 0.0 && gamma >= 0.0) {
            return Err(Error::Tdse("need m > 0 and Gamma >= 0".into()));
        }
        let state = Self { x, psi, v, t: 0.0, m, gamma };
        if !state.norm().is_finite() {
            return Err(Error::Tdse("initial norm is not finite".into()));
        }
        Ok(state)
    }

    pub fn spacing(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    /// Adds a cubic imaginary ramp `-i strength (d / w)^3` over the outer `fraction` of each edge.
    pub fn with_absorber(mut self, fraction: f64, strength: f64) -> Self {
        let (lo, hi) = (self.x[0], self.x[self.x.len() - 1]);
        let w = fraction * (hi - lo);
        for (xi, vi) in self.x.iter().zip(self.v.iter_mut()) {
            let d = (lo + w - xi).max(xi - (hi - w)).max(0.0) / w;
            *vi -= C64::new(0.0, strength * d.powi(3));
        }
        self
    }

    pub fn norm(&self) -> f64 {
        self.spacing() * self.psi.iter().map(|p| p.norm_sqr()).sum::<f64>()
    }

    pub fn mean_x(&self) -> f64 {
        let w: f64 = self.psi.iter().map(|p| p.norm_sqr()).sum();
        self.x.iter().zip(&self.psi).map(|(x, p)| x * p.norm_sqr()).sum::<f64>() / w
    }

    pub fn std_x(&self) -> f64 {
        let w: f64 = self.psi.iter().map(|p| p.norm_sqr()).sum();
        let mu = self.mean_x();
        (self.x.iter().zip(&self.psi).map(|(x, p)| (x - mu).powi(2) * p.norm_sqr()).sum::<f64>() / w).sqrt()
    }

    /// Central-difference `Im(psi' / psi) / m` at interior index `i`.
    pub fn phase_gradient(&self, i: usize) -> f64 {
        let d = (self.psi[i + 1] - self.psi[i - 1]) / (2.0 * self.spacing());
        (d / self.psi[i]).im / self.m
    }

    /// Index of the node closest to `x`.
    pub fn index_of(&self, x: f64) -> usize {
        let i = ((x - self.x[0]) / self.spacing()).round();
        (i.max(0.0) as usize).min(self.x.len() - 1)
    }
}

/// Normalized Gaussian `exp(-(x - x0)^2 / 4 s^2 + i k0 x)`; `|psi|^2` has standard deviation `s`.
pub fn gaussian_packet(x: &[f64], x0: f64, s: f64, k0: f64) -> Vec<C64> {
    let norm = (2.0 * std::f64::consts::PI * s * s).powf(-0.25);
    x.iter().map(|&xi| norm * C64::new(-(xi - x0).powi(2) / (4.0 * s * s), k0 * xi).exp()).collect()
}

/// Advances `state` by `steps` Crank-Nicolson steps of size `dt`.
pub fn tdse_propagate(state: &GridState1D, dt: f64, steps: usize) -> Result<GridState1D> {
    let vmax = state.v.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(dt > 0.0) || dt * vmax >= 0.5 {
        return Err(Error::Tdse(format!("dt * max|V| = {:e} outside the stability window (< 0.5)", dt * vmax)));
    }
    let n = state.x.len();
    let h = state.spacing();
    let kin = 1.0 / (2.0 * state.m * h * h);
    let half = C64::new(0.0, 0.5 * dt);
    // (1 + i dt H / 2) psi' = (1 - i dt H / 2) psi
    let a_diag: Vec<C64> = state.v.iter().map(|v| 1.0 + half * (2.0 * kin + v)).collect();
    let a_off = half * -kin;
    let b_diag: Vec<C64> = state.v.iter().map(|v| 1.0 - half * (2.0 * kin + v)).collect();
    let b_off = -half * -kin;
    let damping = (-0.5 * state.gamma * dt).exp();

    // forward-elimination coefficients depend only on the matrix
    let mut c_prime = vec![C64::new(0.0, 0.0); n];
    let mut denom = vec![C64::new(0.0, 0.0); n];
    denom[0] = a_diag[0];
    c_prime[0] = a_off / denom[0];
    for i in 1..n {
        denom[i] = a_diag[i] - a_off * c_prime[i - 1];
        c_prime[i] = a_off / denom[i];
    }

    let mut out = state.clone();
    let mut rhs = vec![C64::new(0.0, 0.0); n];
    let mut norm = out.norm();
    for _ in 0..steps {
        let psi = &out.psi;
        for i in 0..n {
            let mut r = b_diag[i] * psi[i];
            if i > 0 {
                r += b_off * psi[i - 1];
            }
            if i + 1 < n {
                r += b_off * psi[i + 1];
            }
            rhs[i] = r;
        }
        rhs[0] /= denom[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - a_off * rhs[i - 1]) / denom[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] = rhs[i] - c_prime[i] * rhs[i + 1];
        }
        for (p, r) in out.psi.iter_mut().zip(&rhs) {
            *p = r * damping;
        }
        out.t += dt;
        let next = out.norm();
        let lossless = next / (damping * damping);
        if !next.is_finite() || lossless > norm * (1.0 + GROWTH_TOL) {
            return Err(Error::Tdse(format!("norm grew from {norm:e} to {lossless:e} in one step")));
        }
        norm = next;
    }
    Ok(out)
}
