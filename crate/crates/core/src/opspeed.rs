//! Operational inter-guide speed: population ratio, its sin^2 fit, the
//! closed-form evanescent speed and the energy-speed table.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::CavityParams;
use crate::stationary2d::{energy_for_delta, leakage_velocity_estimate, wavevectors, Field2D};

/// Fewest samples a fit accepts.
pub const MIN_SAMPLES: usize = 8;
/// Upper bound on `rho_a` for the small-x (quadratic) fit.
pub const SMALL_X_LIMIT: f64 = 0.05;
/// Upper bound on `rho_a` for the arcsin fit, away from the `sin^2` turning point.
pub const ARCSIN_LIMIT: f64 = 0.95;
/// Allowed backwards step of the linearized data before it counts as non-monotone.
pub const MONOTONE_TOL: f64 = 1e-6;
/// `kappa1 x` at the end of the window used by [`speed_curve`]; keeps the
/// quadratic-fit bias near `1e-3`.
pub const CURVE_WINDOW: f64 = 0.05;
/// Samples per [`speed_curve`] fit.
pub const CURVE_SAMPLES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    /// `sqrt(rho_a) = kappa x`: the evanescent small-x expansion.
    QuadraticSmallX,
    /// `arcsin(sqrt(rho_a)) = J0 x / v`: exact for the lossless propagative field.
    ArcsinLinearized,
}

impl FitMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            FitMethod::QuadraticSmallX => "quadratic-small-x",
            FitMethod::ArcsinLinearized => "arcsin-linearized",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedFit {
    pub v: f64,
    pub window: (f64, f64),
    pub residual_rms: f64,
    pub method: FitMethod,
}

/// Auxiliary-guide share `|c_a|^2 / (|c_a|^2 + |c_m|^2)` at depth `x`.
pub fn population_ratio(field: &Field2D, x: f64) -> Result<f64> {
    population_ratio_k1(field.wavevectors().k1, x)
}

/// [`population_ratio`] from `k1` alone: the common carrier `A e^{i k2 x}` cancels,
/// leaving `|sin k1x|^2 / (|cos k1x|^2 + |sin k1x|^2)`.
///
/// With `k1 x = a + ib`, `|sin|^2 = sin^2 a + sinh^2 b` and the denominator is
/// `1 + 2 sinh^2 b`, so the ratio stays finite (tending to 1/2) where the
/// moduli themselves overflow.
pub fn population_ratio_k1(k1: C64, x: f64) -> Result<f64> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::InvalidParameter { name: "x", reason: format!("must be finite and >= 0, got {x}") });
    }
    let arg = k1 * x;
    if !(arg.re.is_finite() && arg.im.is_finite()) {
        return Err(Error::InvalidParameter { name: "k1", reason: format!("k1 x = {arg} is not finite") });
    }
    let sa = arg.re.sin().powi(2);
    let sh = arg.im.sinh().powi(2);
    if !sh.is_finite() {
        return Ok(0.5);
    }
    Ok((sa + sh) / (1.0 + 2.0 * sh))
}

/// Least-squares speed from `(x, rho_a)` samples; see [`FitMethod`].
pub fn fit_speed(samples: &[(f64, f64)], j0: f64, method: FitMethod) -> Result<SpeedFit> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::FitWindow(format!("{} samples, need at least {MIN_SAMPLES}", samples.len())));
    }
    if !(j0 > 0.0) {
        return Err(Error::InvalidParameter { name: "j0", reason: "must be positive".into() });
    }
    let limit = match method {
        FitMethod::QuadraticSmallX => SMALL_X_LIMIT,
        FitMethod::ArcsinLinearized => ARCSIN_LIMIT,
    };
    let mut pts = samples.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    for &(x, r) in &pts {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::FitWindow(format!("sample position {x} outside [0, inf)")));
        }
        if !(0.0..limit).contains(&r) {
            return Err(Error::FitWindow(format!(
                "rho_a = {r} at x = {x:e} outside the {} window [0, {limit})",
                method.as_str()
            )));
        }
    }
    let lin: Vec<(f64, f64)> = pts
        .iter()
        .map(|&(x, r)| match method {
            FitMethod::QuadraticSmallX => (x, r.sqrt()),
            FitMethod::ArcsinLinearized => (x, r.sqrt().asin()),
        })
        .collect();
    if let Some(w) = lin.windows(2).find(|w| w[1].1 < w[0].1 - MONOTONE_TOL) {
        return Err(Error::FitWindow(format!("linearized data decreases between x = {:e} and {:e}", w[0].0, w[1].0)));
    }
    // the line passes through the origin: rho_a(0) = 0
    let sxx: f64 = lin.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = lin.iter().map(|p| p.0 * p.1).sum();
    if !(sxx > 0.0) {
        return Err(Error::FitWindow("all samples at x = 0".into()));
    }
    let slope = sxy / sxx;
    if !(slope > 0.0) {
        return Err(Error::FitWindow(format!("non-positive slope {slope:e}")));
    }
    let residual_rms = (lin.iter().map(|p| (p.1 - slope * p.0).powi(2)).sum::<f64>() / lin.len() as f64).sqrt();
    Ok(SpeedFit { v: j0 / slope, window: (pts[0].0, pts[pts.len() - 1].0), residual_rms, method })
}

/// `v = J0 / kappa1 = 2 J0 / (kappa- - kappa+)`, evaluated without cancellation as
/// `(sqrt(2m (J0 - Delta)) + sqrt(2m (-Delta - J0))) / 2m`.
pub fn closed_form_speed(delta: f64, p: &CavityParams) -> Result<f64> {
    if !(delta < -p.j0) {
        return Err(Error::NotEvanescent { delta_over_j0: delta / p.j0 });
    }
    let a = (2.0 * p.m * (p.j0 - delta)).sqrt();
    let b = (2.0 * p.m * (-delta - p.j0)).sqrt();
    Ok((a + b) / (2.0 * p.m))
}

/// One row of the energy-speed table. Leakage columns use `p.gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedRow {
    pub delta: f64,
    pub delta_over_j0: f64,
    pub v_closed: f64,
    pub v_fit: f64,
    pub fit: SpeedFit,
    /// Exact Bohmian drift along the guides, `Re k2 / m`.
    pub v_bohm_leak: f64,
    /// First-order estimate `(Gamma / 2m) / v_Delta`, when the loss is perturbative.
    pub v_leak_estimate: Option<f64>,
    pub v_closed_km_s: f64,
    pub v_fit_km_s: f64,
    pub v_bohm_leak_km_s: f64,
}

/// Population samples over the curve window `kappa1 x <= CURVE_WINDOW`.
pub fn window_samples(k1: C64, n: usize) -> Result<Vec<(f64, f64)>> {
    if !(k1.norm() > 0.0) {
        return Err(Error::FitWindow("k1 = 0: populations do not evolve".into()));
    }
    let x_end = CURVE_WINDOW / k1.norm();
    (1..=n)
        .map(|i| {
            let x = x_end * i as f64 / n as f64;
            population_ratio_k1(k1, x).map(|r| (x, r))
        })
        .collect()
}

/// Energy-speed relation at each offset, contrasting the operational speed
/// with the Bohmian leakage drift.
pub fn speed_curve(deltas: &[f64], p: &CavityParams) -> Result<Vec<SpeedRow>> {
    deltas
        .par_iter()
        .map(|&delta| {
            let v_closed = closed_form_speed(delta, p)?;
            let k = wavevectors(energy_for_delta(delta, p), p, p.gamma)?;
            let fit = fit_speed(&window_samples(k.k1, CURVE_SAMPLES)?, p.j0, FitMethod::QuadraticSmallX)?;
            let v_bohm_leak = k.k2.re / p.m;
            let km = |v: f64| p.units.velocity_to_km_s(v);
            Ok(SpeedRow {
                delta,
                delta_over_j0: delta / p.j0,
                v_closed,
                v_fit: fit.v,
                fit,
                v_bohm_leak,
                v_leak_estimate: leakage_velocity_estimate(delta, p).ok(),
                v_closed_km_s: km(v_closed),
                v_fit_km_s: km(fit.v),
                v_bohm_leak_km_s: km(v_bohm_leak),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn synthetic_sin_squared_is_inverted() {
        let (j0, v) = (2e-5, 3e-3);
        let xs: Vec<(f64, f64)> = (1..=40).map(|i| i as f64 * 5.0).map(|x| (x, (j0 * x / v).sin().powi(2))).collect();
        let fit = fit_speed(&xs, j0, FitMethod::ArcsinLinearized).unwrap();
        assert_relative_eq!(fit.v, v, max_relative = 1e-6);
        assert!(fit.residual_rms < 1e-12);
        assert_eq!(fit.window, (5.0, 200.0));
    }

    #[test]
    fn window_and_shape_errors() {
        let few: Vec<(f64, f64)> = (1..5).map(|i| (i as f64, 1e-4)).collect();
        assert!(matches!(fit_speed(&few, 1.0, FitMethod::QuadraticSmallX), Err(Error::FitWindow(_))));
        let wide: Vec<(f64, f64)> = (1..=10).map(|i| (i as f64, 0.01 * i as f64)).collect();
        assert!(fit_speed(&wide, 1.0, FitMethod::QuadraticSmallX).is_err());
        assert!(fit_speed(&wide, 1.0, FitMethod::ArcsinLinearized).is_ok());
        let bumpy: Vec<(f64, f64)> = (1..=10).map(|i| (i as f64, if i == 5 { 1e-6 } else { 1e-3 * i as f64 })).collect();
        assert!(fit_speed(&bumpy, 1.0, FitMethod::ArcsinLinearized).is_err());
    }

    #[test]
    fn closed_form_limits() {
        let p = CavityParams::default();
        let j0 = p.j0;
        let v2 = closed_form_speed(-2.0 * j0, &p).unwrap();
        let direct = 2.0 * j0 / ((6.0 * p.m * j0).sqrt() - (2.0 * p.m * j0).sqrt());
        assert_relative_eq!(v2, direct, max_relative = 1e-12);
        assert!(closed_form_speed(-10.0 * j0, &p).unwrap() > v2);
        assert!(matches!(closed_form_speed(-j0, &p), Err(Error::NotEvanescent { .. })));
        let far = -100.0 * j0;
        let v_delta = (-2.0 * far / p.m).sqrt();
        assert!((closed_form_speed(far, &p).unwrap() / v_delta - 1.0).abs() < 0.01);
    }

    #[test]
    fn populations_start_in_main_guide() {
        let k1 = C64::new(0.0, -2e-3);
        assert_eq!(population_ratio_k1(k1, 0.0).unwrap(), 0.0);
        assert!(population_ratio_k1(k1, -1.0).is_err());
        let far = population_ratio_k1(k1, 20.0 / 2e-3).unwrap();
        assert!((far - 0.5).abs() < 1e-12);
    }
}
