//! Tabulated distributions and the (weighted) Kolmogorov-Smirnov distance.

use crate::error::{Error, Result};
use crate::quadrature::cumulative_trapezoid;

/// Piecewise-linear CDF of a density tabulated on a uniform grid.
#[derive(Debug, Clone)]
pub struct TabulatedCdf {
    x0: f64,
    h: f64,
    cdf: Vec<f64>,
}

impl TabulatedCdf {
    pub fn new(x0: f64, h: f64, density: &[f64]) -> Result<Self> {
        if density.len() < 2 || density.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "density",
                reason: "needs >= 2 finite non-negative samples".into(),
            });
        }
        let mut cdf = cumulative_trapezoid(density, h);
        let total = *cdf.last().expect("non-empty");
        if !(total > 0.0) {
            return Err(Error::InvalidParameter { name: "density", reason: "zero total mass".into() });
        }
        cdf.iter_mut().for_each(|c| *c /= total);
        Ok(Self { x0, h, cdf })
    }

    /// Tabulates `f` on `n` points over `[lo, hi]`.
    pub fn from_fn<F: Fn(f64) -> f64>(lo: f64, hi: f64, n: usize, f: F) -> Result<Self> {
        let h = (hi - lo) / (n - 1) as f64;
        let d: Vec<f64> = (0..n).map(|i| f(lo + i as f64 * h)).collect();
        Self::new(lo, h, &d)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.x0, self.x0 + self.h * (self.cdf.len() - 1) as f64)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let u = (x - self.x0) / self.h;
        let i = (u.floor() as usize).min(self.cdf.len() - 2);
        let f = u - i as f64;
        self.cdf[i] + f * (self.cdf[i + 1] - self.cdf[i])
    }

    /// Inverse CDF by bisection on the table and linear interpolation.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let i = self.cdf.partition_point(|&c| c < p).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let f = if c1 > c0 { (p - c0) / (c1 - c0) } else { 0.0 };
        self.x0 + (i as f64 - 1.0 + f) * self.h
    }
}

/// Kolmogorov-Smirnov distance between weighted samples and a reference CDF.
///
/// Samples with non-positive weight are ignored.
pub fn weighted_ks<F: Fn(f64) -> f64>(samples: &[(f64, f64)], cdf: F) -> f64 {
    let mut pts: Vec<(f64, f64)> = samples.iter().copied().filter(|(_, w)| *w > 0.0).collect();
    if pts.is_empty() {
        return 1.0;
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pts.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    let mut d = 0.0f64;
    for (x, w) in pts {
        let f = cdf(x);
        d = d.max((acc / total - f).abs());
        acc += w;
        d = d.max((acc / total - f).abs());
    }
    d
}

/// Unweighted KS distance.
pub fn ks<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let pts: Vec<(f64, f64)> = samples.iter().map(|&x| (x, 1.0)).collect();
    weighted_ks(&pts, cdf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quantile_inverts_cdf() {
        let t = TabulatedCdf::from_fn(0.0, 10.0, 10_001, |x| (-x).exp()).unwrap();
        for p in [0.01, 0.3, 0.5, 0.9, 0.999] {
            let x = t.quantile(p);
            assert_relative_eq!(t.cdf(x), p, epsilon = 1e-9);
            // analytic exponential, truncated at 10
            let exact = -(1.0 - p * (1.0 - (-10.0f64).exp())).ln();
            assert!((x - exact).abs() < 1e-5);
        }
        assert_eq!(t.cdf(-1.0), 0.0);
        assert_eq!(t.cdf(11.0), 1.0);
    }

    #[test]
    fn ks_of_uniform_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let d = ks(&xs, |x| x.clamp(0.0, 1.0));
        assert!(d < 0.015);
        // all mass at one point against a uniform reference
        assert!(ks(&[0.5; 10], |x| x.clamp(0.0, 1.0)) >= 0.5);
        // weights shift the distribution: w = 2x on uniform draws gives CDF x^2
        let w: Vec<(f64, f64)> = xs.iter().map(|&x| (x, 2.0 * x)).collect();
        assert!(weighted_ks(&w, |x| x.clamp(0.0, 1.0).powi(2)) < 0.015);
    }

    #[test]
    fn rejects_bad_density() {
        assert!(TabulatedCdf::new(0.0, 1.0, &[0.0, 0.0]).is_err());
        assert!(TabulatedCdf::new(0.0, 1.0, &[1.0, -1.0]).is_err());
    }
}
