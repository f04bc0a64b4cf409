//! Evanescent wave packet in the classically forbidden region `x >= 0`.
//!
//! The packet is the spectral superposition
//! `psi(x, t) = int dE g(E) e^{-iEt} e^{-k_E x}` with
//! `k_E = sqrt(2m (V0 - E + m))` and a Gaussian `g` of standard deviation
//! `sqrt 2 sigma` about `E0`. Linearizing `k_E` about `E0` gives the closed form
//! `exp(sigma^2 (i t - m x / k0)^2) e^{-i E0 t} e^{-k0 x}`, whose guidance
//! velocity `-2 sigma^2 t / k0` does not depend on `x`. Amplitudes are left
//! unnormalized: every consumer works with ratios.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::params::CavityParams;
use crate::quadrature::gauss_hermite;
use crate::stats::{weighted_ks, TabulatedCdf};

/// Largest `sigma / (V0 - E0 + m)` accepted by first-order consumers.
pub const LINEARIZATION_LIMIT: f64 = 0.1;
/// Largest Gaussian mass that may fall outside the evanescent support.
pub const TRUNCATION_LIMIT: f64 = 1e-6;
/// Fewest Gauss-Hermite nodes accepted by the spectral quadrature.
pub const MIN_NODES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PacketSpec {
    pub e0: f64,
    pub sigma: f64,
    pub v0: f64,
    pub m: f64,
    /// Dominant decay constant `sqrt(2m (V0 - E0 + m))`.
    pub k0: f64,
}

impl PacketSpec {
    pub fn new(e0: f64, sigma: f64, v0: f64, m: f64) -> Result<Self> {
        let depth = v0 - e0 + m;
        if !(depth > 0.0) {
            return Err(Error::InvalidParameter {
                name: "E0",
                reason: format!("dominant energy is not evanescent: V0 - E0 + m = {depth:e}"),
            });
        }
        if !(sigma > 0.0 && m > 0.0) {
            return Err(Error::InvalidParameter { name: "sigma", reason: "need sigma > 0 and m > 0".into() });
        }
        Ok(Self { e0, sigma, v0, m, k0: (2.0 * m * depth).sqrt() })
    }

    /// Packet at the dominant energy of `p`.
    pub fn from_params(p: &CavityParams) -> Result<Self> {
        Self::new(p.e0, p.sigma, p.v0, p.m)
    }

    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::new(self.e0, sigma, self.v0, self.m)
    }

    /// Energy below the barrier top, `V0 - E0 + m`.
    pub fn barrier_depth(&self) -> f64 {
        self.v0 - self.e0 + self.m
    }

    /// Decay length `L = 1 / k0`.
    pub fn decay_length(&self) -> f64 {
        1.0 / self.k0
    }

    pub fn linearization_ratio(&self) -> f64 {
        self.sigma / self.barrier_depth()
    }

    /// Errors unless the linearized closed form is trustworthy.
    pub fn check_linear(&self) -> Result<()> {
        let r = self.linearization_ratio();
        if r < LINEARIZATION_LIMIT {
            Ok(())
        } else {
            Err(Error::InvalidParameter {
                name: "sigma",
                reason: format!("sigma / (V0 - E0 + m) = {r:e} >= {LINEARIZATION_LIMIT}"),
            })
        }
    }

    /// Decay constant at energy `e` (zero at and above the barrier top).
    pub fn k_of(&self, e: f64) -> f64 {
        (2.0 * self.m * (self.v0 - e + self.m)).max(0.0).sqrt()
    }

    /// Gaussian mass of `g(E)` above the barrier top.
    pub fn truncated_mass(&self) -> f64 {
        0.5 * erfc(self.barrier_depth() / (2.0 * self.sigma))
    }
}

/// First-order closed form `exp(sigma^2 (i t - m x / k0)^2) e^{-i E0 t} e^{-k0 x}`.
pub fn packet_first_order(x: f64, t: f64, s: &PacketSpec) -> C64 {
    let z = C64::new(-s.m * x / s.k0, t);
    (s.sigma * s.sigma * z * z - s.k0 * x).exp() * C64::from_polar(1.0, -s.e0 * t)
}

/// `|psi|` of the closed form, `exp(sigma^2 (m^2 x^2 / k0^2 - t^2) - k0 x)`.
pub fn packet_first_order_modulus(x: f64, t: f64, s: &PacketSpec) -> f64 {
    (s.sigma * s.sigma * ((s.m * x / s.k0).powi(2) - t * t) - s.k0 * x).exp()
}

/// Gauss-Hermite rule for the spectral integral, restricted to evanescent energies.
#[derive(Debug, Clone)]
pub struct PacketQuadrature {
    spec: PacketSpec,
    /// `(E - E0, weight / sqrt(pi), k_E)` of the retained nodes.
    nodes: Vec<(f64, f64, f64)>,
}

impl PacketQuadrature {
    pub fn new(s: &PacketSpec, nodes: usize) -> Result<Self> {
        if nodes < MIN_NODES {
            return Err(Error::Quadrature(format!("need at least {MIN_NODES} nodes, got {nodes}")));
        }
        let lost = s.truncated_mass();
        if lost > TRUNCATION_LIMIT {
            return Err(Error::Quadrature(format!(
                "{lost:e} of the spectral mass lies above the barrier top (limit {TRUNCATION_LIMIT:e})"
            )));
        }
        let (u, w) = gauss_hermite(nodes);
        let norm = std::f64::consts::PI.sqrt();
        let kept = u
            .iter()
            .zip(&w)
            .filter_map(|(&u, &w)| {
                let eps = 2.0 * s.sigma * u;
                (s.e0 + eps < s.v0 + s.m).then(|| (eps, w / norm, s.k_of(s.e0 + eps)))
            })
            .collect();
        Ok(Self { spec: *s, nodes: kept })
    }

    pub fn eval(&self, x: f64, t: f64) -> C64 {
        let sum: C64 = self
            .nodes
            .iter()
            .map(|&(eps, w, k)| w * C64::from_polar((-k * x).exp(), -eps * t))
            .sum();
        sum * C64::from_polar(1.0, -self.spec.e0 * t)
    }
}

/// Spectral quadrature of the packet with weight `exp(-(E - E0)^2 / 4 sigma^2)`.
pub fn packet_quadrature(x: f64, t: f64, s: &PacketSpec, nodes: usize) -> Result<C64> {
    Ok(PacketQuadrature::new(s, nodes)?.eval(x, t))
}

/// Guidance velocity `-2 sigma^2 t / k0`.
pub fn packet_velocity(_x: f64, t: f64, s: &PacketSpec) -> f64 {
    -2.0 * s.sigma * s.sigma * t / s.k0
}

/// `int_{-tau}^0 |v| dt` with `tau = 1 / sigma`, which is `1 / k0`.
pub fn penetration_distance(s: &PacketSpec) -> f64 {
    let tau = 1.0 / s.sigma;
    s.sigma * s.sigma * tau * tau / s.k0
}

/// Closed-form trajectory `x(t) = x0 - (sigma^2 / k0)(t^2 - t_start^2)`.
pub fn packet_position(x0: f64, t_start: f64, t: f64, s: &PacketSpec) -> f64 {
    x0 - s.sigma * s.sigma / s.k0 * (t * t - t_start * t_start)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacketTrajectory {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

/// Samples the closed-form trajectory on `points` equally spaced times of `t_span`.
pub fn packet_trajectory(x0: f64, t_span: (f64, f64), points: usize, s: &PacketSpec) -> Result<PacketTrajectory> {
    if !(x0 >= 0.0) {
        return Err(Error::InvalidParameter { name: "x0", reason: format!("must be >= 0, got {x0}") });
    }
    if points < 2 || !(t_span.1 > t_span.0) {
        return Err(Error::InvalidParameter { name: "t_span", reason: "need t1 > t0 and >= 2 points".into() });
    }
    let dt = (t_span.1 - t_span.0) / (points - 1) as f64;
    let t: Vec<f64> = (0..points).map(|i| t_span.0 + i as f64 * dt).collect();
    let x = t.iter().map(|&ti| packet_position(x0, t_span.0, ti, s)).collect();
    let v = t.iter().map(|&ti| packet_velocity(0.0, ti, s)).collect();
    Ok(PacketTrajectory { t, x, v })
}

/// Fixed-step RK4 integration of `dx/dt = v(x, t)` from `(t0, x0)` to `t1`.
pub fn integrate_velocity_rk4(x0: f64, t0: f64, t1: f64, steps: usize, s: &PacketSpec) -> f64 {
    let dt = (t1 - t0) / steps as f64;
    let f = |x: f64, t: f64| packet_velocity(x, t, s);
    let mut x = x0;
    for i in 0..steps {
        let t = t0 + i as f64 * dt;
        let k1 = f(x, t);
        let k2 = f(x + 0.5 * dt * k1, t + 0.5 * dt);
        let k3 = f(x + 0.5 * dt * k2, t + 0.5 * dt);
        let k4 = f(x + dt * k3, t + dt);
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    x
}

/// Outer edge of the tabulated density, in decay lengths.
const DENSITY_EXTENT: f64 = 40.0;
const DENSITY_POINTS: usize = 200_001;

/// Normalized `|psi(., t)|^2` of the closed form on `[0, 40 L]`.
pub fn packet_density_cdf(t: f64, s: &PacketSpec) -> Result<TabulatedCdf> {
    let hi = DENSITY_EXTENT / s.k0;
    TabulatedCdf::from_fn(0.0, hi, DENSITY_POINTS, |x| packet_first_order_modulus(x, t, s).powi(2))
}

/// Weighted particle positions after Bohmian transport of the closed-form packet.
#[derive(Debug, Clone, Serialize)]
pub struct PacketEnsemble {
    /// `(x, weight)` of the particles still inside `x >= 0` at `t1`.
    pub particles: Vec<(f64, f64)>,
    /// Particles that entered through `x = 0` during `[t0, t1]`.
    pub injected: usize,
    /// Particles that left through `x = 0`.
    pub exited: usize,
    /// Surviving weight over the density mass `int |psi(x, t1)|^2 dx`.
    pub mass_ratio: f64,
}

/// Transports a Born-distributed ensemble from `t0` to `t1`.
///
/// The density on `x >= 0` changes only through the boundary current at
/// `x = 0`, so particles are also injected there while the current points
/// inward (`t < 0`), with entry times distributed as `j(0, t)`; particles
/// crossing back out are dropped. Every particle carries the same weight.
pub fn transport_ensemble(s: &PacketSpec, t0: f64, t1: f64, n: usize, seed: u64) -> Result<PacketEnsemble> {
    s.check_linear()?;
    if !(t1 > t0) || n == 0 {
        return Err(Error::InvalidParameter { name: "t1", reason: "need t1 > t0 and n > 0".into() });
    }
    let sig2 = s.sigma * s.sigma;
    let start = packet_density_cdf(t0, s)?;
    let bulk_shape: f64 = {
        let hi = DENSITY_EXTENT / s.k0;
        crate::quadrature::integrate_gl(|x| packet_first_order_modulus(x, 0.0, s).powi(2), 0.0, hi, 400, 10)
    };
    let g = |t: f64| (-2.0 * sig2 * t * t).exp();
    let mass0 = g(t0) * bulk_shape;
    let t_in = t1.min(0.0);
    let inflow = if t0 < 0.0 { (g(t_in) - g(t0)) / (2.0 * s.k0) } else { 0.0 };
    let total = mass0 + inflow;
    let n_in = ((n as f64) * inflow / total).round() as usize;
    let n_bulk = n - n_in;
    let weight = total / n as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut particles = Vec::with_capacity(n);
    let mut exited = 0;
    for _ in 0..n_bulk {
        let x = start.quantile(rng.random::<f64>());
        let x1 = x + sig2 / s.k0 * (t0 * t0 - t1 * t1);
        if x1 >= 0.0 {
            particles.push((x1, weight));
        } else {
            exited += 1;
        }
    }
    for _ in 0..n_in {
        // entry time uniform in g between g(t0) and g(t_in)
        let gv = g(t0) + rng.random::<f64>() * (g(t_in) - g(t0));
        let tau = -(-gv.ln() / (2.0 * sig2)).sqrt();
        let x1 = sig2 / s.k0 * (tau * tau - t1 * t1);
        if x1 >= 0.0 {
            particles.push((x1, weight));
        } else {
            exited += 1;
        }
    }
    let surviving: f64 = particles.iter().map(|p| p.1).sum();
    Ok(PacketEnsemble { particles, injected: n_in, exited, mass_ratio: surviving / (g(t1) * bulk_shape) })
}

/// KS distance of a transported ensemble against `|psi(., t1)|^2`.
pub fn packet_equivariance_ks(s: &PacketSpec, t0: f64, t1: f64, n: usize, seed: u64) -> Result<(f64, PacketEnsemble)> {
    let ens = transport_ensemble(s, t0, t1, n, seed)?;
    let target = packet_density_cdf(t1, s)?;
    Ok((weighted_ks(&ens.particles, |x| target.cdf(x)), ens))
}
