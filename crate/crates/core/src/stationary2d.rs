//! Stationary two-guide field with radiative leakage.
//!
//! Past the step (`x >= 0`) the field is the superposition
//! `(Phi+ e^{i k+ x} + Phi- e^{i k- x}) / sqrt 2`, which with
//! `k1 = (k- - k+)/2`, `k2 = (k- + k+)/2` reads
//!
//! ```text
//! Psi(x, y) = A e^{i k2 x} [cos(k1 x) Phi_m(y) + i sin(k1 x) Phi_a(y)].
//! ```
//!
//! In the lossless evanescent regime `k1 = -i kappa1`, `k2 = i kappa2` with
//! `kappa1, kappa2 > 0`, and the field becomes the real form
//! `e^{-kappa2 x} [cosh(kappa1 x) Phi_m + sinh(kappa1 x) Phi_a]`.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::eigenmodes::{ModeProfiles, ModeValues};
use crate::oracle::{continuity_grid_check, ContinuityReport, FluxField, Grid2D};
use crate::error::{Error, Result};
use crate::params::{kinetic_offset, CavityParams, PERTURBATIVE_LIMIT};

/// Relative floor on `|Psi|^2` below which the guidance law is not evaluated.
pub const NODAL_FLOOR: f64 = 1e-30;

/// Complex longitudinal wave vectors at one energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Wavevectors {
    pub k_plus: C64,
    pub k_minus: C64,
    /// `(k- - k+) / 2`
    pub k1: C64,
    /// `(k- + k+) / 2`
    pub k2: C64,
    pub m: f64,
    pub j0: f64,
    /// Set when a branch point was hit exactly with `Gamma = 0`.
    pub degenerate: bool,
}

impl Wavevectors {
    /// `kappa1 = i k1`; real and positive in the lossless evanescent regime.
    pub fn kappa1(&self) -> C64 {
        C64::i() * self.k1
    }

    /// `kappa2 = -i k2`; real and positive in the lossless evanescent regime.
    pub fn kappa2(&self) -> C64 {
        -C64::i() * self.k2
    }

    /// Both `k+-` purely imaginary (lossless evanescent case).
    pub fn is_evanescent(&self) -> bool {
        self.k_plus.re == 0.0 && self.k_minus.re == 0.0 && !self.degenerate
    }
}

/// `sqrt(z)` on the branch with `Im >= 0` (decaying `e^{ikx}` for `x -> +inf`).
pub fn decaying_sqrt(z: C64) -> C64 {
    if z.im == 0.0 && z.re < 0.0 {
        // avoid the sign of a negative zero imaginary part picking the wrong side
        return C64::new(0.0, (-z.re).sqrt());
    }
    let r = z.sqrt();
    if r.im < 0.0 {
        -r
    } else {
        r
    }
}

/// Wave vectors for total energy `e`, transverse levels `(e_plus, e_minus)` and loss `gamma`.
pub fn wavevectors_for_levels(e: f64, m: f64, e_plus: f64, e_minus: f64, gamma: f64) -> Result<Wavevectors> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidParameter { name: "gamma", reason: format!("must be >= 0, got {gamma}") });
    }
    let arg = |level: f64| C64::new(2.0 * m * (e - level - m), m * gamma);
    let (ap, am) = (arg(e_plus), arg(e_minus));
    let degenerate = gamma == 0.0 && (ap.re == 0.0 || am.re == 0.0);
    let k_plus = decaying_sqrt(ap);
    let k_minus = decaying_sqrt(am);
    Ok(Wavevectors {
        k_plus,
        k_minus,
        k1: 0.5 * (k_minus - k_plus),
        k2: 0.5 * (k_minus + k_plus),
        m,
        j0: 0.5 * (e_plus - e_minus),
        degenerate,
    })
}

/// `k+- = sqrt(2m (E - E+- + i Gamma/2 - m))` with `(E+, E-) = (V0, V0 - 2 J0)`.
pub fn wavevectors(e: f64, p: &CavityParams, gamma: f64) -> Result<Wavevectors> {
    let (ep, em) = p.transverse_energies();
    wavevectors_for_levels(e, p.m, ep, em, gamma)
}

/// First-order small-loss wave vector `k0 + i m Gamma / (2 k0)` from the lossless one.
pub fn perturbative_k(k0: C64, m: f64, gamma: f64) -> C64 {
    k0 + C64::i() * m * gamma / (2.0 * k0)
}

/// Leakage drift `(Gamma / 2m) / v_Delta` with `v_Delta = sqrt(-2 Delta / m)`.
pub fn leakage_velocity_estimate(delta: f64, p: &CavityParams) -> Result<f64> {
    if !(delta < -p.j0) {
        return Err(Error::NotEvanescent { delta_over_j0: delta / p.j0 });
    }
    p.require_perturbative()?;
    debug_assert!(p.gamma / p.m < PERTURBATIVE_LIMIT);
    let v_delta = (-2.0 * delta / p.m).sqrt();
    Ok(p.gamma / (2.0 * p.m) / v_delta)
}

/// Field value with its gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub psi: C64,
    pub dpsi_dx: C64,
    pub dpsi_dy: C64,
}

impl FieldSample {
    pub fn density(&self) -> f64 {
        self.psi.norm_sqr()
    }
}

/// Evaluator of `Psi(x, y)` and its guidance field.
#[derive(Debug, Clone)]
pub struct Field2D {
    k: Wavevectors,
    profiles: Arc<ModeProfiles>,
    amplitude: C64,
    energy: f64,
    gamma: f64,
    /// `|Psi|^2` scale used by the nodal guard.
    reference_density: f64,
    mirrored: bool,
}

impl Field2D {
    pub fn new(profiles: Arc<ModeProfiles>, k: Wavevectors, energy: f64, gamma: f64) -> Self {
        let reference_density = peak_main_density(&profiles);
        Self { k, profiles, amplitude: C64::new(1.0, 0.0), energy, gamma, reference_density, mirrored: false }
    }

    /// The field with the guide labels swapped, i.e. light injected into the
    /// guide at `+separation/2`. By the parity of `Phi+-` this equals the
    /// original reflected through `y = 0`.
    pub fn mirrored(&self) -> Self {
        Self { mirrored: !self.mirrored, ..self.clone() }
    }

    pub fn wavevectors(&self) -> &Wavevectors {
        &self.k
    }

    pub fn profiles(&self) -> &ModeProfiles {
        &self.profiles
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn m(&self) -> f64 {
        self.k.m
    }

    pub fn half_width(&self) -> f64 {
        self.profiles.half_width()
    }

    /// Characteristic longitudinal length `min(1/|k1|, 1/|k2|)`.
    pub fn length_scale(&self) -> f64 {
        let inv = |z: C64| if z.norm() > 0.0 { 1.0 / z.norm() } else { f64::INFINITY };
        inv(self.k.k1).min(inv(self.k.k2))
    }

    pub fn nodal_floor(&self) -> f64 {
        NODAL_FLOOR * self.reference_density
    }

    fn modes(&self, y: f64) -> ModeValues {
        if self.mirrored {
            let v = self.profiles.eval(y);
            ModeValues { phi_m: v.phi_a, phi_a: v.phi_m, dphi_m: v.dphi_a, dphi_a: v.dphi_m }
        } else {
            self.profiles.eval(y)
        }
    }

    /// Mode coefficients `(c_m, c_a)` with `Psi = c_m Phi_m + c_a Phi_a`.
    pub fn coefficients(&self, x: f64) -> (C64, C64) {
        let carrier = self.amplitude * (C64::i() * self.k.k2 * x).exp();
        let arg = self.k.k1 * x;
        (carrier * arg.cos(), carrier * C64::i() * arg.sin())
    }

    pub fn field(&self, x: f64, y: f64) -> C64 {
        let (cm, ca) = self.coefficients(x);
        let v = self.modes(y);
        cm * v.phi_m + ca * v.phi_a
    }

    /// `Psi` and its analytic gradient.
    pub fn sample(&self, x: f64, y: f64) -> FieldSample {
        let carrier = self.amplitude * (C64::i() * self.k.k2 * x).exp();
        let arg = self.k.k1 * x;
        let (c, s) = (arg.cos(), arg.sin());
        let v = self.modes(y);
        let inner = c * v.phi_m + C64::i() * s * v.phi_a;
        let d_inner = self.k.k1 * (-s * v.phi_m + C64::i() * c * v.phi_a);
        FieldSample {
            psi: carrier * inner,
            dpsi_dx: carrier * (C64::i() * self.k.k2 * inner + d_inner),
            dpsi_dy: carrier * (c * v.dphi_m + C64::i() * s * v.dphi_a),
        }
    }

    /// Real cosh/sinh form, available only in the lossless evanescent regime.
    pub fn real_form(&self, x: f64, y: f64) -> Option<f64> {
        if self.gamma != 0.0 || !self.k.is_evanescent() {
            return None;
        }
        let (k1, k2) = (self.k.kappa1().re, self.k.kappa2().re);
        let v = self.modes(y);
        Some(self.amplitude.re * (-k2 * x).exp() * ((k1 * x).cosh() * v.phi_m + (k1 * x).sinh() * v.phi_a))
    }

    /// Bohmian velocity `Im(grad Psi / Psi) / m` from the closed-form gradient.
    ///
    /// The carrier phase drops out of `grad Psi / Psi`; only its modulus
    /// enters, through the nodal test.
    pub fn velocity(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let v = self.modes(y);
        let z = (C64::i() * self.k.k1 * x).exp();
        let zi = z.inv();
        let (c, s) = (0.5 * (z + zi), C64::new(0.0, -0.5) * (z - zi));
        let inner = c * v.phi_m + C64::i() * s * v.phi_a;
        let modulus = (self.amplitude * (C64::i() * self.k.k2 * x).exp()).norm_sqr();
        if !(modulus * inner.norm_sqr() > self.nodal_floor()) {
            return Err(Error::Nodal { x, y });
        }
        let dx = self.k.k1 * (-s * v.phi_m + C64::i() * c * v.phi_a);
        let dy = c * v.dphi_m + C64::i() * s * v.dphi_a;
        let m = self.k.m;
        Ok(((self.k.k2.re + (dx / inner).im) / m, (dy / inner).im / m))
    }

    /// `v_x(0, y) = Re[k2]/m + Re[k1] Phi_a / (m Phi_m)` (and `v_y(0, y) = 0`).
    pub fn velocity_at_entrance(&self, y: f64) -> Result<f64> {
        let v = self.modes(y);
        if !(v.phi_m * v.phi_m > self.nodal_floor()) {
            return Err(Error::Nodal { x: 0.0, y });
        }
        Ok((self.k.k2.re + self.k.k1.re * v.phi_a / v.phi_m) / self.k.m)
    }

    /// Probability current `Im(Psi* grad Psi) / m`; regular at nodes.
    pub fn flux(&self, x: f64, y: f64) -> (f64, f64) {
        let s = self.sample(x, y);
        let m = self.k.m;
        ((s.psi.conj() * s.dpsi_dx).im / m, (s.psi.conj() * s.dpsi_dy).im / m)
    }

    pub fn density(&self, x: f64, y: f64) -> f64 {
        self.field(x, y).norm_sqr()
    }

    /// Sign of `y` on the auxiliary-guide side.
    pub fn aux_sign(&self) -> f64 {
        if self.mirrored {
            -1.0
        } else {
            1.0
        }
    }
}

impl FluxField for Field2D {
    fn current(&self, x: f64, y: f64) -> (f64, f64) {
        self.flux(x, y)
    }

    /// Leakage removes probability at the rate `Gamma |Psi|^2`.
    fn sink(&self, x: f64, y: f64) -> f64 {
        self.gamma * self.density(x, y)
    }
}

/// Central-difference residual of `div j + Gamma |Psi|^2 = 0` over `grid`.
pub fn continuity_residual(field: &Field2D, grid: &Grid2D) -> ContinuityReport {
    continuity_grid_check(field, grid)
}

fn peak_main_density(profiles: &ModeProfiles) -> f64 {
    let l = profiles.half_width();
    let n = 4001;
    (0..n)
        .map(|i| {
            let y = -l + 2.0 * l * i as f64 / (n - 1) as f64;
            profiles.eval(y).phi_m.powi(2)
        })
        .fold(0.0, f64::max)
}

/// Regime bookkeeping shared by callers that take a kinetic offset.
pub fn energy_for_delta(delta: f64, p: &CavityParams) -> f64 {
    let e = p.energy_at_delta(delta);
    debug_assert!((kinetic_offset(e, p) - delta).abs() <= 1e-9 * p.j0.max(delta.abs()));
    e
}
