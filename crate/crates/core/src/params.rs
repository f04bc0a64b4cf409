//! Physical parameters and the internal unit system.
//!
//! Every formula in the crate is evaluated in natural units with `hbar = 1`
//! and `c = 1`, where `c` is the speed of light *in the resonator medium*.
//! Energies are measured in units of the photon effective rest energy `m`,
//! so a config-built [`CavityParams`] always has `m == 1`. Lengths are then
//! in units of `hbar c / m` and times in units of `hbar / m`; a velocity of
//! `1e-4` means `1e-4 c / n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant [eV s].
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;
/// `hbar * c` in vacuum [eV um].
pub const HBAR_C_EV_UM: f64 = 0.197_326_980_4;
/// Vacuum speed of light [km/s].
pub const C_KM_S: f64 = 299_792.458;

/// Largest `Gamma / m` accepted by operations that rely on the small-loss expansion.
pub const PERTURBATIVE_LIMIT: f64 = 1e-2;

/// Conversion factors from natural units to SI-flavoured lab units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    /// One natural energy unit in eV (the rest energy `m c^2`).
    pub energy_ev: f64,
    /// One natural length unit in micrometres.
    pub length_um: f64,
    /// One natural time unit in seconds.
    pub time_s: f64,
    /// One natural velocity unit (the medium light speed) in km/s.
    pub velocity_km_s: f64,
}

impl Units {
    pub fn new(m_ev: f64, n_medium: f64) -> Self {
        Self {
            energy_ev: m_ev,
            length_um: HBAR_C_EV_UM / (n_medium * m_ev),
            time_s: HBAR_EV_S / m_ev,
            velocity_km_s: C_KM_S / n_medium,
        }
    }

    pub fn energy_from_ev(&self, ev: f64) -> f64 {
        ev / self.energy_ev
    }

    pub fn energy_to_ev(&self, e: f64) -> f64 {
        e * self.energy_ev
    }

    pub fn length_from_um(&self, um: f64) -> f64 {
        um / self.length_um
    }

    pub fn length_to_um(&self, l: f64) -> f64 {
        l * self.length_um
    }

    /// Rate `hbar / tau` in natural energy units for a duration given in seconds.
    pub fn rate_from_duration_s(&self, seconds: f64) -> f64 {
        HBAR_EV_S / seconds / self.energy_ev
    }

    /// Duration in seconds whose inverse is the natural-units rate `rate`.
    pub fn duration_s_from_rate(&self, rate: f64) -> f64 {
        HBAR_EV_S / (rate * self.energy_ev)
    }

    pub fn velocity_to_km_s(&self, v: f64) -> f64 {
        v * self.velocity_km_s
    }
}

/// Lab-unit configuration document.
///
/// Either `E0_eV` (total energy including the rest energy) or `delta_over_J0`
/// must be supplied, not both.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct SiConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_eV: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub V0_eV: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub J0_eV: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifetime_ps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub E0_eV: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_over_J0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guide_separation_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub well_width_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub D0_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_medium: Option<f64>,
}

/// Calibrated defaults. None of the step height, coupling or operating energy
/// are published for the experiment; these are plausible values chosen so that
/// `Gamma / 2m = 1e-6` and `v_Delta = sqrt(-2 Delta / m) = 1e-2` at the default
/// offset `Delta = -2.5 J0`. The coupling sits below the largest splitting that
/// 6 um rectangular guides 20 um apart can produce while staying localized
/// (about `2.1e-5 m`).
pub mod defaults {
    /// Photon rest energy [eV]; makes a 270 ps lifetime give `Gamma / 2m = 1.0e-6`.
    pub const M_EV: f64 = 1.22;
    /// Step height [eV].
    pub const V0_EV: f64 = 1.0e-3;
    /// Coupling, `2e-5 m` [eV].
    pub const J0_EV: f64 = 2.0e-5 * M_EV;
    pub const LIFETIME_PS: f64 = 270.0;
    pub const PULSE_NS: f64 = 26.0;
    pub const DELTA_OVER_J0: f64 = -2.5;
    pub const GUIDE_SEPARATION_UM: f64 = 20.0;
    pub const WELL_WIDTH_UM: f64 = 6.0;
    pub const D0_UM: f64 = 15.0;
    pub const Q: u32 = 1;
    pub const N_MEDIUM: f64 = 1.4;
}

impl SiConfig {
    /// The calibrated default document.
    pub fn calibrated_default() -> Self {
        use defaults::*;
        Self {
            m_eV: Some(M_EV),
            V0_eV: Some(V0_EV),
            J0_eV: Some(J0_EV),
            lifetime_ps: Some(LIFETIME_PS),
            pulse_ns: Some(PULSE_NS),
            E0_eV: None,
            delta_over_J0: Some(DELTA_OVER_J0),
            guide_separation_um: Some(GUIDE_SEPARATION_UM),
            well_width_um: Some(WELL_WIDTH_UM),
            D0_um: Some(D0_UM),
            q: Some(Q),
            n_medium: Some(N_MEDIUM),
        }
    }
}

/// Regime of the longitudinal motion at a given energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Both `k+` and `k-` real (`Delta > J0`).
    Propagative,
    /// Exactly one of `k+-` real (`|Delta| <= J0`).
    Gap,
    /// Both wave vectors imaginary (`Delta < -J0`).
    Evanescent,
}

/// Physical parameters of the two-guide cavity in natural units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    /// Photon effective rest energy.
    pub m: f64,
    /// Height of the potential step at `x = 0`.
    pub v0: f64,
    /// Inter-guide coupling; the transverse splitting is `2 J0`.
    pub j0: f64,
    /// Radiative loss rate.
    pub gamma: f64,
    /// Dominant (total) energy of the pulse.
    pub e0: f64,
    /// Spectral half-width of the pulse.
    pub sigma: f64,
    /// Centre-to-centre distance of the guides.
    pub guide_separation: f64,
    /// Width of each guide (rectangular well).
    pub well_width: f64,
    /// Cavity height; recorded only, enters no formula.
    pub d0: f64,
    /// Longitudinal mode index; recorded only.
    pub q: u32,
    /// Refractive index; internal `c` is the medium speed so `n` enters only the units.
    pub n_medium: f64,
    pub units: Units,
}

impl Default for CavityParams {
    fn default() -> Self {
        Self::from_si(&SiConfig::calibrated_default()).expect("calibrated defaults are valid")
    }
}

impl CavityParams {
    pub fn from_si(cfg: &SiConfig) -> Result<Self> {
        let m_ev = cfg.m_eV.unwrap_or(defaults::M_EV);
        let n_medium = cfg.n_medium.unwrap_or(defaults::N_MEDIUM);
        if !(m_ev > 0.0) {
            return Err(invalid("m_eV", format!("must be positive, got {m_ev}")));
        }
        if !(n_medium > 0.0) {
            return Err(invalid("n_medium", format!("must be positive, got {n_medium}")));
        }
        let units = Units::new(m_ev, n_medium);

        let v0_ev = cfg.V0_eV.ok_or(Error::MissingField("V0_eV"))?;
        let j0_ev = cfg.J0_eV.ok_or(Error::MissingField("J0_eV"))?;
        let lifetime_ps = cfg.lifetime_ps.ok_or(Error::MissingField("lifetime_ps"))?;
        let pulse_ns = cfg.pulse_ns.ok_or(Error::MissingField("pulse_ns"))?;
        if !(j0_ev > 0.0) {
            return Err(invalid("J0_eV", format!("must be positive, got {j0_ev}")));
        }
        if !(lifetime_ps > 0.0) {
            return Err(invalid("lifetime_ps", format!("must be positive, got {lifetime_ps}")));
        }
        if !(pulse_ns > 0.0) {
            return Err(invalid("pulse_ns", format!("must be positive, got {pulse_ns}")));
        }

        let m = units.energy_from_ev(m_ev);
        let v0 = units.energy_from_ev(v0_ev);
        let j0 = units.energy_from_ev(j0_ev);
        let gamma = units.rate_from_duration_s(lifetime_ps * 1e-12);
        let sigma = units.rate_from_duration_s(pulse_ns * 1e-9);
        let e0 = match (cfg.E0_eV, cfg.delta_over_J0) {
            (Some(e0_ev), None) => units.energy_from_ev(e0_ev),
            (None, Some(ratio)) => m + v0 - j0 + ratio * j0,
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either E0_eV or delta_over_J0, not both".into(),
                ))
            }
            (None, None) => return Err(Error::MissingField("E0_eV | delta_over_J0")),
        };

        let params = Self {
            m,
            v0,
            j0,
            gamma,
            e0,
            sigma,
            guide_separation: units
                .length_from_um(cfg.guide_separation_um.unwrap_or(defaults::GUIDE_SEPARATION_UM)),
            well_width: units.length_from_um(cfg.well_width_um.unwrap_or(defaults::WELL_WIDTH_UM)),
            d0: units.length_from_um(cfg.D0_um.unwrap_or(defaults::D0_UM)),
            q: cfg.q.unwrap_or(defaults::Q),
            n_medium,
            units,
        };
        params.validate()?;
        Ok(params)
    }

    /// Inverse of [`CavityParams::from_si`]; the energy is always emitted as `E0_eV`.
    pub fn to_si(&self) -> SiConfig {
        let u = &self.units;
        SiConfig {
            m_eV: Some(u.energy_to_ev(self.m)),
            V0_eV: Some(u.energy_to_ev(self.v0)),
            J0_eV: Some(u.energy_to_ev(self.j0)),
            lifetime_ps: Some(u.duration_s_from_rate(self.gamma) * 1e12),
            pulse_ns: Some(u.duration_s_from_rate(self.sigma) * 1e9),
            E0_eV: Some(u.energy_to_ev(self.e0)),
            delta_over_J0: None,
            guide_separation_um: Some(u.length_to_um(self.guide_separation)),
            well_width_um: Some(u.length_to_um(self.well_width)),
            D0_um: Some(u.length_to_um(self.d0)),
            q: Some(self.q),
            n_medium: Some(self.n_medium),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0) {
            return Err(invalid("m", format!("must be positive, got {}", self.m)));
        }
        if !(self.j0 > 0.0) {
            return Err(invalid("J0", format!("must be positive, got {}", self.j0)));
        }
        if !(self.sigma > 0.0) {
            return Err(invalid("sigma", format!("must be positive, got {}", self.sigma)));
        }
        if !(self.gamma >= 0.0) {
            return Err(invalid("Gamma", format!("must be non-negative, got {}", self.gamma)));
        }
        if !self.v0.is_finite() || !self.e0.is_finite() {
            return Err(invalid("V0/E0", "must be finite".into()));
        }
        if !(self.guide_separation > self.well_width && self.well_width > 0.0) {
            return Err(invalid(
                "guide_separation",
                "need guide_separation > well_width > 0".into(),
            ));
        }
        Ok(())
    }

    /// Errors unless the small-loss expansion is trustworthy.
    pub fn require_perturbative(&self) -> Result<()> {
        let ratio = self.gamma / self.m;
        if ratio < PERTURBATIVE_LIMIT {
            Ok(())
        } else {
            Err(Error::NotPerturbative { ratio })
        }
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        Self { gamma, ..self.clone() }
    }

    pub fn with_j0(&self, j0: f64) -> Self {
        Self { j0, ..self.clone() }
    }

    /// Same parameters with the dominant energy placed at kinetic offset `delta`.
    pub fn with_delta(&self, delta: f64) -> Self {
        Self { e0: self.energy_at_delta(delta), ..self.clone() }
    }

    /// Total energy `E` whose kinetic offset is `delta`.
    pub fn energy_at_delta(&self, delta: f64) -> f64 {
        delta + self.m + self.v0 - self.j0
    }

    /// Transverse energies `(E+, E-) = (V0, V0 - 2 J0)`.
    pub fn transverse_energies(&self) -> (f64, f64) {
        (self.v0, self.v0 - 2.0 * self.j0)
    }

    /// Kinetic offset of the dominant energy.
    pub fn delta0(&self) -> f64 {
        kinetic_offset(self.e0, self)
    }

    /// SHA-256 of the canonical JSON encoding, hex encoded.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let bytes = serde_json::to_vec(self).expect("params serialize");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// Energy together with its kinetic offset. `delta` is always derived from `e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyPoint {
    e: f64,
    delta: f64,
}

impl EnergyPoint {
    pub fn new(e: f64, p: &CavityParams) -> Self {
        Self { e, delta: kinetic_offset(e, p) }
    }

    pub fn from_delta(delta: f64, p: &CavityParams) -> Self {
        Self::new(p.energy_at_delta(delta), p)
    }

    pub fn e(&self) -> f64 {
        self.e
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// `Delta = E - m - V0 + J0`.
pub fn kinetic_offset(e: f64, p: &CavityParams) -> f64 {
    e - p.m - p.v0 + p.j0
}

/// Boundary values `Delta = +-J0` map to [`Regime::Gap`].
pub fn regime_of(e: f64, p: &CavityParams) -> Regime {
    let delta = kinetic_offset(e, p);
    if delta < -p.j0 {
        Regime::Evanescent
    } else if delta > p.j0 {
        Regime::Propagative
    } else {
        Regime::Gap
    }
}

/// Parses and validates a JSON configuration document.
pub fn load_config(source: &str) -> Result<CavityParams> {
    let cfg: SiConfig = serde_json::from_str(source)?;
    CavityParams::from_si(&cfg)
}

fn invalid(name: &'static str, reason: String) -> Error {
    Error::InvalidParameter { name, reason }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn lifetime_and_pulse_conversions() {
        // hbar / 270 ps and hbar / 26 ns in eV, by direct division.
        let gamma_ev = 6.582e-16 / 270e-12;
        let sigma_ev = 6.582e-16 / 26e-9;
        assert_relative_eq!(gamma_ev, 2.437e-6, max_relative = 1e-3);
        assert_relative_eq!(sigma_ev, 2.53e-8, max_relative = 2e-3);

        let p = CavityParams::default();
        assert_relative_eq!(p.units.energy_to_ev(p.gamma), HBAR_EV_S / 270e-12, max_relative = 1e-12);
        assert_relative_eq!(p.units.energy_to_ev(p.sigma), HBAR_EV_S / 26e-9, max_relative = 1e-12);
    }

    #[test]
    fn default_loss_ratio_is_one_in_a_million() {
        let p = CavityParams::default();
        assert_eq!(p.m, 1.0);
        // independent recomputation from SI constants
        let ratio = (6.582_119_569e-16 / 270e-12) / (2.0 * 1.22);
        assert_relative_eq!(p.gamma / (2.0 * p.m), ratio, max_relative = 1e-12);
        assert!((ratio - 1.0e-6).abs() < 1e-8);
    }

    #[test]
    fn kinetic_offset_definition() {
        let p = CavityParams::default();
        assert!(kinetic_offset(p.m + p.v0 - p.j0, &p).abs() < 1e-15);
        assert_relative_eq!(kinetic_offset(p.m + p.v0, &p), p.j0, max_relative = 1e-9);
        let d = kinetic_offset(p.m + p.v0 - 3.0 * p.j0, &p);
        assert_relative_eq!(d, -2.0 * p.j0, max_relative = 1e-9);
        assert_relative_eq!(p.delta0(), -2.5 * p.j0, max_relative = 1e-9);
        // v_Delta = sqrt(-2 Delta / m) = 1e-2 at the default point
        assert_relative_eq!((-2.0 * p.delta0() / p.m).sqrt(), 1e-2, max_relative = 1e-9);
    }

    #[test]
    fn regimes() {
        let p = CavityParams::default();
        let at = |r: f64| regime_of(p.energy_at_delta(r * p.j0), &p);
        assert_eq!(at(-2.0), Regime::Evanescent);
        assert_eq!(at(2.0), Regime::Propagative);
        assert_eq!(at(0.0), Regime::Gap);
        // exact boundaries, with binary-representable values
        let exact = CavityParams { v0: 0.0, m: 1.0, j0: 0.25, ..p.clone() };
        assert_eq!(regime_of(exact.m + exact.v0 - 2.0 * exact.j0, &exact), Regime::Gap);
        assert_eq!(regime_of(exact.m + exact.v0, &exact), Regime::Gap);
    }

    #[test]
    fn energy_point_derives_delta() {
        let p = CavityParams::default();
        let ep = EnergyPoint::from_delta(-3.0 * p.j0, &p);
        assert_relative_eq!(ep.delta(), -3.0 * p.j0, max_relative = 1e-9);
        assert_eq!(ep.e(), p.energy_at_delta(-3.0 * p.j0));
    }

    #[test]
    fn config_errors() {
        assert!(matches!(load_config("{}"), Err(Error::MissingField("V0_eV"))));
        let base = r#""V0_eV":0.001,"lifetime_ps":270,"pulse_ns":26,"delta_over_J0":-2"#;
        let missing_j0 = format!("{{{base}}}");
        assert!(matches!(load_config(&missing_j0), Err(Error::MissingField("J0_eV"))));
        let neg_j0 = format!("{{{base},\"J0_eV\":-1e-5}}");
        assert!(matches!(load_config(&neg_j0), Err(Error::InvalidParameter { name: "J0_eV", .. })));
        let neg_m = format!("{{{base},\"J0_eV\":1e-5,\"m_eV\":0}}");
        assert!(matches!(load_config(&neg_m), Err(Error::InvalidParameter { name: "m_eV", .. })));
        let bad_life = r#"{"V0_eV":0.001,"J0_eV":1e-5,"lifetime_ps":-3,"pulse_ns":26,"delta_over_J0":-2}"#;
        assert!(load_config(bad_life).is_err());
        let both = format!("{{{base},\"J0_eV\":1e-5,\"E0_eV\":1.2}}");
        assert!(matches!(load_config(&both), Err(Error::Config(_))));
        let unknown = format!("{{{base},\"J0_eV\":1e-5,\"bogus\":1}}");
        assert!(load_config(&unknown).is_err());
        let ok = format!("{{{base},\"J0_eV\":3.05e-5}}");
        let p = load_config(&ok).unwrap();
        assert_eq!(p.m, 1.0);
    }

    #[test]
    fn perturbative_guard() {
        let p = CavityParams::default();
        assert!(p.require_perturbative().is_ok());
        assert!(p.with_gamma(0.02).require_perturbative().is_err());
    }

    proptest! {
        #[test]
        fn si_round_trip(
            m_ev in 0.5f64..3.0,
            v0 in -1e-2f64..1e-2,
            j0 in 1e-6f64..1e-3,
            life in 1.0f64..1e4,
            pulse in 0.1f64..100.0,
            e0 in 0.5f64..3.0,
            sep in 10.0f64..40.0,
            n in 1.0f64..3.0,
        ) {
            let cfg = SiConfig {
                m_eV: Some(m_ev), V0_eV: Some(v0), J0_eV: Some(j0), lifetime_ps: Some(life),
                pulse_ns: Some(pulse), E0_eV: Some(e0), delta_over_J0: None,
                guide_separation_um: Some(sep), well_width_um: Some(sep / 4.0),
                D0_um: Some(15.0), q: Some(2), n_medium: Some(n),
            };
            let p = CavityParams::from_si(&cfg).unwrap();
            let q = CavityParams::from_si(&p.to_si()).unwrap();
            let pairs = [
                (p.m, q.m), (p.v0, q.v0), (p.j0, q.j0), (p.gamma, q.gamma), (p.e0, q.e0),
                (p.sigma, q.sigma), (p.guide_separation, q.guide_separation),
                (p.well_width, q.well_width), (p.d0, q.d0), (p.n_medium, q.n_medium),
            ];
            for (a, b) in pairs {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
            }
        }
    }
}
