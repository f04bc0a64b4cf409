//! End-to-end assembly: parameters -> calibrated double well -> guide modes -> fields.

use std::sync::Arc;

use serde::Serialize;

use crate::eigenmodes::{
    calibrate_j0, GridSpec, ModeBasis, ModeProfiles, RectangularModes, SplineModes, WellGeometry, WellShape,
};
use crate::error::Result;
use crate::params::CavityParams;
use crate::stationary2d::{wavevectors, Field2D};

/// Relative tolerance of the depth calibration against the target `J0`.
pub const CALIBRATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelOptions {
    pub shape: WellShape,
    pub grid_points: usize,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self { shape: WellShape::Rectangular, grid_points: 2001 }
    }
}

/// A calibrated cavity: geometry, finite-difference basis and continuous mode profiles.
///
/// The field-facing parameters [`CavityModel::params`] carry the coupling of the
/// continuous profiles, so `k1 k2 = m J0` holds with the same `J0` that splits
/// the modes actually used to build `Psi`.
#[derive(Debug, Clone)]
pub struct CavityModel {
    requested: CavityParams,
    params: CavityParams,
    pub geometry: WellGeometry,
    pub basis: ModeBasis,
    profiles: Arc<ModeProfiles>,
}

impl CavityModel {
    pub fn build(params: &CavityParams, options: ModelOptions) -> Result<Self> {
        params.validate()?;
        let template = WellGeometry {
            plateau: params.v0,
            well_depth: 0.0,
            well_width: params.well_width,
            separation: params.guide_separation,
            shape: options.shape,
        };
        let grid = GridSpec::for_geometry(&template, options.grid_points);
        let (geometry, basis) = calibrate_j0(&template, &grid, params.m, params.j0, CALIBRATION_TOL)?;
        let (profiles, e_plus, e_minus) = match options.shape {
            WellShape::Rectangular => {
                let exact = RectangularModes::refine(&geometry, &basis, params.m)?;
                let (ep, em) = (exact.e_plus(), exact.e_minus());
                (ModeProfiles::Exact(exact), ep, em)
            }
            WellShape::Parabolic => {
                (ModeProfiles::Spline(SplineModes::from_basis(&basis)?), basis.e_plus, basis.e_minus)
            }
        };
        // E+ is pinned to V0; only the splitting of the profile set matters downstream
        let ratio = params.delta0() / params.j0;
        let field_params = params.with_j0(0.5 * (e_plus - e_minus));
        let field_params = field_params.with_delta(ratio * field_params.j0);
        Ok(Self { requested: params.clone(), params: field_params, geometry, basis, profiles: Arc::new(profiles) })
    }

    /// Parameters as requested by the caller.
    pub fn requested(&self) -> &CavityParams {
        &self.requested
    }

    /// Parameters seen by the field: coupling of the continuous profiles, same `Delta0 / J0`.
    pub fn params(&self) -> &CavityParams {
        &self.params
    }

    pub fn profiles(&self) -> Arc<ModeProfiles> {
        Arc::clone(&self.profiles)
    }

    /// Field at kinetic offset `delta` with loss rate `gamma`.
    pub fn field_at_delta(&self, delta: f64, gamma: f64) -> Result<Field2D> {
        let e = self.params.energy_at_delta(delta);
        Ok(Field2D::new(self.profiles(), wavevectors(e, &self.params, gamma)?, e, gamma))
    }

    /// Field at `Delta = ratio * J0`.
    pub fn field_at_ratio(&self, delta_over_j0: f64, gamma: f64) -> Result<Field2D> {
        self.field_at_delta(delta_over_j0 * self.params.j0, gamma)
    }
}
