//! Transverse double-well eigenproblem.
//!
//! The main guide sits at `y = -separation / 2` and the auxiliary guide at
//! `y = +separation / 2`. Sign conventions for the mode pair:
//!
//! * `Phi-` (ground, energy `E-`) is symmetric and positive.
//! * `Phi+` (energy `E+ > E-`) is antisymmetric and positive on the main side.
//! * `Phi_m = (Phi- + Phi+) / sqrt 2` is positive in the main guide,
//!   `Phi_a = (Phi- - Phi+) / sqrt 2` is positive in the auxiliary guide.

mod analytic;
mod profiles;
mod tridiag;

pub use analytic::RectangularModes;
pub use profiles::{CubicSpline, ModeProfiles, ModeValues, SplineModes};
pub use tridiag::SymTridiagonal;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::trapezoid;

/// Minimum localisation of a hybridized mode in its own guide.
pub const MIN_LOCALIZATION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WellShape {
    #[default]
    Rectangular,
    Parabolic,
}

/// Geometry of two identical wells carved below the plateau `V0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellGeometry {
    pub plateau: f64,
    pub well_depth: f64,
    pub well_width: f64,
    pub separation: f64,
    pub shape: WellShape,
}

impl WellGeometry {
    pub fn main_center(&self) -> f64 {
        -0.5 * self.separation
    }

    pub fn aux_center(&self) -> f64 {
        0.5 * self.separation
    }

    /// Smallest admissible Dirichlet half-width.
    pub fn min_half_width(&self) -> f64 {
        self.separation + 5.0 * self.well_width
    }

    fn check(&self) -> Result<()> {
        if !(self.well_width > 0.0) {
            return Err(Error::Geometry("well width must be positive".into()));
        }
        if !(self.separation > self.well_width) {
            return Err(Error::Geometry(format!(
                "wells overlap: separation {} <= width {}",
                self.separation, self.well_width
            )));
        }
        if !(self.well_depth >= 0.0) {
            return Err(Error::Geometry("well depth must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_width: f64,
    pub points: usize,
}

impl GridSpec {
    /// Grid spanning the minimum admissible half-width.
    pub fn for_geometry(geometry: &WellGeometry, points: usize) -> Self {
        Self { half_width: geometry.min_half_width(), points }
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }
}

/// Potential sampled on a uniform symmetric grid with Dirichlet ends.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialGrid {
    y: Vec<f64>,
    v: Vec<f64>,
    h: f64,
}

impl PotentialGrid {
    pub fn new(y: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let n = y.len();
        if n < 3 || v.len() != n {
            return Err(Error::Geometry("grid needs at least 3 points and matching V".into()));
        }
        let h = (y[n - 1] - y[0]) / (n - 1) as f64;
        if !(h > 0.0) {
            return Err(Error::Geometry("grid must be increasing".into()));
        }
        for (i, yi) in y.iter().enumerate() {
            if (yi - (y[0] + i as f64 * h)).abs() > 1e-9 * h {
                return Err(Error::Geometry(format!("non-uniform spacing at index {i}")));
            }
        }
        if (y[0] + y[n - 1]).abs() > 1e-9 * h {
            return Err(Error::Geometry("grid must be symmetric about y = 0".into()));
        }
        let scale = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for i in 0..n / 2 {
            let dev = (v[i] - v[n - 1 - i]).abs();
            if dev > 1e-12 * scale {
                return Err(Error::AsymmetricPotential { index: i, deviation: dev });
            }
        }
        Ok(Self { y, v, h })
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn half_width(&self) -> f64 {
        self.y[self.y.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Finite-difference Hamiltonian on the interior nodes.
    pub fn hamiltonian(&self, m: f64) -> SymTridiagonal {
        let n = self.len();
        let kin = 1.0 / (2.0 * m * self.h * self.h);
        let diag = self.v[1..n - 1].iter().map(|v| 2.0 * kin + v).collect();
        let off = vec![-kin; n - 3];
        SymTridiagonal::new(diag, off)
    }
}

/// Two rectangular (or parabolic) wells of depth `well_depth` below `plateau`.
///
/// Rectangular wells are cell averaged, which keeps the eigenvalue error
/// second order in the spacing even though the potential jumps.
pub fn build_double_well(geometry: &WellGeometry, grid: &GridSpec) -> Result<PotentialGrid> {
    geometry.check()?;
    if grid.points < 501 {
        return Err(Error::Geometry(format!("need at least 501 grid points, got {}", grid.points)));
    }
    if grid.half_width < geometry.min_half_width() * (1.0 - 1e-12) {
        return Err(Error::Geometry(format!(
            "half-width {} below separation + 5 * width = {}",
            grid.half_width,
            geometry.min_half_width()
        )));
    }
    let h = grid.spacing();
    if geometry.well_width / h < 20.0 {
        return Err(Error::Geometry(format!(
            "grid too coarse: {:.1} points per well (need 20)",
            geometry.well_width / h
        )));
    }
    let n = grid.points;
    let y: Vec<f64> = (0..n)
        .map(|i| {
            // mirror-exact construction
            let j = i as f64 - 0.5 * (n - 1) as f64;
            j * h
        })
        .collect();
    let half = 0.5 * geometry.well_width;
    // built from |y| around the +y well, so both wells are exact mirror images
    let c = geometry.aux_center();
    let v: Vec<f64> = y
        .iter()
        .map(|&yi| {
            let yi_abs = yi.abs();
            let depth_frac = match geometry.shape {
                WellShape::Rectangular => {
                    let lo = yi_abs - 0.5 * h;
                    let hi = yi_abs + 0.5 * h;
                    let overlap = (hi.min(c + half) - lo.max(c - half)).max(0.0);
                    overlap / h
                }
                WellShape::Parabolic => {
                    let u = (yi_abs - c) / half;
                    (1.0 - u * u).max(0.0)
                }
            };
            geometry.plateau - geometry.well_depth * depth_frac
        })
        .collect();
    PotentialGrid::new(y, v)
}

/// Hybridized guide modes and their localisation.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridModes {
    pub phi_m: Vec<f64>,
    pub phi_a: Vec<f64>,
    /// Fraction of `|Phi_m|^2` on the main-guide half-plane `y < 0`.
    pub main_fraction: f64,
}

/// Lowest symmetric/antisymmetric pair of the transverse problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBasis {
    pub y: Vec<f64>,
    pub v: Vec<f64>,
    pub phi_plus: Vec<f64>,
    pub phi_minus: Vec<f64>,
    pub e_plus: f64,
    pub e_minus: f64,
    pub hybrid: Option<HybridModes>,
}

impl ModeBasis {
    /// Assembles a basis from raw (unnormalized) eigenvectors on the full grid,
    /// applying the normalisation and sign conventions and checking the node law.
    pub fn from_raw(
        pot: &PotentialGrid,
        e_minus: f64,
        mut phi_minus: Vec<f64>,
        e_plus: f64,
        mut phi_plus: Vec<f64>,
    ) -> Result<Self> {
        let h = pot.spacing();
        normalize(&mut phi_minus, h);
        // Gram-Schmidt against the ground state, then renormalise
        let overlap = inner(&phi_plus, &phi_minus, h);
        phi_plus.iter_mut().zip(&phi_minus).for_each(|(p, q)| *p -= overlap * q);
        normalize(&mut phi_plus, h);

        if phi_minus.iter().sum::<f64>() < 0.0 {
            phi_minus.iter_mut().for_each(|v| *v = -*v);
        }
        let n = phi_plus.len();
        let main_side: f64 = phi_plus[..n / 2].iter().sum();
        if main_side < 0.0 {
            phi_plus.iter_mut().for_each(|v| *v = -*v);
        }

        let nodes_minus = interior_nodes(&phi_minus);
        let nodes_plus = interior_nodes(&phi_plus);
        if nodes_minus != 0 || nodes_plus != 1 {
            return Err(Error::ModeStructure(format!(
                "lowest pair is not symmetric/antisymmetric: {nodes_minus} and {nodes_plus} interior nodes"
            )));
        }
        if !(e_minus < e_plus) {
            return Err(Error::ModeStructure(format!("E- = {e_minus} not below E+ = {e_plus}")));
        }
        Ok(Self {
            y: pot.y().to_vec(),
            v: pot.v().to_vec(),
            phi_plus,
            phi_minus,
            e_plus,
            e_minus,
            hybrid: None,
        })
    }

    pub fn spacing(&self) -> f64 {
        self.y[1] - self.y[0]
    }

    /// Effective coupling `(E+ - E-) / 2`.
    pub fn j0_eff(&self) -> f64 {
        0.5 * (self.e_plus - self.e_minus)
    }

    /// Mean level `(E+ + E-) / 2`.
    pub fn e0_eff(&self) -> f64 {
        0.5 * (self.e_plus + self.e_minus)
    }

    pub fn phi_m(&self) -> Option<&[f64]> {
        self.hybrid.as_ref().map(|h| h.phi_m.as_slice())
    }

    pub fn phi_a(&self) -> Option<&[f64]> {
        self.hybrid.as_ref().map(|h| h.phi_a.as_slice())
    }
}

/// Lowest two eigenpairs of the finite-difference Hamiltonian.
pub fn solve_modes(pot: &PotentialGrid, m: f64) -> Result<ModeBasis> {
    let ham = pot.hamiltonian(m);
    let e0 = ham.eigenvalue(0)?;
    let e1 = ham.eigenvalue(1)?;
    let pad = |inner: Vec<f64>| {
        let mut full = Vec::with_capacity(inner.len() + 2);
        full.push(0.0);
        full.extend(inner);
        full.push(0.0);
        full
    };
    let v0 = pad(ham.eigenvector(e0)?);
    let v1 = pad(ham.eigenvector(e1)?);
    ModeBasis::from_raw(pot, e0, v0, e1, v1)
}

/// Fills `Phi_m`, `Phi_a` and enforces the localisation invariant.
pub fn hybridize(basis: &ModeBasis) -> Result<ModeBasis> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let phi_m: Vec<f64> =
        basis.phi_minus.iter().zip(&basis.phi_plus).map(|(a, b)| s * (a + b)).collect();
    let phi_a: Vec<f64> =
        basis.phi_minus.iter().zip(&basis.phi_plus).map(|(a, b)| s * (a - b)).collect();
    let main_fraction = half_plane_fraction(&phi_m, basis.spacing());
    if main_fraction < MIN_LOCALIZATION {
        return Err(Error::Delocalized { fraction: main_fraction });
    }
    Ok(ModeBasis {
        hybrid: Some(HybridModes { phi_m, phi_a, main_fraction }),
        ..basis.clone()
    })
}

/// Bisects the well depth until the finite-difference `J0_eff` equals `target_j0`
/// to `rel_tol`. Returns the calibrated geometry and its hybridized basis.
pub fn calibrate_j0(
    template: &WellGeometry,
    grid: &GridSpec,
    m: f64,
    target_j0: f64,
    rel_tol: f64,
) -> Result<(WellGeometry, ModeBasis)> {
    let solve = |depth: f64| -> Result<ModeBasis> {
        let geometry = WellGeometry { well_depth: depth, ..*template };
        let basis = solve_modes(&build_double_well(&geometry, grid)?, m)?;
        hybridize(&basis)
    };
    // the splitting falls monotonically with depth; bracket around the depth
    // where an isolated well binds its ground state firmly
    let binding = std::f64::consts::PI.powi(2) / (2.0 * m * template.well_width.powi(2));
    let (mut lo, mut hi) = (binding, binding);
    if solve(binding)?.j0_eff() >= target_j0 {
        loop {
            hi *= 2.0;
            if hi > 1e6 * binding {
                return Err(Error::Calibration("could not bracket the target coupling".into()));
            }
            if solve(hi)?.j0_eff() < target_j0 {
                break;
            }
            lo = hi;
        }
    } else {
        loop {
            lo *= 0.5;
            if lo < 1e-6 * binding {
                return Err(Error::Calibration(format!(
                    "target J0 = {target_j0:e} exceeds the splitting of the shallowest wells"
                )));
            }
            let basis = match solve(lo) {
                Ok(b) => b,
                Err(Error::Delocalized { .. } | Error::ModeStructure(_)) | Err(Error::Eigensolver(_)) => {
                    return Err(Error::Calibration(format!(
                        "target J0 = {target_j0:e} exceeds the largest localized splitting"
                    )))
                }
                Err(e) => return Err(e),
            };
            if basis.j0_eff() >= target_j0 {
                break;
            }
            hi = lo;
        }
    }
    let mut best = None;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let basis = solve(mid)?;
        let j = basis.j0_eff();
        let done = ((j - target_j0) / target_j0).abs() <= rel_tol || mid <= lo || mid >= hi;
        if j > target_j0 {
            lo = mid;
        } else {
            hi = mid;
        }
        best = Some((mid, basis));
        if done {
            break;
        }
    }
    let (depth, basis) = best.expect("bisection ran");
    let rel = ((basis.j0_eff() - target_j0) / target_j0).abs();
    if rel > rel_tol.max(1e-12) {
        return Err(Error::Calibration(format!("stalled at relative error {rel:e}")));
    }
    Ok((WellGeometry { well_depth: depth, ..*template }, basis))
}

pub(crate) fn inner(a: &[f64], b: &[f64], h: f64) -> f64 {
    let prod: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    trapezoid(&prod, h)
}

fn normalize(v: &mut [f64], h: f64) {
    let norm = inner(v, v, h).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

/// Sign changes among samples above `1e-8` of the peak magnitude.
pub fn interior_nodes(v: &[f64]) -> usize {
    let peak = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut last = 0.0;
    let mut nodes = 0;
    for &x in v {
        if x.abs() <= 1e-8 * peak {
            continue;
        }
        if last != 0.0 && (x > 0.0) != (last > 0.0) {
            nodes += 1;
        }
        last = x;
    }
    nodes
}

/// Fraction of `int |phi|^2` on `y < 0`, grid symmetric about zero.
pub fn half_plane_fraction(phi: &[f64], h: f64) -> f64 {
    let n = phi.len();
    let sq: Vec<f64> = phi.iter().map(|v| v * v).collect();
    let total = trapezoid(&sq, h);
    let half = if n % 2 == 1 { trapezoid(&sq[..n / 2 + 1], h) } else { trapezoid(&sq[..n / 2], h) };
    half / total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn geometry(depth: f64) -> WellGeometry {
        WellGeometry {
            plateau: 0.0,
            well_depth: depth,
            well_width: 40.0,
            separation: 120.0,
            shape: WellShape::Rectangular,
        }
    }

    #[test]
    fn wells_sit_at_the_guide_centres() {
        let geo = WellGeometry { plateau: 1e-3, ..geometry(2e-3) };
        let grid = GridSpec::for_geometry(&geo, 2001);
        let pot = build_double_well(&geo, &grid).unwrap();
        let at = |target: f64| {
            let i = pot.y().iter().position(|&y| (y - target).abs() < 0.5 * pot.spacing()).unwrap();
            pot.v()[i]
        };
        assert_relative_eq!(at(60.0), 1e-3 - 2e-3, max_relative = 1e-12);
        assert_relative_eq!(at(-60.0), 1e-3 - 2e-3, max_relative = 1e-12);
        assert_relative_eq!(at(0.0), 1e-3, max_relative = 1e-12);
    }

    #[test]
    fn flat_potential_without_wells() {
        let geo = WellGeometry { plateau: 0.3, ..geometry(0.0) };
        let pot = build_double_well(&geo, &GridSpec::for_geometry(&geo, 801)).unwrap();
        assert!(pot.v().iter().all(|&v| v == 0.3));
    }

    #[test]
    fn geometry_errors() {
        let overlap = WellGeometry { separation: 30.0, ..geometry(1e-3) };
        assert!(build_double_well(&overlap, &GridSpec::for_geometry(&overlap, 1001)).is_err());
        let geo = geometry(1e-3);
        let coarse = GridSpec { half_width: geo.min_half_width(), points: 501 };
        // 640 / 500 = 1.28 per cell, 31 per well: fine
        assert!(build_double_well(&geo, &coarse).is_ok());
        let narrow = WellGeometry { well_width: 20.0, separation: 40.0, ..geo };
        let spec = GridSpec { half_width: 500.0, points: 501 };
        assert!(matches!(build_double_well(&narrow, &spec), Err(Error::Geometry(_))));
        let few = GridSpec { points: 400, ..coarse };
        assert!(build_double_well(&geo, &few).is_err());
    }

    #[test]
    fn asymmetric_potential_rejected() {
        let n = 11;
        let y: Vec<f64> = (0..n).map(|i| i as f64 - 5.0).collect();
        let mut v = vec![0.0; n];
        v[2] = 1.0;
        assert!(matches!(PotentialGrid::new(y, v), Err(Error::AsymmetricPotential { .. })));
    }

    #[test]
    fn infinite_square_well_levels() {
        let n = 4001;
        let width = 10.0;
        let y: Vec<f64> = (0..n).map(|i| -0.5 * width + width * i as f64 / (n - 1) as f64).collect();
        let pot = PotentialGrid::new(y, vec![0.0; n]).unwrap();
        let m = 1.0;
        let ham = pot.hamiltonian(m);
        for k in 1..=4 {
            let exact = (k * k) as f64 * PI * PI / (2.0 * m * width * width);
            let e = ham.eigenvalue(k - 1).unwrap();
            assert!(((e - exact) / exact).abs() < 1e-3, "level {k}: {e} vs {exact}");
        }
    }

    #[test]
    fn mode_pair_invariants() {
        let geo = geometry(2e-3);
        let pot = build_double_well(&geo, &GridSpec::for_geometry(&geo, 2001)).unwrap();
        let basis = hybridize(&solve_modes(&pot, 1.0).unwrap()).unwrap();
        let h = basis.spacing();
        assert_relative_eq!(inner(&basis.phi_plus, &basis.phi_plus, h), 1.0, epsilon = 1e-12);
        assert_relative_eq!(inner(&basis.phi_minus, &basis.phi_minus, h), 1.0, epsilon = 1e-12);
        assert!(inner(&basis.phi_plus, &basis.phi_minus, h).abs() < 1e-10);
        assert_eq!(interior_nodes(&basis.phi_minus), 0);
        assert_eq!(interior_nodes(&basis.phi_plus), 1);
        assert!(basis.e_minus < basis.e_plus);

        let (pm, pa) = (basis.phi_m().unwrap(), basis.phi_a().unwrap());
        assert!(inner(pm, pa, h).abs() < 1e-10);
        assert_relative_eq!(inner(pm, pm, h), 1.0, epsilon = 1e-10);
        assert_relative_eq!(inner(pa, pa, h), 1.0, epsilon = 1e-10);
        assert!(basis.hybrid.as_ref().unwrap().main_fraction >= 0.9);
        // mirror y -> -y swaps the guide modes
        let n = pm.len();
        for i in 0..n {
            assert_relative_eq!(pm[i], pa[n - 1 - i], epsilon = 1e-9);
        }
        let ic = basis.y.iter().position(|&y| (y + 60.0).abs() <= 0.5 * h + 1e-9).unwrap();
        assert!(pm[ic] > 0.0 && pa[n - 1 - ic] > 0.0);
    }

    #[test]
    fn splitting_shrinks_with_separation() {
        let mut last = f64::INFINITY;
        for sep in [90.0, 110.0, 130.0, 150.0] {
            let geo = WellGeometry { separation: sep, ..geometry(2e-3) };
            let pot = build_double_well(&geo, &GridSpec::for_geometry(&geo, 3001)).unwrap();
            let j = solve_modes(&pot, 1.0).unwrap().j0_eff();
            assert!(j < last, "splitting {j} not below {last} at separation {sep}");
            last = j;
        }
    }

    #[test]
    fn deep_wells_hybridize_onto_isolated_well() {
        let geo = geometry(4e-3);
        let grid = GridSpec::for_geometry(&geo, 3001);
        let basis = hybridize(&solve_modes(&build_double_well(&geo, &grid).unwrap(), 1.0).unwrap()).unwrap();
        // oracle: only the main well present
        let pot = build_double_well(&geo, &grid).unwrap();
        let single: Vec<f64> = pot
            .y()
            .iter()
            .zip(pot.v())
            .map(|(&y, &v)| if y > 0.0 { 0.0 } else { v })
            .collect();
        let ham = PotentialGrid { y: pot.y().to_vec(), v: single, h: pot.spacing() }.hamiltonian(1.0);
        let e = ham.eigenvalue(0).unwrap();
        let mut g = vec![0.0];
        g.extend(ham.eigenvector(e).unwrap());
        g.push(0.0);
        let h = pot.spacing();
        let norm = inner(&g, &g, h).sqrt();
        let overlap = (inner(&g, basis.phi_m().unwrap(), h) / norm).abs();
        assert!(overlap > 0.99, "overlap {overlap}");
    }

    #[test]
    fn eigenvalues_converge_at_second_order() {
        let geo = geometry(2e-3);
        let e = |n: usize| {
            let pot = build_double_well(&geo, &GridSpec::for_geometry(&geo, n)).unwrap();
            let b = solve_modes(&pot, 1.0).unwrap();
            (b.e_minus, b.e_plus)
        };
        // spacing halves: n -> 2n - 1; well edges stay on grid nodes at every level
        let (a, b, c) = (e(801), e(1601), e(3201));
        for (x, y, z) in [(a.0, b.0, c.0), (a.1, b.1, c.1)] {
            let order = ((x - y) / (y - z)).abs().log2();
            assert!((1.8..=2.2).contains(&order), "order {order}");
        }
    }

    #[test]
    fn calibration_hits_target() {
        let geo = geometry(0.0);
        let grid = GridSpec::for_geometry(&geo, 2001);
        let target = 1.0e-5;
        let (calibrated, basis) = calibrate_j0(&geo, &grid, 1.0, target, 1e-9).unwrap();
        assert!(((basis.j0_eff() - target) / target).abs() < 5e-3);
        assert!(calibrated.well_depth > 0.0);
        let too_big = calibrate_j0(&geo, &grid, 1.0, 1.0, 1e-9);
        assert!(matches!(too_big, Err(Error::Calibration(_))));
    }

    #[test]
    fn delocalized_pair_is_flagged() {
        // broad symmetric state plus a narrow odd one: no guide localisation
        let n = 1001;
        let y: Vec<f64> = (0..n).map(|i| -50.0 + 100.0 * i as f64 / (n - 1) as f64).collect();
        let pot = PotentialGrid::new(y.clone(), vec![0.0; n]).unwrap();
        let broad: Vec<f64> = y.iter().map(|&y| (PI * (y + 50.0) / 100.0).sin()).collect();
        let narrow: Vec<f64> = y.iter().map(|&y| -y * (-y * y / 4.0).exp()).collect();
        let basis = ModeBasis::from_raw(&pot, 0.0, broad, 1.0, narrow).unwrap();
        assert!(matches!(hybridize(&basis), Err(Error::Delocalized { .. })));
    }

    #[test]
    fn wrong_node_structure_is_flagged() {
        let n = 1001;
        let y: Vec<f64> = (0..n).map(|i| -50.0 + 100.0 * i as f64 / (n - 1) as f64).collect();
        let pot = PotentialGrid::new(y.clone(), vec![0.0; n]).unwrap();
        let s = |k: f64| -> Vec<f64> { y.iter().map(|&y| (k * PI * (y + 50.0) / 100.0).sin()).collect() };
        assert!(matches!(ModeBasis::from_raw(&pot, 0.0, s(1.0), 1.0, s(3.0)), Err(Error::ModeStructure(_))));
        assert!(matches!(ModeBasis::from_raw(&pot, 2.0, s(1.0), 1.0, s(2.0)), Err(Error::ModeStructure(_))));
    }
}
