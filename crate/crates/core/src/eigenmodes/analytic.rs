//! Exact continuum eigenfunctions of the rectangular double well.
//!
//! The potential is piecewise constant, so on each region the solution is a
//! combination of `cosh/sinh` (below the local potential) or `cos/sin`
//! (above it). Shooting from the Dirichlet wall at `y = L` inward and
//! imposing parity at `y = 0` gives the eigenvalue condition; the finite
//! difference eigenvalues seed the bracket.

use super::{ModeBasis, WellGeometry, WellShape};
use crate::error::{Error, Result};
use crate::quadrature::integrate_gl;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Parity {
    Even,
    Odd,
}

/// One constant-potential segment on `y >= 0`, with the solution state at its right end.
#[derive(Debug, Clone, Copy)]
struct Segment {
    left: f64,
    right: f64,
    v: f64,
    psi: f64,
    dpsi: f64,
}

/// Advances `(psi, psi')` by displacement `s` where `psi'' = q2 * psi`.
fn transfer(q2: f64, s: f64, psi: f64, dpsi: f64) -> (f64, f64) {
    if q2 > 0.0 {
        let q = q2.sqrt();
        let (sh, ch) = ((q * s).sinh(), (q * s).cosh());
        (psi * ch + dpsi * sh / q, psi * q * sh + dpsi * ch)
    } else if q2 < 0.0 {
        let k = (-q2).sqrt();
        let (sn, cs) = (k * s).sin_cos();
        (psi * cs + dpsi * sn / k, -psi * k * sn + dpsi * cs)
    } else {
        (psi + dpsi * s, dpsi)
    }
}

#[derive(Debug, Clone)]
struct Mode {
    energy: f64,
    parity: Parity,
    segments: Vec<Segment>,
    scale: f64,
}

impl Mode {
    fn eval(&self, m: f64, y: f64) -> (f64, f64) {
        let ya = y.abs();
        let seg = self
            .segments
            .iter()
            .find(|s| ya >= s.left && ya <= s.right)
            .unwrap_or(&self.segments[self.segments.len() - 1]);
        if ya > seg.right {
            return (0.0, 0.0);
        }
        let q2 = 2.0 * m * (seg.v - self.energy);
        let (p, dp) = transfer(q2, ya - seg.right, seg.psi, seg.dpsi);
        let (p, dp) = (p * self.scale, dp * self.scale);
        match (self.parity, y < 0.0) {
            (_, false) => (p, dp),
            (Parity::Even, true) => (p, -dp),
            (Parity::Odd, true) => (-p, dp),
        }
    }
}

/// Exact `Phi+-` of the rectangular double well with Dirichlet walls at `+-L`.
#[derive(Debug, Clone)]
pub struct RectangularModes {
    m: f64,
    half_width: f64,
    plus: Mode,
    minus: Mode,
}

impl RectangularModes {
    /// Refines the finite-difference pair `basis` (built on `geometry`) to the
    /// exact continuum eigenpair.
    pub fn refine(geometry: &WellGeometry, basis: &ModeBasis, m: f64) -> Result<Self> {
        if geometry.shape != WellShape::Rectangular {
            return Err(Error::ModeStructure("exact modes exist only for rectangular wells".into()));
        }
        let half_width = basis.y[basis.y.len() - 1];
        let c = geometry.aux_center();
        let w = 0.5 * geometry.well_width;
        let bounds = [
            (0.0, c - w, geometry.plateau),
            (c - w, c + w, geometry.plateau - geometry.well_depth),
            (c + w, half_width, geometry.plateau),
        ];
        let scale = geometry.well_depth.max(basis.j0_eff()).max(f64::MIN_POSITIVE);
        let minus = solve_parity(&bounds, m, Parity::Even, basis.e_minus, scale)?;
        let mut plus = solve_parity(&bounds, m, Parity::Odd, basis.e_plus, scale)?;
        // Phi+ positive on the main (negative-y) side
        let probe = -c;
        let mut out = Self { m, half_width, plus: plus.clone(), minus };
        if out.plus.eval(m, probe).0 < 0.0 {
            plus.scale = -plus.scale;
            out.plus = plus;
        }
        if out.minus.eval(m, c).0 < 0.0 {
            out.minus.scale = -out.minus.scale;
        }
        Ok(out)
    }

    pub fn e_plus(&self) -> f64 {
        self.plus.energy
    }

    pub fn e_minus(&self) -> f64 {
        self.minus.energy
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// `(Phi+, Phi+')` at `y`; zero outside the walls.
    pub fn phi_plus(&self, y: f64) -> (f64, f64) {
        if y.abs() > self.half_width {
            return (0.0, 0.0);
        }
        self.plus.eval(self.m, y)
    }

    /// `(Phi-, Phi-')` at `y`; zero outside the walls.
    pub fn phi_minus(&self, y: f64) -> (f64, f64) {
        if y.abs() > self.half_width {
            return (0.0, 0.0);
        }
        self.minus.eval(self.m, y)
    }
}

fn shoot(bounds: &[(f64, f64, f64)], m: f64, energy: f64) -> (Vec<Segment>, f64, f64) {
    let mut segments: Vec<Segment> = Vec::with_capacity(bounds.len());
    let (mut psi, mut dpsi) = (0.0, -1.0);
    for &(left, right, v) in bounds.iter().rev() {
        segments.push(Segment { left, right, v, psi, dpsi });
        let q2 = 2.0 * m * (v - energy);
        let (p, dp) = transfer(q2, left - right, psi, dpsi);
        // keep the state O(1); only the relative scale between segments matters
        let norm = p.abs().max(dp.abs()).max(f64::MIN_POSITIVE);
        psi = p / norm;
        dpsi = dp / norm;
        for s in segments.iter_mut() {
            s.psi /= norm;
            s.dpsi /= norm;
        }
    }
    segments.reverse();
    (segments, psi, dpsi)
}

fn mismatch(bounds: &[(f64, f64, f64)], m: f64, energy: f64, parity: Parity) -> f64 {
    let (_, psi, dpsi) = shoot(bounds, m, energy);
    match parity {
        Parity::Even => dpsi,
        Parity::Odd => psi,
    }
}

fn solve_parity(
    bounds: &[(f64, f64, f64)],
    m: f64,
    parity: Parity,
    guess: f64,
    scale: f64,
) -> Result<Mode> {
    let f = |e: f64| mismatch(bounds, m, e, parity);
    let mut delta = 1e-9 * scale;
    let (mut lo, mut hi);
    loop {
        lo = guess - delta;
        hi = guess + delta;
        if f(lo).signum() != f(hi).signum() {
            break;
        }
        delta *= 2.0;
        if delta > scale {
            return Err(Error::Eigensolver(format!(
                "no {parity:?} continuum eigenvalue near {guess:e}"
            )));
        }
    }
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let energy = 0.5 * (lo + hi);
    let (segments, _, _) = shoot(bounds, m, energy);
    let mut mode = Mode { energy, parity, segments, scale: 1.0 };
    // normalise over the full line: twice the half-line integral
    let mut norm2 = 0.0;
    for s in &mode.segments {
        let q = (2.0 * m * (s.v - energy)).abs().sqrt();
        let panels = ((q * (s.right - s.left)).ceil() as usize * 4).clamp(16, 4096);
        norm2 += integrate_gl(|y| mode.eval(m, y).0.powi(2), s.left, s.right, panels, 10);
    }
    mode.scale = 1.0 / (2.0 * norm2).sqrt();
    Ok(mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigenmodes::{build_double_well, solve_modes, GridSpec};
    use approx::assert_relative_eq;

    fn setup() -> (WellGeometry, ModeBasis) {
        let geo = WellGeometry {
            plateau: 1e-3,
            well_depth: 2e-3,
            well_width: 40.0,
            separation: 120.0,
            shape: WellShape::Rectangular,
        };
        let pot = build_double_well(&geo, &GridSpec::for_geometry(&geo, 4001)).unwrap();
        (geo, solve_modes(&pot, 1.0).unwrap())
    }

    #[test]
    fn exact_modes_solve_the_ode() {
        let (geo, basis) = setup();
        let modes = RectangularModes::refine(&geo, &basis, 1.0).unwrap();
        // finite differences converge onto the continuum levels
        assert_relative_eq!(modes.e_minus(), basis.e_minus, epsilon = 1e-8);
        assert_relative_eq!(modes.e_plus(), basis.e_plus, epsilon = 1e-8);
        // -psi''/2m + V psi = E psi away from the jumps
        let h = 1e-3;
        for &y in &[-100.0, -60.0, -25.0, 5.0, 45.0, 75.0, 200.0] {
            for (e, f) in [(modes.e_plus(), 0), (modes.e_minus(), 1)] {
                let val = |y: f64| if f == 0 { modes.phi_plus(y).0 } else { modes.phi_minus(y).0 };
                let d2 = (val(y + h) - 2.0 * val(y) + val(y - h)) / (h * h);
                let v = if (y.abs() - 60.0).abs() < 20.0 { 1e-3 - 2e-3 } else { 1e-3 };
                let lhs = -d2 / 2.0 + v * val(y);
                assert!((lhs - e * val(y)).abs() < 1e-7 * val(y).abs().max(1e-3), "y={y}");
            }
        }
    }

    #[test]
    fn exact_modes_are_normalized_with_fd_signs() {
        let (geo, basis) = setup();
        let modes = RectangularModes::refine(&geo, &basis, 1.0).unwrap();
        let l = modes.half_width();
        let n2 = integrate_gl(|y| modes.phi_plus(y).0.powi(2), -l, l, 2000, 8);
        let m2 = integrate_gl(|y| modes.phi_minus(y).0.powi(2), -l, l, 2000, 8);
        let pm = integrate_gl(|y| modes.phi_plus(y).0 * modes.phi_minus(y).0, -l, l, 2000, 8);
        assert_relative_eq!(n2, 1.0, epsilon = 1e-10);
        assert_relative_eq!(m2, 1.0, epsilon = 1e-10);
        assert!(pm.abs() < 1e-10);
        // samples agree with the finite-difference vectors
        for (i, &y) in basis.y.iter().enumerate().step_by(97) {
            assert!((modes.phi_plus(y).0 - basis.phi_plus[i]).abs() < 1e-4);
            assert!((modes.phi_minus(y).0 - basis.phi_minus[i]).abs() < 1e-4);
        }
        assert_eq!(modes.phi_plus(l + 1.0), (0.0, 0.0));
    }
}
