//! Brute-force validators that share no code path with the closed forms they check.

mod tdse;

pub use tdse::{gaussian_packet, tdse_propagate, GridState1D};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::eigenmodes::{ModeBasis, PotentialGrid};
use crate::error::{Error, Result};

/// Largest matrix the dense oracle accepts.
pub const DENSE_MAX_POINTS: usize = 5000;

/// Full symmetric eigendecomposition of the finite-difference Hamiltonian;
/// returns the lowest pair with the same conventions as the tridiagonal path.
pub fn dense_eigensolve(pot: &PotentialGrid, m: f64) -> Result<ModeBasis> {
    let n = pot.len();
    if n > DENSE_MAX_POINTS {
        return Err(Error::Eigensolver(format!("dense oracle limited to {DENSE_MAX_POINTS} points, got {n}")));
    }
    let ham = pot.hamiltonian(m);
    let k = ham.len();
    let mut dense = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        dense[(i, i)] = ham.diag()[i];
        if i + 1 < k {
            dense[(i, i + 1)] = ham.off()[i];
            dense[(i + 1, i)] = ham.off()[i];
        }
    }
    let eig = SymmetricEigen::new(dense);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let column = |j: usize| {
        let mut full = vec![0.0; n];
        for i in 0..k {
            full[i + 1] = eig.eigenvectors[(i, j)];
        }
        full
    };
    let (i0, i1) = (order[0], order[1]);
    ModeBasis::from_raw(pot, eig.eigenvalues[i0], column(i0), eig.eigenvalues[i1], column(i1))
}

/// Central-difference guidance velocity `Im(grad psi / psi) / m` at `(x, y)`.
///
/// `floor` is the absolute `|psi|^2` below which the point counts as nodal.
pub fn fd_phase_gradient<F>(psi: F, x: f64, y: f64, h: f64, m: f64, floor: f64) -> Result<(f64, f64)>
where
    F: Fn(f64, f64) -> C64,
{
    let centre = psi(x, y);
    if !(centre.norm_sqr() > floor) {
        return Err(Error::Nodal { x, y });
    }
    let dx = (psi(x + h, y) - psi(x - h, y)) / (2.0 * h);
    let dy = (psi(x, y + h) - psi(x, y - h)) / (2.0 * h);
    Ok(((dx / centre).im / m, (dy / centre).im / m))
}

/// A stationary probability current with a local sink.
pub trait FluxField: Sync {
    /// Current `j = (j_x, j_y)` at a point.
    fn current(&self, x: f64, y: f64) -> (f64, f64);
    /// Sink density; the continuity balance is `div j + sink = 0`.
    fn sink(&self, x: f64, y: f64) -> f64;
}

/// Rectangular evaluation grid (`nx * ny` nodes, inclusive bounds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid2D {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

impl Grid2D {
    pub fn hx(&self) -> f64 {
        (self.x.1 - self.x.0) / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        (self.y.1 - self.y.0) / (self.ny - 1) as f64
    }

    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x.0 + i as f64 * self.hx(), self.y.0 + j as f64 * self.hy())
    }

    /// Grid with spacing `h` in both directions (bounds snapped outward to whole cells).
    pub fn with_spacing(x: (f64, f64), y: (f64, f64), h: f64) -> Self {
        let nx = ((x.1 - x.0) / h).round().max(2.0) as usize + 1;
        let ny = ((y.1 - y.0) / h).round().max(2.0) as usize + 1;
        Self { x: (x.0, x.0 + (nx - 1) as f64 * h), y: (y.0, y.0 + (ny - 1) as f64 * h), nx, ny }
    }
}

/// Residual statistics of `r = div j + sink` on the interior nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub max_abs: f64,
    pub rms_abs: f64,
    /// Normalisation: `max sink`, or the largest divergence term when there is no sink.
    pub scale: f64,
    pub max_rel: f64,
    pub rms_rel: f64,
    pub nodes: usize,
}

/// Central-difference continuity check over the interior nodes of `grid`.
pub fn continuity_grid_check<F: FluxField>(field: &F, grid: &Grid2D) -> ContinuityReport {
    use rayon::prelude::*;
    let (hx, hy) = (grid.hx(), grid.hy());
    // per interior row: (max |r|, sum r^2, max sink, max |div term|)
    let rows: Vec<(f64, f64, f64, f64)> = (1..grid.nx - 1)
        .into_par_iter()
        .map(|i| {
            let mut acc = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
            for j in 1..grid.ny - 1 {
                let (x, y) = grid.node(i, j);
                let dxj = (field.current(x + hx, y).0 - field.current(x - hx, y).0) / (2.0 * hx);
                let dyj = (field.current(x, y + hy).1 - field.current(x, y - hy).1) / (2.0 * hy);
                let sink = field.sink(x, y);
                let r = dxj + dyj + sink;
                acc.0 = acc.0.max(r.abs());
                acc.1 += r * r;
                acc.2 = acc.2.max(sink.abs());
                acc.3 = acc.3.max(dxj.abs()).max(dyj.abs());
            }
            acc
        })
        .collect();
    let nodes = (grid.nx - 2) * (grid.ny - 2);
    let max_abs = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let rms_abs = (rows.iter().map(|r| r.1).sum::<f64>() / nodes as f64).sqrt();
    let max_sink = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let max_div = rows.iter().map(|r| r.3).fold(0.0, f64::max);
    let scale = if max_sink > 0.0 {
        max_sink
    } else if max_div > 0.0 {
        max_div
    } else {
        1.0
    };
    ContinuityReport { max_abs, rms_abs, scale, max_rel: max_abs / scale, rms_rel: rms_abs / scale, nodes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigenmodes::{build_double_well, solve_modes, GridSpec, WellGeometry, WellShape};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn dense_matches_tridiagonal() {
        let geo = WellGeometry {
            plateau: 0.0,
            well_depth: 2e-3,
            well_width: 40.0,
            separation: 120.0,
            shape: WellShape::Rectangular,
        };
        let pot = build_double_well(&geo, &GridSpec::for_geometry(&geo, 801)).unwrap();
        let a = solve_modes(&pot, 1.0).unwrap();
        let b = dense_eigensolve(&pot, 1.0).unwrap();
        assert_relative_eq!(a.e_minus, b.e_minus, max_relative = 1e-9);
        assert_relative_eq!(a.e_plus, b.e_plus, max_relative = 1e-9);
        let h = pot.spacing();
        let dot = |u: &[f64], v: &[f64]| crate::eigenmodes::inner(u, v, h);
        assert_relative_eq!(dot(&b.phi_plus, &b.phi_plus), 1.0, epsilon = 1e-10);
        assert!(dot(&b.phi_plus, &b.phi_minus).abs() < 1e-10);
        for i in 0..pot.len() {
            assert!((a.phi_minus[i] - b.phi_minus[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn dense_box_levels() {
        let n = 1001;
        let w = 10.0;
        let y: Vec<f64> = (0..n).map(|i| -0.5 * w + w * i as f64 / (n - 1) as f64).collect();
        let pot = PotentialGrid::new(y, vec![0.0; n]).unwrap();
        let b = dense_eigensolve(&pot, 1.0).unwrap();
        let e1 = PI * PI / (2.0 * w * w);
        assert!(((b.e_minus - e1) / e1).abs() < 1e-3);
        assert!(((b.e_plus - 4.0 * e1) / (4.0 * e1)).abs() < 1e-3);
    }

    #[test]
    fn phase_gradient_of_simple_fields() {
        let k = 0.7;
        let h = 1e-3;
        let (vx, vy) = fd_phase_gradient(|x, _| C64::new(0.0, k * x).exp(), 0.3, 0.0, h, 2.0, 0.0).unwrap();
        assert!((vx - k / 2.0).abs() < h * h * k.powi(3));
        assert_eq!(vy, 0.0);
        let real = |x: f64, y: f64| C64::new((x * y).cos() + 2.0, 0.0);
        assert_eq!(fd_phase_gradient(real, 0.4, 1.1, h, 1.0, 0.0).unwrap(), (0.0, 0.0));
        let nodal = fd_phase_gradient(|x, _| C64::new(x, 0.0), 0.0, 0.0, h, 1.0, 1e-30);
        assert!(matches!(nodal, Err(Error::Nodal { .. })));
    }

    struct Rotational;

    impl FluxField for Rotational {
        // stream function sin(x) y^2: divergence free, not resolved exactly by central differences
        fn current(&self, x: f64, y: f64) -> (f64, f64) {
            (2.0 * y * x.sin(), -y * y * x.cos())
        }
        fn sink(&self, _: f64, _: f64) -> f64 {
            0.0
        }
    }

    struct Still;

    impl FluxField for Still {
        fn current(&self, _: f64, _: f64) -> (f64, f64) {
            (0.0, 0.0)
        }
        fn sink(&self, _: f64, _: f64) -> f64 {
            0.0
        }
    }

    #[test]
    fn continuity_kernel_on_manufactured_fields() {
        let g = Grid2D::with_spacing((0.0, 3.0), (-1.0, 1.0), 0.05);
        let zero = continuity_grid_check(&Still, &g);
        assert_eq!(zero.max_abs, 0.0);
        let r1 = continuity_grid_check(&Rotational, &g);
        let r2 = continuity_grid_check(&Rotational, &Grid2D::with_spacing((0.0, 3.0), (-1.0, 1.0), 0.025));
        let order = (r1.max_abs / r2.max_abs).log2();
        assert!((1.8..=2.2).contains(&order), "order {order}");
        assert!(r1.max_rel < 1e-3);
    }
}
