use std::sync::OnceLock;

use bohmflux::model::{CavityModel, ModelOptions};
use bohmflux::oracle::Grid2D;
use bohmflux::params::CavityParams;
use bohmflux::stationary2d::{continuity_residual, Field2D};
use bohmflux::suite::field_velocity_gap;
use proptest::prelude::*;

fn model() -> &'static CavityModel {
    static MODEL: OnceLock<CavityModel> = OnceLock::new();
    MODEL.get_or_init(|| CavityModel::build(&CavityParams::default(), ModelOptions::default()).unwrap())
}

fn field(ratio: f64, leaky: bool) -> Field2D {
    let m = model();
    m.field_at_ratio(ratio, if leaky { m.params().gamma } else { 0.0 }).unwrap()
}

fn default_ratio() -> f64 {
    let p = model().params();
    p.delta0() / p.j0
}

#[test]
fn entrance_profile_is_the_main_mode() {
    for f in [field(default_ratio(), true), field(2.0, false)] {
        for i in 0..=200 {
            let y = -150.0 + 1.5 * i as f64;
            let phi = f.profiles().eval(y).phi_m;
            assert!((f.field(0.0, y) - phi).norm() <= 1e-15);
        }
    }
}

#[test]
fn trigonometric_and_hyperbolic_forms_agree() {
    let f = field(default_ratio(), false);
    let l = f.length_scale();
    let hw = f.half_width();
    let mut worst = 0.0f64;
    for i in 0..100 {
        let x = 5.0 * l * i as f64 / 99.0;
        for j in 0..100 {
            let y = -hw + 2.0 * hw * j as f64 / 99.0;
            let real = f.real_form(x, y).unwrap();
            let psi = f.field(x, y);
            worst = worst.max((psi.re - real).abs().max(psi.im.abs()));
        }
    }
    assert!(worst < 1e-12, "worst {worst:e}");
    assert!(field(default_ratio(), true).real_form(1.0, 0.0).is_none());
}

#[test]
fn auxiliary_amplitude_grows_like_sinh() {
    let f = field(default_ratio(), false);
    let k = f.wavevectors();
    let (k1, k2) = (k.kappa1().re, k.kappa2().re);
    assert_eq!(f.coefficients(0.0).1.norm(), 0.0);
    for i in 1..=50 {
        let x = i as f64 / (10.0 * k1);
        let (_, ca) = f.coefficients(x);
        let expected = (k1 * x).sinh() * (-k2 * x).exp();
        assert!((ca.norm() - expected).abs() <= 1e-12 * expected.max(1e-300), "x {x}");
    }
}

#[test]
fn lossless_evanescent_field_is_frozen() {
    let f = field(default_ratio(), false);
    for i in 0..40 {
        let (x, y) = (7.0 * i as f64, -120.0 + 6.0 * i as f64);
        if let Ok(v) = f.velocity(x, y) {
            assert_eq!(v, (0.0, 0.0));
        }
    }
}

#[test]
fn leakage_drives_flow_into_the_guide() {
    let f = field(default_ratio(), true);
    let main = model().geometry.main_center();
    let v = f.velocity_at_entrance(main).unwrap();
    assert!(v > 0.0);
    assert_eq!(f.velocity(0.0, main).unwrap().0, v);
}

#[test]
fn velocities_match_finite_differences() {
    for f in [field(default_ratio(), true), field(2.0, false), field(2.0, true), field(-6.0, true)] {
        let gap = field_velocity_gap(&f, 100, 99).unwrap();
        assert!(gap < 1e-6, "gap {gap:e}");
    }
}

#[test]
fn small_loss_velocity_is_linear_in_gamma() {
    let m = model();
    let g = m.params().gamma;
    let main = m.geometry.main_center();
    let v: Vec<f64> = [g, 0.5 * g, 0.25 * g]
        .iter()
        .map(|&gamma| m.field_at_ratio(default_ratio(), gamma).unwrap().velocity_at_entrance(main).unwrap())
        .collect();
    assert!((v[0] / v[1] - 2.0).abs() < 0.01);
    assert!((v[1] / v[2] - 2.0).abs() < 0.01);
}

#[test]
fn continuity_balance_converges_at_second_order() {
    let sep = model().geometry.separation;
    for f in [field(default_ratio(), true), field(2.0, true)] {
        let l = f.length_scale();
        let grid = |h: f64| Grid2D::with_spacing((0.0, 2.0 * l), (-sep, sep), h);
        let coarse = continuity_residual(&f, &grid(l / 100.0));
        let fine = continuity_residual(&f, &grid(l / 200.0));
        assert!(fine.max_rel < 1e-2, "{fine:?}");
        let order = (coarse.max_abs / fine.max_abs).log2();
        assert!((1.8..=2.2).contains(&order), "order {order}");
    }
}

#[test]
fn lossless_continuity_has_no_sink() {
    let f = field(2.0, false);
    let l = f.length_scale();
    let r = continuity_residual(&f, &Grid2D::with_spacing((0.0, l), (-150.0, 150.0), l / 100.0));
    assert!(r.max_rel < 1e-2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mirror_swaps_transverse_velocity(x in 0.0f64..300.0, y in -150.0f64..150.0, ratio in prop::sample::select(vec![-2.5, 2.0])) {
        let f = field(ratio, true);
        let g = f.mirrored();
        let psi = f.field(x, y);
        prop_assert!((g.field(x, -y) - psi).norm() <= 1e-12 * psi.norm().max(1e-300));
        if let (Ok(a), Ok(b)) = (f.velocity(x, y), g.velocity(x, -y)) {
            let scale = a.0.hypot(a.1);
            prop_assert!((a.0 - b.0).abs() <= 1e-9 * scale);
            prop_assert!((a.1 + b.1).abs() <= 1e-9 * scale);
        }
        prop_assert_eq!(g.aux_sign(), -f.aux_sign());
    }

    #[test]
    fn flux_is_density_times_velocity(x in 0.0f64..300.0, y in -150.0f64..150.0) {
        let f = field(2.0, true);
        if let Ok(v) = f.velocity(x, y) {
            let j = f.flux(x, y);
            let rho = f.density(x, y);
            prop_assert!((j.0 - rho * v.0).abs() <= 1e-10 * (rho * v.0).abs().max(1e-300));
            prop_assert!((j.1 - rho * v.1).abs() <= 1e-10 * (rho * v.0.hypot(v.1)).max(1e-300));
        }
    }
}
