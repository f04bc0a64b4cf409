use bohmflux::model::{CavityModel, ModelOptions};
use bohmflux::opspeed::*;
use bohmflux::params::CavityParams;
use bohmflux::stationary2d::{energy_for_delta, wavevectors};
use proptest::prelude::*;

fn params() -> CavityParams {
    CavityParams::default()
}

/// `sinh^2(k x) / (1 + 2 sinh^2(k x))`, the lossless evanescent population.
fn sinh_ratio(kappa: f64, x: f64) -> f64 {
    let s = (kappa * x).sinh().powi(2);
    s / (1.0 + 2.0 * s)
}

#[test]
fn lossless_evanescent_ratio_is_the_sinh_form() {
    let model = CavityModel::build(&params(), ModelOptions::default()).unwrap();
    let f = model.field_at_ratio(-2.0, 0.0).unwrap();
    let kappa = f.wavevectors().kappa1().re;
    let mut prev = 0.0;
    for i in 0..=200 {
        let x = i as f64 * 0.1 / kappa;
        let r = population_ratio(&f, x).unwrap();
        assert!((r - sinh_ratio(kappa, x)).abs() <= 1e-12, "x {x}");
        assert!(r >= prev - 1e-15);
        prev = r;
    }
    assert_eq!(population_ratio(&f, 0.0).unwrap(), 0.0);
    assert!((population_ratio(&f, 20.0 / kappa).unwrap() - 0.5).abs() < 1e-12);
    for i in 1..50 {
        let x = 0.05 * i as f64 / (50.0 * kappa);
        let r = population_ratio(&f, x).unwrap();
        assert!((r / (kappa * x).powi(2) - 1.0).abs() < 0.01);
    }
}

#[test]
fn evanescent_fit_matches_closed_form() {
    let p = params().with_gamma(0.0);
    let delta = -2.0 * p.j0;
    let k = wavevectors(energy_for_delta(delta, &p), &p, 0.0).unwrap();
    let fit = fit_speed(&window_samples(k.k1, 32).unwrap(), p.j0, FitMethod::QuadraticSmallX).unwrap();
    let v = closed_form_speed(delta, &p).unwrap();
    assert!((fit.v / v - 1.0).abs() < 0.01, "{} vs {v}", fit.v);
    assert_eq!(fit.method, FitMethod::QuadraticSmallX);
}

#[test]
fn propagative_fit_is_the_guide_velocity() {
    let p = params().with_gamma(0.0);
    let k = wavevectors(energy_for_delta(2.0 * p.j0, &p), &p, 0.0).unwrap();
    let k1 = k.k1.re;
    let x_end = (0.95f64.sqrt().asin() - 0.01) / k1;
    let samples: Vec<(f64, f64)> = (1..=64)
        .map(|i| {
            let x = x_end * i as f64 / 64.0;
            (x, population_ratio_k1(k.k1, x).unwrap())
        })
        .collect();
    let fit = fit_speed(&samples, p.j0, FitMethod::ArcsinLinearized).unwrap();
    let v = k.k2.re / p.m;
    assert!((fit.v / v - 1.0).abs() < 0.01, "{} vs {v}", fit.v);
}

#[test]
fn fit_agrees_with_closed_form_across_offsets() {
    let p = params();
    let deltas: Vec<f64> = (0..=100).map(|i| -(1.1 + (100.0 - 1.1) * i as f64 / 100.0) * p.j0).collect();
    for gamma in [p.gamma, 0.0] {
        let rows = speed_curve(&deltas, &p.with_gamma(gamma)).unwrap();
        for r in &rows {
            assert!((r.v_fit / r.v_closed - 1.0).abs() < 0.01, "delta/J0 {}: {}", r.delta_over_j0, r.v_fit / r.v_closed);
            if gamma == 0.0 {
                assert_eq!(r.v_bohm_leak, 0.0);
            }
        }
        assert!(rows.windows(2).all(|w| w[1].v_closed > w[0].v_closed));
    }
}

#[test]
fn operational_speed_dwarfs_the_leakage_drift() {
    let p = params();
    let r = &speed_curve(&[p.delta0()], &p).unwrap()[0];
    let ratio = r.v_closed / r.v_bohm_leak;
    assert!((50.0..=200.0).contains(&ratio), "ratio {ratio}");
    assert!(r.v_closed_km_s > 1e3);
    assert!(r.v_bohm_leak_km_s > 10.0 && r.v_bohm_leak_km_s < 50.0);
}

#[test]
fn closed_form_far_limit() {
    let p = params();
    let delta = -100.0 * p.j0;
    let v = closed_form_speed(delta, &p).unwrap();
    // kappa+- ~ sqrt(-2m Delta) -+ J0 sqrt(m / -2 Delta), so v -> sqrt(-2 Delta / m)
    assert!((v / (-2.0 * delta / p.m).sqrt() - 1.0).abs() < 0.01);
    assert!(closed_form_speed(-10.0 * p.j0, &p).unwrap() > closed_form_speed(-2.0 * p.j0, &p).unwrap());
}

proptest! {
    #[test]
    fn fit_is_scale_covariant(lambda in 0.01f64..100.0, v in 1e-3f64..1.0) {
        let j0 = 2e-5;
        let samples: Vec<(f64, f64)> = (1..=20).map(|i| {
            let x = i as f64 * 0.01 * v / j0;
            (x, (j0 * x / v).sin().powi(2))
        }).collect();
        let scaled: Vec<(f64, f64)> = samples.iter().map(|&(x, r)| (lambda * x, r)).collect();
        let a = fit_speed(&samples, j0, FitMethod::QuadraticSmallX).unwrap();
        let b = fit_speed(&scaled, j0, FitMethod::QuadraticSmallX).unwrap();
        // stretching x by lambda at fixed rho_a divides the slope by lambda
        prop_assert!((b.v / (lambda * a.v) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn ratio_is_a_fraction(x in 0.0f64..1e6, re in -1e-2f64..1e-2, im in -1e-3f64..0.0) {
        let r = population_ratio_k1(num_complex::Complex64::new(re, im), x).unwrap();
        prop_assert!((0.0..=1.0).contains(&r));
    }
}
