use bohmflux::oracle::fd_phase_gradient;
use bohmflux::params::CavityParams;
use bohmflux::suite::packet_velocity_gap;
use bohmflux::wavepacket::*;
use proptest::prelude::*;

fn spec(ratio: f64) -> PacketSpec {
    let s = PacketSpec::from_params(&CavityParams::default()).unwrap();
    s.with_sigma(ratio * s.barrier_depth()).unwrap()
}

/// Worst relative amplitude gap between first-order form and quadrature
/// over `x in [0, 3L]`, `t in [-2/sigma, 2/sigma]`.
fn first_order_gap(s: &PacketSpec) -> f64 {
    let q = PacketQuadrature::new(s, 128).unwrap();
    let l = s.decay_length();
    let mut worst = 0.0f64;
    for i in 0..=30 {
        let x = 3.0 * l * i as f64 / 30.0;
        for j in 0..=40 {
            let t = (-2.0 + 4.0 * j as f64 / 40.0) / s.sigma;
            let a = packet_first_order(x, t, s);
            let b = q.eval(x, t);
            worst = worst.max((a - b).norm() / b.norm());
        }
    }
    worst
}

#[test]
fn first_order_matches_quadrature() {
    assert!(first_order_gap(&spec(0.01)) < 0.01);
}

#[test]
fn first_order_error_is_second_order_in_sigma() {
    let gaps: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&r| first_order_gap(&spec(r))).collect();
    for w in gaps.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.7..=2.3).contains(&order), "order {order} from {gaps:?}");
    }
}

#[test]
fn quadrature_is_spectrally_converged() {
    let s = spec(0.01);
    let (a, b) = (PacketQuadrature::new(&s, 64).unwrap(), PacketQuadrature::new(&s, 128).unwrap());
    let l = s.decay_length();
    for (x, t) in [(0.0, 0.0), (l, 1.0 / s.sigma), (2.5 * l, -1.5 / s.sigma)] {
        let (p, q) = (a.eval(x, t), b.eval(x, t));
        assert!((p - q).norm() / q.norm() < 1e-8);
    }
}

#[test]
fn closed_form_velocity_matches_finite_differences() {
    assert!(packet_velocity_gap(&spec(0.01), 100, 17).unwrap() < 1e-6);
    let s = PacketSpec::from_params(&CavityParams::default()).unwrap();
    let (v, _) = fd_phase_gradient(|x, _| packet_first_order(x, 0.0, &s), 0.5 / s.k0, 0.0, 1e-4 / s.k0, s.m, 0.0).unwrap();
    assert!(v.abs() < 1e-12);
}

#[test]
fn ensemble_is_equivariant() {
    let s = PacketSpec::from_params(&CavityParams::default()).unwrap();
    let (ks, ens) = packet_equivariance_ks(&s, -1.0 / s.sigma, 0.5 / s.sigma, 100_000, 7).unwrap();
    assert!(ks < 0.02, "KS {ks}");
    assert!(ens.particles.len() >= 10_000);
}

#[test]
fn trajectory_reaches_decay_length_at_turnaround() {
    let s = spec(0.01);
    let tr = packet_trajectory(0.0, (-1.0 / s.sigma, 1.0 / s.sigma), 201, &s).unwrap();
    let i = tr.t.iter().position(|&t| t.abs() < 1e-9 / s.sigma).unwrap();
    assert!((tr.x[i] - s.decay_length()).abs() < 1e-9 * s.decay_length());
    assert!(tr.x.iter().all(|&x| x <= tr.x[i] + 1e-12));
}

proptest! {
    #[test]
    fn velocity_is_odd_and_decreasing(t in 1.0f64..1e7, ratio in 1e-3f64..0.05) {
        let s = spec(ratio);
        prop_assert_eq!(packet_velocity(0.0, -t, &s), -packet_velocity(0.0, t, &s));
        prop_assert!(packet_velocity(0.0, t, &s) < packet_velocity(0.0, 0.5 * t, &s));
    }

    #[test]
    fn modulus_identity(x in 0.0f64..3.0, t in -2.0f64..2.0) {
        let s = spec(0.01);
        let (x, t) = (x * s.decay_length(), t / s.sigma);
        let a = packet_first_order(x, t, &s).norm();
        let b = packet_first_order_modulus(x, t, &s);
        prop_assert!((a - b).abs() <= 1e-12 * b);
    }
}
