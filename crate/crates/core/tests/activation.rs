use proptest::prelude::*;
use slater_barron::activation::{
    fourier_inversion_check, highpass_relu, lowpass_polynomial, lowpass_relu, lowpass_remainder_bound, relu,
    sine_integral, softplus, uniform_grid, HighPassThreshold,
};
use slater_barron_oracles as oracle;

fn g(v: f64) -> HighPassThreshold {
    HighPassThreshold::new(v).unwrap()
}

proptest! {
    #[test]
    fn inversion_bound_holds(y in -10.0f64..10.0, gi in 0usize..4) {
        let gamma = g([0.25, 0.5, 1.0, 2.0][gi]);
        let r = relu(y) - highpass_relu(y, gamma) - lowpass_polynomial(y, gamma);
        prop_assert!(r.abs() <= lowpass_remainder_bound(y, gamma) + 1e-12);
    }

    #[test]
    fn sine_integral_is_odd(y in 0.0f64..60.0) {
        prop_assert_eq!(sine_integral(-y), -sine_integral(y));
    }

    #[test]
    fn softplus_is_convex(y in -20.0f64..20.0, h in 1e-3f64..1.0) {
        prop_assert!(softplus(y - h) + softplus(y + h) >= 2.0 * softplus(y) - 1e-14);
    }

    #[test]
    fn split_is_exact(y in -50.0f64..50.0, gamma in 0.05f64..4.0) {
        let gm = g(gamma);
        prop_assert!((highpass_relu(y, gm) + lowpass_relu(y, gm) - relu(y)).abs() < 1e-12);
    }
}

#[test]
fn grid_inversion_has_no_violation() {
    let grid = uniform_grid(-10.0, 10.0, 4001);
    for gamma in [0.25, 0.5, 1.0, 2.0] {
        let rep = fourier_inversion_check(g(gamma), &grid);
        assert_eq!(rep.rows.len(), 4001);
        assert!(rep.max_violation <= 0.0, "gamma {gamma}: {}", rep.max_violation);
    }
}

#[test]
fn highpass_matches_fourier_integral() {
    for gamma in [0.5, 1.0, 2.0] {
        for i in 0..=20 {
            let y = -5.0 + 0.5 * i as f64;
            let ours = highpass_relu(y, g(gamma));
            let reference = oracle::highpass_by_fourier(y, gamma);
            assert!((ours - reference).abs() < 1e-6, "y {y}, gamma {gamma}: {ours} vs {reference}");
        }
    }
}

#[test]
fn sine_integral_matches_quadrature() {
    for i in 0..80 {
        let y = 0.05 + 0.37 * i as f64;
        let (a, b) = (sine_integral(y), oracle::sine_integral_quad(y));
        assert!((a - b).abs() < 1e-10, "Si({y}): {a} vs {b}");
    }
}

#[test]
fn sine_integral_is_monotone_up_to_pi() {
    let ys = uniform_grid(0.0, std::f64::consts::PI, 500);
    assert!(ys.windows(2).all(|p| sine_integral(p[1]) > sine_integral(p[0])));
}

#[test]
fn softplus_is_relu_smoothed_by_the_logistic_density() {
    for y in [-2.0, 0.0, 3.0] {
        let c = oracle::softplus_by_convolution(y);
        assert!((c - softplus(y)).abs() < 1e-6, "y {y}: {c} vs {}", softplus(y));
    }
}

#[test]
fn highpass_at_zero() {
    assert!((highpass_relu(0.0, g(1.0)) + 1.0 / std::f64::consts::PI).abs() < 1e-15);
}

#[test]
fn nonpositive_threshold_is_rejected() {
    assert!(HighPassThreshold::new(0.0).is_err());
    assert!(HighPassThreshold::new(-1.0).is_err());
    assert!(HighPassThreshold::new(f64::NAN).is_err());
}
