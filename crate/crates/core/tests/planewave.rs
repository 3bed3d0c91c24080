use num_complex::Complex64;
use proptest::prelude::*;
use slater_barron::planewave::{
    evaluate_planewave_slater, mc_inner_product, mc_l2_distance, slater_norm_sq, slater_overlap, slater_sum_inner,
    Configuration, SlaterSum, WaveMatrix,
};
use slater_barron_oracles as oracle;

fn wave(n: usize, d: usize) -> impl Strategy<Value = WaveMatrix> {
    prop::collection::vec(-2.5f64..2.5, n * d).prop_map(move |v| WaveMatrix::new(n, d, v).unwrap())
}

fn shape() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=6, 1usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn transposition_flips_the_sign(
        (w, x, i, j) in shape().prop_filter("two particles", |s| s.0 >= 2).prop_flat_map(|(n, d)| {
            (wave(n, d), prop::collection::vec(-3.0f64..3.0, n * d), 0..n, 0..n)
        }).prop_filter("distinct", |t| t.2 != t.3)
    ) {
        let (n, d) = (w.n(), w.d());
        let x = Configuration::new(n, d, x).unwrap();
        let mut y = x.clone();
        y.swap_particles(i, j);
        let a = evaluate_planewave_slater(&w, &x).unwrap();
        let b = evaluate_planewave_slater(&w, &y).unwrap();
        prop_assert!((a + b).norm() <= 1e-12 * a.norm().max(1e-300) + 1e-14);
    }

    #[test]
    fn norm_is_at_most_one(w in shape().prop_flat_map(|(n, d)| wave(n, d))) {
        let s = slater_norm_sq(&w);
        prop_assert!((0.0..=1.0 + 1e-10).contains(&s), "norm_sq {}", s);
    }

    #[test]
    fn self_overlap_is_the_norm(w in shape().prop_flat_map(|(n, d)| wave(n, d))) {
        let a = slater_overlap(&w, &w).unwrap();
        let b = slater_norm_sq(&w);
        prop_assert!((a - b).abs() <= 1e-10 * b.max(1e-300) + 1e-15, "{} vs {}", a, b);
    }

    #[test]
    fn overlap_is_symmetric(
        (v, w) in shape().prop_flat_map(|(n, d)| (wave(n, d), wave(n, d)))
    ) {
        let a = slater_overlap(&v, &w).unwrap();
        let b = slater_overlap(&w, &v).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300) + 1e-15);
    }

    #[test]
    fn evaluation_matches_leibniz(
        (w, x) in (1usize..=5, 1usize..=3).prop_flat_map(|(n, d)| (wave(n, d), prop::collection::vec(-3.0f64..3.0, n * d)))
    ) {
        let (n, d) = (w.n(), w.d());
        let ours = evaluate_planewave_slater(&w, &Configuration::new(n, d, x.clone()).unwrap()).unwrap();
        let reference = oracle::planewave_slater_leibniz(w.as_slice(), &x, n, d);
        prop_assert!((ours - reference).norm() <= 1e-11);
    }
}

#[test]
fn overlaps_match_gauss_hermite_quadrature() {
    let cases = [
        (1, 1, vec![0.7], vec![-0.4]),
        (1, 2, vec![0.3, -1.1], vec![0.9, 0.2]),
        (2, 1, vec![0.5, -1.2], vec![1.4, 0.1]),
        (2, 2, vec![0.2, 0.8, -0.6, 1.0], vec![-0.3, 0.4, 1.1, -0.5]),
    ];
    for (n, d, v, w) in cases {
        let vm = WaveMatrix::new(n, d, v.clone()).unwrap();
        let wm = WaveMatrix::new(n, d, w.clone()).unwrap();
        let q = oracle::slater_inner_gh(&v, &w, n, d, 24);
        assert!((slater_overlap(&vm, &wm).unwrap() - q.re).abs() < 1e-10);
        assert!(q.im.abs() < 1e-12);
        let qn = oracle::slater_inner_gh(&w, &w, n, d, 24);
        assert!((slater_norm_sq(&wm) - qn.re).abs() < 1e-10);
    }
}

#[test]
fn far_apart_rows_are_orthonormal_orbitals() {
    for n in 1..=6 {
        let w = WaveMatrix::new(n, 1, (0..n).map(|i| 10.0 * i as f64).collect()).unwrap();
        let s = slater_norm_sq(&w);
        let tol = (-50.0f64).exp() * (n * n) as f64;
        assert!(s <= 1.0 && s >= 1.0 - tol.max(1e-10), "n = {n}: {s}");
    }
}

#[test]
fn coincident_rows_vanish() {
    let w = WaveMatrix::new(3, 2, vec![0.4, 0.1, 0.4, 0.1, -1.0, 2.0]).unwrap();
    assert_eq!(slater_norm_sq(&w), 0.0);
    let x = Configuration::new(3, 2, vec![0.3, -0.2, 1.0, 0.5, -0.7, 0.0]).unwrap();
    assert!(evaluate_planewave_slater(&w, &x).unwrap().norm() < 1e-15);
}

#[test]
fn small_waves_fall_back_to_multiprecision() {
    // ||a_{theta w}||^2 ~ theta^{n(n-1)} for small theta
    let w = WaveMatrix::new(4, 1, vec![1.0, -0.3, 0.5, 0.8]).unwrap();
    let a = slater_norm_sq(&w.scaled(1e-3));
    let b = slater_norm_sq(&w.scaled(2e-3));
    let ratio = b / a;
    assert!((ratio / 4096.0 - 1.0).abs() < 1e-2, "ratio {ratio}");
}

#[test]
fn monte_carlo_agrees_with_overlap_rule() {
    let v = WaveMatrix::new(2, 1, vec![0.3, -0.9]).unwrap();
    let w = WaveMatrix::new(2, 1, vec![1.1, 0.2]).unwrap();
    let (z, se) = mc_inner_product(
        |x: &Configuration| evaluate_planewave_slater(&v, x).unwrap(),
        |x: &Configuration| evaluate_planewave_slater(&w, x).unwrap(),
        2,
        1,
        1 << 16,
        3,
    )
    .unwrap();
    let exact = slater_overlap(&v, &w).unwrap();
    assert!((z - Complex64::new(exact, 0.0)).norm() <= 3.0 * se, "{z} vs {exact} (se {se})");
}

#[test]
fn distance_between_sums_matches_overlap_rule() {
    let a = SlaterSum::new(vec![
        (Complex64::new(0.8, 0.1), WaveMatrix::new(2, 1, vec![0.3, -0.9]).unwrap()),
        (Complex64::new(-0.2, 0.5), WaveMatrix::new(2, 1, vec![1.5, 0.4]).unwrap()),
    ])
    .unwrap();
    let b = SlaterSum::single(WaveMatrix::new(2, 1, vec![-0.7, 0.6]).unwrap());
    let exact = (a.norm_sq() + b.norm_sq() - 2.0 * slater_sum_inner(&a, &b).unwrap().re).sqrt();
    let est = mc_l2_distance(|x: &Configuration| a.eval(x).unwrap(), |x: &Configuration| b.eval(x).unwrap(), 2, 1, 1 << 16, 5)
        .unwrap();
    assert!((est.estimate - exact).abs() <= 3.0 * est.std_error, "{} vs {exact}", est.estimate);
}

#[test]
fn shape_mismatch_is_rejected() {
    let v = WaveMatrix::new(2, 1, vec![0.0, 1.0]).unwrap();
    let w = WaveMatrix::new(2, 2, vec![0.0; 4]).unwrap();
    assert!(slater_overlap(&v, &w).is_err());
    assert!(WaveMatrix::new(2, 2, vec![0.0; 3]).is_err());
}
