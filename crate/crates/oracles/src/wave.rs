use num_complex::Complex64;

use crate::det::leibniz_det_complex;
use crate::quad::gauss_hermite_prob;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// a_w(x) by the Leibniz formula; `w` and `x` row major n x d.
pub fn planewave_slater_leibniz(w: &[f64], x: &[f64], n: usize, d: usize) -> Complex64 {
    let mut m = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let ph: f64 = (0..d).map(|a| w[j * d + a] * x[i * d + a]).sum();
            m[i * n + j] = Complex64::from_polar(1.0, ph);
        }
    }
    leibniz_det_complex(&m, n) / factorial(n).sqrt()
}

/// <a_v, a_w> under N(0, I_{nd}) by a tensor Gauss-Hermite rule with `k` nodes per axis.
pub fn slater_inner_gh(v: &[f64], w: &[f64], n: usize, d: usize, k: usize) -> Complex64 {
    let (y, wt) = gauss_hermite_prob(k);
    let dim = n * d;
    let mut idx = vec![0usize; dim];
    let mut x = vec![0.0; dim];
    let mut s = Complex64::new(0.0, 0.0);
    loop {
        let mut weight = 1.0;
        for a in 0..dim {
            x[a] = y[idx[a]];
            weight *= wt[idx[a]];
        }
        let av = planewave_slater_leibniz(v, &x, n, d);
        let aw = planewave_slater_leibniz(w, &x, n, d);
        s += av.conj() * aw * weight;
        let mut a = 0;
        loop {
            if a == dim {
                return s;
            }
            idx[a] += 1;
            if idx[a] < k {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// The same tensor Gauss-Hermite sum as [`slater_inner_gh`], evaluated by
/// expanding both determinants: the node sum factors into det G with
/// G_ij = prod_a sum_q wt_q exp(i (w_j - v_i)_a y_q). Cheap enough for
/// hundreds of nodes per axis.
pub fn slater_inner_gh_factored(v: &[f64], w: &[f64], n: usize, d: usize, k: usize) -> Complex64 {
    let (y, wt) = gauss_hermite_prob(k);
    let one_d = |om: f64| -> Complex64 { y.iter().zip(&wt).map(|(y, wt)| Complex64::from_polar(*wt, om * y)).sum() };
    let mut g = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            g[i * n + j] = (0..d).map(|a| one_d(w[j * d + a] - v[i * d + a])).product();
        }
    }
    leibniz_det_complex(&g, n)
}
