use std::f64::consts::PI;

use num_complex::Complex64;

use crate::quad::{adaptive_gl, gauss_hermite_prob, gauss_legendre};

/// Si(y) as the integral of sin(s)/s over [0, y].
pub fn sine_integral_quad(y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let sinc = |s: f64| if s == 0.0 { 1.0 } else { s.sin() / s };
    adaptive_gl(sinc, 0.0, y, 1e-14)
}

/// The ultraviolet Fourier integral of ReLU,
/// -(1/2pi) int_{|t| >= gamma} exp(i t y) / t^2 dt = -(1/pi) int_gamma^inf cos(t y) / t^2 dt.
///
/// Panels are split at half periods of the cosine and on a geometric grid
/// from gamma; the tail beyond T is summed from its asymptotic expansion.
pub fn highpass_by_fourier(y: f64, gamma: f64) -> f64 {
    let ay = y.abs();
    if ay == 0.0 {
        return -1.0 / (PI * gamma);
    }
    let t_end = (400.0 / ay).max(4.0 * gamma);
    let mut cuts = vec![gamma, t_end];
    let half = PI / ay;
    let mut k = (gamma / half).ceil();
    while k * half < t_end {
        cuts.push(k * half);
        k += 1.0;
    }
    let mut g = gamma;
    while g < t_end {
        cuts.push(g);
        g *= 1.5;
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * b.abs());
    let (x, w) = gauss_legendre(24);
    let mut s = 0.0;
    for p in cuts.windows(2) {
        let (c, h) = (0.5 * (p[0] + p[1]), 0.5 * (p[1] - p[0]));
        for (xi, wi) in x.iter().zip(&w) {
            let t = c + h * xi;
            s += wi * h * (t * ay).cos() / (t * t);
        }
    }
    // J(s) = int_T^inf e^{i t y} t^{-s} dt = (i/y) e^{iTy} T^{-s} - (i s / y) J(s+1)
    let e = Complex64::from_polar(1.0, t_end * ay);
    let mut tail = Complex64::new(0.0, 0.0);
    let mut coef = Complex64::new(1.0, 0.0);
    for j in 0..30 {
        let sj = 2.0 + j as f64;
        let term = coef * Complex64::new(0.0, 1.0 / ay) * e * t_end.powf(-sj);
        tail += term;
        coef *= Complex64::new(0.0, -sj / ay);
        if term.norm() < 1e-20 {
            break;
        }
    }
    -(s + tail.re) / PI
}

/// int relu(y - s) sigma(s)(1 - sigma(s)) ds with sigma the logistic function.
pub fn softplus_by_convolution(y: f64) -> f64 {
    let dens = |s: f64| {
        let e = (-s.abs()).exp();
        e / ((1.0 + e) * (1.0 + e))
    };
    let lo = y.min(0.0) - 60.0;
    let mut s = 0.0;
    let mut a = lo;
    while a < y {
        let b = (a + 2.0).min(y);
        s += adaptive_gl(|t| (y - t) * dens(t), a, b, 1e-15);
        a = b;
    }
    s
}

fn hermite_he_explicit(k: usize, y: f64) -> f64 {
    let mut s = 0.0;
    let mut fact = vec![1.0f64; k + 1];
    for i in 1..=k {
        fact[i] = fact[i - 1] * i as f64;
    }
    for m in 0..=k / 2 {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * y.powi((k - 2 * m) as i32) / (fact[m] * fact[k - 2 * m] * 2f64.powi(m as i32));
    }
    s * fact[k]
}

/// <h_k, e^{i w .}> under N(0,1) by Gauss-Hermite quadrature.
pub fn hermite_orbital_overlap_gh(k: usize, w: f64) -> Complex64 {
    let (y, wt) = gauss_hermite_prob(80);
    let norm = (1..=k).map(|i| i as f64).product::<f64>().sqrt();
    y.iter()
        .zip(&wt)
        .map(|(y, wt)| Complex64::from_polar(hermite_he_explicit(k, *y) / norm * wt, w * y))
        .sum()
}
