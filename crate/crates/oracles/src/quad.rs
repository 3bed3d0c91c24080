use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 1..=m {
        let mut z = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut pp;
        loop {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j as f64 - 1.0) * z * p2 - (j as f64 - 1.0) * p3) / j as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        x[i - 1] = -z;
        x[n - i] = z;
        w[i - 1] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - i] = w[i - 1];
    }
    (x, w)
}

/// Gauss-Hermite rule for the standard normal density: E f(Y) ~ sum w_i f(y_i).
///
/// Nodes come from Newton iteration on orthonormal physicists' Hermite
/// polynomials and are then rescaled by sqrt(2).
pub fn gauss_hermite_prob(n: usize) -> (Vec<f64>, Vec<f64>) {
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (PIM4, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-14 * z1.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    let s = PI.sqrt();
    let y = x.iter().map(|v| v * 2f64.sqrt()).collect();
    let w = w.iter().map(|v| v / s).collect();
    (y, w)
}

fn gl_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64, x: &[f64], w: &[f64]) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(w).map(|(xi, wi)| wi * f(c + h * xi)).sum::<f64>() * h
}

/// Adaptive bisection with a 20-point Gauss-Legendre panel rule.
pub fn adaptive_gl(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (x, w) = gauss_legendre(20);
    let mut stack = vec![(a, b, gl_panel(&f, a, b, &x, &w), 0u32)];
    let mut total = 0.0;
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = gl_panel(&f, lo, mid, &x, &w);
        let right = gl_panel(&f, mid, hi, &x, &w);
        let scale = ((hi - lo) / (b - a).abs().max(f64::MIN_POSITIVE)).abs();
        if (left + right - whole).abs() <= tol * scale.max(1e-3) || depth > 40 {
            total += left + right;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((v - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn hermite_moments() {
        let (y, w) = gauss_hermite_prob(30);
        let m0: f64 = w.iter().sum();
        let m4: f64 = y.iter().zip(&w).map(|(y, w)| w * y.powi(4)).sum();
        let m6: f64 = y.iter().zip(&w).map(|(y, w)| w * y.powi(6)).sum();
        assert!((m0 - 1.0).abs() < 1e-13);
        assert!((m4 - 3.0).abs() < 1e-12);
        assert!((m6 - 15.0).abs() < 1e-11);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let v = adaptive_gl(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12);
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() < 1e-8 * exact);
    }
}
