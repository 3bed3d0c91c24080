//! Multiprecision fallbacks built on MPFR.
//!
//! Gram and overlap matrices of nearly parallel plane waves are close to the
//! all-ones matrix, and their determinants are tiny differences of O(1)
//! numbers. These routines redo the elimination with as many bits as needed.

use rug::{Complex, Float};

use crate::error::{Error, Result};

pub const START_BITS: u32 = 128;
pub const MAX_BITS: u32 = 1 << 15;

struct Lu {
    sign: i32,
    pivots: Vec<Float>,
    singular: bool,
}

fn lu(mut a: Vec<Float>, n: usize) -> Lu {
    let mut sign = 1;
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if a[i * n + k].clone().abs() > a[p * n + k].clone().abs() {
                p = i;
            }
        }
        if a[p * n + k].is_zero() {
            return Lu { sign, pivots, singular: true };
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            sign = -sign;
        }
        let piv = a[k * n + k].clone();
        for i in k + 1..n {
            if a[i * n + k].is_zero() {
                continue;
            }
            let f = Float::with_val(piv.prec(), &a[i * n + k] / &piv);
            for j in k + 1..n {
                let t = Float::with_val(piv.prec(), &f * &a[k * n + j]);
                a[i * n + j] -= t;
            }
        }
        pivots.push(piv);
    }
    Lu { sign, pivots, singular: false }
}

fn min_pivot_log2(p: &[Float]) -> f64 {
    p.iter()
        .map(|x| x.clone().abs().log2().to_f64())
        .fold(f64::INFINITY, f64::min)
}

/// Determinant of a real matrix whose entries are produced at a requested
/// precision by `build`. Doubles the precision until every pivot clears the
/// rounding floor by 60 bits, capped at [`MAX_BITS`].
pub fn det_adaptive(n: usize, build: impl Fn(u32) -> Vec<Float>) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut bits = START_BITS;
    loop {
        let f = lu(build(bits), n);
        if f.singular {
            return 0.0;
        }
        let floor = 2.0 * (n as f64).log2() + 60.0 - bits as f64;
        if min_pivot_log2(&f.pivots) >= floor || bits >= MAX_BITS {
            let mut d = Float::with_val(bits, f.sign);
            for p in &f.pivots {
                d *= p;
            }
            return d.to_f64();
        }
        bits *= 2;
    }
}

/// ln|det| and sign at a fixed precision. Singular matrices give -inf.
pub fn log_det_at(a: Vec<Float>, n: usize, bits: u32) -> (i32, f64) {
    let f = lu(a, n);
    if f.singular {
        return (0, f64::NEG_INFINITY);
    }
    let mut sign = f.sign;
    let mut acc = Float::with_val(bits, 0);
    for p in &f.pivots {
        if *p < 0 {
            sign = -sign;
        }
        acc += p.clone().abs().ln();
    }
    (sign, acc.to_f64())
}

/// ln|det| validated by agreement between precision P and 2P.
pub fn log_det_validated(n: usize, build: impl Fn(u32) -> Vec<Float>) -> Result<(i32, f64)> {
    let mut bits = START_BITS;
    let mut prev = log_det_at(build(bits), n, bits);
    loop {
        let next = log_det_at(build(2 * bits), n, 2 * bits);
        let agree = (prev.1 == f64::NEG_INFINITY && next.1 == f64::NEG_INFINITY)
            || (prev.0 == next.0 && (prev.1 - next.1).abs() <= 1e-10 * (1.0 + next.1.abs()));
        if agree {
            return Ok(next);
        }
        bits *= 2;
        if bits > MAX_BITS {
            return Err(Error::Numerical(format!(
                "log-determinant did not stabilise below {MAX_BITS} bits"
            )));
        }
        prev = next;
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn jacobi_eigenvalues(mut a: Vec<Float>, n: usize, bits: u32) -> Vec<f64> {
    let fro: Float = a.iter().fold(Float::with_val(bits, 0), |s, x| s + Float::with_val(bits, x * x));
    let tol = fro * Float::with_val(bits, Float::i_exp(1, -2 * bits as i32));
    for _sweep in 0..100 {
        let mut off = Float::with_val(bits, 0);
        for p in 0..n {
            for q in p + 1..n {
                off += Float::with_val(bits, &a[p * n + q] * &a[p * n + q]);
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q].clone();
                if apq.is_zero() {
                    continue;
                }
                let theta = Float::with_val(bits, &a[q * n + q] - &a[p * n + p]) / Float::with_val(bits, &apq * 2u32);
                let root = Float::with_val(bits, theta.clone().square() + 1u32).sqrt();
                let mut t = Float::with_val(bits, 1u32) / (theta.clone().abs() + &root);
                if theta < 0 {
                    t = -t;
                }
                let c = Float::with_val(bits, t.clone().square() + 1u32).sqrt().recip();
                let s = Float::with_val(bits, &t * &c);
                for k in 0..n {
                    let akp = a[k * n + p].clone();
                    let akq = a[k * n + q].clone();
                    a[k * n + p] = Float::with_val(bits, &c * &akp) - Float::with_val(bits, &s * &akq);
                    a[k * n + q] = Float::with_val(bits, &s * &akp) + Float::with_val(bits, &c * &akq);
                }
                for k in 0..n {
                    let apk = a[p * n + k].clone();
                    let aqk = a[q * n + k].clone();
                    a[p * n + k] = Float::with_val(bits, &c * &apk) - Float::with_val(bits, &s * &aqk);
                    a[q * n + k] = Float::with_val(bits, &s * &apk) + Float::with_val(bits, &c * &aqk);
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i].to_f64()).collect();
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
    ev
}

/// Determinant of a complex matrix at the entries' precision.
pub fn det_complex(mut a: Vec<Complex>, n: usize, bits: u32) -> Complex {
    let mut det = Complex::with_val(bits, (1, 0));
    for k in 0..n {
        let mut p = k;
        let mut best = Float::with_val(bits, a[k * n + k].abs_ref());
        for i in k + 1..n {
            let m = Float::with_val(bits, a[i * n + k].abs_ref());
            if m > best {
                best = m;
                p = i;
            }
        }
        if best.is_zero() {
            return Complex::with_val(bits, (0, 0));
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let piv = a[k * n + k].clone();
        det *= &piv;
        for i in k + 1..n {
            let f = Complex::with_val(bits, &a[i * n + k] / &piv);
            for j in k + 1..n {
                let t = Complex::with_val(bits, &f * &a[k * n + j]);
                a[i * n + j] -= t;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(v: &[f64], bits: u32) -> Vec<Float> {
        v.iter().map(|x| Float::with_val(bits, *x)).collect()
    }

    #[test]
    fn det_matches_f64_on_well_conditioned() {
        let a = [2.0, -1.0, 0.5, 0.3, 1.0, 4.0, -2.0, 0.7, 1.1];
        let d = det_adaptive(3, |b| mat(&a, b));
        assert!((d - crate::linalg::det(&a, 3)).abs() < 1e-13);
    }

    #[test]
    fn resolves_tiny_determinant_of_near_ones_matrix() {
        // exp(-(t_i - t_j)^2 / 2) for t = (0, e, 2e): det ~ 2 e^6 / ... at small e
        let e = 1e-6f64;
        let build = |b: u32| {
            let t = [0.0, e, 2.0 * e];
            let mut v = Vec::new();
            for i in 0..3 {
                for j in 0..3 {
                    let d = Float::with_val(b, t[i]) - t[j];
                    v.push((-(d.square()) / 2u32).exp());
                }
            }
            v
        };
        let d = det_adaptive(3, build);
        // leading order: det = 2 e^6 for this geometry
        assert!((d / (2.0 * e.powi(6)) - 1.0).abs() < 1e-6, "{d}");
        assert!(crate::linalg::det(&[1.0; 9], 3) == 0.0);
    }

    #[test]
    fn jacobi_on_known_spectrum() {
        let a = [2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 5.0];
        let ev = jacobi_eigenvalues(mat(&a, 200), 3, 200);
        for (x, y) in ev.iter().zip([5.0, 3.0, 1.0]) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn validated_logdet() {
        let a = [4.0, 1.0, 1.0, 3.0];
        let (s, l) = log_det_validated(2, |b| mat(&a, b)).unwrap();
        assert_eq!(s, 1);
        assert!((l - 11f64.ln()).abs() < 1e-14);
    }
}
