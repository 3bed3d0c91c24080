//! Small dense determinants by LU with partial pivoting.
//!
//! Matrices are row-major slices of length n*n.

use num_complex::Complex64;

/// Result of an f64 LU determinant.
#[derive(Clone, Copy, Debug)]
pub struct LuDet {
    pub det: f64,
    /// Smallest |u_kk| encountered; 0 for an exactly singular matrix.
    pub min_pivot: f64,
}

pub fn lu_det(a: &[f64], n: usize) -> LuDet {
    let mut m = a.to_vec();
    let mut det = 1.0;
    let mut min_pivot = f64::INFINITY;
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if m[i * n + k].abs() > m[p * n + k].abs() {
                p = i;
            }
        }
        let piv = m[p * n + k];
        min_pivot = min_pivot.min(piv.abs());
        if piv == 0.0 {
            return LuDet { det: 0.0, min_pivot: 0.0 };
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        det *= piv;
        for i in k + 1..n {
            let f = m[i * n + k] / piv;
            if f != 0.0 {
                for j in k + 1..n {
                    m[i * n + j] -= f * m[k * n + j];
                }
            }
        }
    }
    if n == 0 {
        min_pivot = 1.0;
    }
    LuDet { det, min_pivot }
}

pub fn det(a: &[f64], n: usize) -> f64 {
    lu_det(a, n).det
}

/// (sign, ln|det|), with ln|det| = -inf for a singular matrix.
pub fn log_det(a: &[f64], n: usize) -> (f64, f64) {
    let mut m = a.to_vec();
    let mut sign = 1.0;
    let mut acc = 0.0;
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if m[i * n + k].abs() > m[p * n + k].abs() {
                p = i;
            }
        }
        let piv = m[p * n + k];
        if piv == 0.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            sign = -sign;
        }
        if piv < 0.0 {
            sign = -sign;
        }
        acc += piv.abs().ln();
        for i in k + 1..n {
            let f = m[i * n + k] / piv;
            for j in k + 1..n {
                m[i * n + j] -= f * m[k * n + j];
            }
        }
    }
    (sign, acc)
}

pub fn det_complex(a: &[Complex64], n: usize) -> Complex64 {
    let mut m = a.to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if m[i * n + k].norm() > m[p * n + k].norm() {
                p = i;
            }
        }
        let piv = m[p * n + k];
        if piv == Complex64::new(0.0, 0.0) {
            return piv;
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        det *= piv;
        for i in k + 1..n {
            let f = m[i * n + k] / piv;
            for j in k + 1..n {
                let t = m[k * n + j];
                m[i * n + j] -= f * t;
            }
        }
    }
    det
}

fn minor<T: Copy>(a: &[T], n: usize, r: usize, c: usize) -> Vec<T> {
    let mut out = Vec::with_capacity((n - 1) * (n - 1));
    for i in (0..n).filter(|&i| i != r) {
        for j in (0..n).filter(|&j| j != c) {
            out.push(a[i * n + j]);
        }
    }
    out
}

/// Cofactor matrix C with C_ij = (-1)^{i+j} det(minor_ij). Computed from
/// minors so it stays finite for singular inputs.
pub fn cofactors(a: &[f64], n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            c[i * n + j] = s * det(&minor(a, n, i, j), n - 1);
        }
    }
    c
}

pub fn cofactors_complex(a: &[Complex64], n: usize) -> Vec<Complex64> {
    if n == 1 {
        return vec![Complex64::new(1.0, 0.0)];
    }
    let mut c = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            c[i * n + j] = det_complex(&minor(a, n, i, j), n - 1) * s;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_determinants() {
        assert_eq!(det(&[1.0, 2.0, 3.0, 4.0], 2), -2.0);
        let a = [0.0, 1.0, 1.0, 0.0];
        assert_eq!(det(&a, 2), -1.0);
        let (s, l) = log_det(&[2.0, 0.0, 0.0, -3.0], 2);
        assert_eq!(s, -1.0);
        assert!((l - 6f64.ln()).abs() < 1e-15);
        assert_eq!(det(&[1.0, 2.0, 2.0, 4.0], 2), 0.0);
    }

    #[test]
    fn cofactor_expansion_gives_det() {
        let a = [2.0, -1.0, 0.5, 0.3, 1.0, 4.0, -2.0, 0.7, 1.1];
        let c = cofactors(&a, 3);
        for i in 0..3 {
            let e: f64 = (0..3).map(|j| a[i * 3 + j] * c[i * 3 + j]).sum();
            assert!((e - det(&a, 3)).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_det_2x2() {
        let i = Complex64::new(0.0, 1.0);
        let a = [i, Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), i];
        assert!((det_complex(&a, 2) - Complex64::new(-3.0, 0.0)).norm() < 1e-15);
    }
}
