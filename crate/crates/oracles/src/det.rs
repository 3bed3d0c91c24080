use nalgebra::DMatrix;
use num_complex::Complex64;
use rug::Float;

fn next_perm(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn inversion_sign(p: &[usize]) -> f64 {
    let mut inv = 0usize;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Visit every permutation of 0..n in lexicographic order with its sign.
pub fn for_each_perm(n: usize, mut f: impl FnMut(&[usize], f64)) {
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        f(&p, inversion_sign(&p));
        if !next_perm(&mut p) {
            break;
        }
    }
}

/// Determinant by the Leibniz formula. `a` is row major, n x n.
pub fn leibniz_det(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for_each_perm(n, |p, sg| {
        s += sg * (0..n).map(|i| a[i * n + p[i]]).product::<f64>();
    });
    s
}

pub fn leibniz_det_complex(a: &[Complex64], n: usize) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for_each_perm(n, |p, sg| {
        let mut t = Complex64::new(sg, 0.0);
        for i in 0..n {
            t *= a[i * n + p[i]];
        }
        s += t;
    });
    s
}

/// The matrix (exp(v_i . w_j)) for row-major n x d inputs.
pub fn dense_exp_gram(v: &[f64], w: &[f64], n: usize, d: usize) -> Vec<f64> {
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let dot: f64 = (0..d).map(|a| v[i * d + a] * w[j * d + a]).sum();
            g[i * n + j] = dot.exp();
        }
    }
    g
}

/// Eigenvalues of a symmetric matrix, descending.
pub fn sym_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let m = DMatrix::from_row_slice(n, n, a);
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    ev
}

/// log det(exp(w_i . w_j)) by Cholesky in `bits`-bit arithmetic.
///
/// Returns None if a pivot is not positive at that precision.
pub fn mp_logdet_cholesky(w: &[f64], n: usize, d: usize, bits: u32) -> Option<f64> {
    let mut a: Vec<Float> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut dot = Float::with_val(bits, 0);
            for k in 0..d {
                dot += Float::with_val(bits, w[i * d + k]) * w[j * d + k];
            }
            a.push(dot.exp());
        }
    }
    let mut logdet = Float::with_val(bits, 0);
    for j in 0..n {
        let mut s = a[j * n + j].clone();
        for k in 0..j {
            s -= Float::with_val(bits, &a[j * n + k] * &a[j * n + k]);
        }
        if s <= 0 {
            return None;
        }
        logdet += Float::with_val(bits, s.ln_ref());
        let ljj = s.sqrt();
        for i in j + 1..n {
            let mut t = a[i * n + j].clone();
            for k in 0..j {
                t -= Float::with_val(bits, &a[i * n + k] * &a[j * n + k]);
            }
            a[i * n + j] = t / &ljj;
        }
        a[j * n + j] = ljj;
    }
    Some(logdet.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leibniz_small() {
        assert_eq!(leibniz_det(&[1.0, 2.0, 3.0, 4.0], 2), -2.0);
        let a = [2.0, 0.0, 1.0, 1.0, 3.0, 0.0, 0.0, 1.0, 4.0];
        assert!((leibniz_det(&a, 3) - 25.0).abs() < 1e-12);
    }

    #[test]
    fn perm_count() {
        let mut c = 0;
        let mut s = 0.0;
        for_each_perm(5, |_, sg| {
            c += 1;
            s += sg;
        });
        assert_eq!(c, 120);
        assert_eq!(s, 0.0);
    }

    #[test]
    fn cholesky_matches_leibniz() {
        let w = [0.3, -0.2, 0.5, 0.1];
        let g = dense_exp_gram(&w, &w, 4, 1);
        let det = leibniz_det(&g, 4);
        let ld = mp_logdet_cholesky(&w, 4, 1, 512).unwrap();
        assert!((ld - det.ln()).abs() < 1e-6);
    }
}
