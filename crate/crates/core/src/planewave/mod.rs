//! Plane-wave Slater determinants `a_w` under the standard Gaussian envelope.

mod mc;

pub use mc::{mc_inner_product, mc_l2_distance, McEstimate, DEFAULT_SAMPLES};

use std::ops::{AddAssign, Mul};

use num_complex::Complex64;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::mp;
use crate::permutations::{check_enumerable, factorial, heap_visit, MAX_ENUMERATED};

/// Pivot size below which f64 elimination hands over to multiprecision.
const PIVOT_FLOOR: f64 = 1e-3;

fn check_block(n: usize, d: usize, data: &[f64], what: &str) -> Result<()> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidInput(format!("{what}: n and d must be at least 1")));
    }
    if data.len() != n * d {
        return Err(Error::Shape(format!("{what}: expected {} entries, got {}", n * d, data.len())));
    }
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("{what}: entry {i} is not finite")));
    }
    Ok(())
}

/// n wavevectors in R^d, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveMatrix {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl WaveMatrix {
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        check_block(n, d, &data, "wave matrix")?;
        Ok(WaveMatrix { n, d, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Shape("wave matrix rows differ in length".into()));
        }
        Self::new(rows.len(), d, rows.concat())
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        WaveMatrix { n, d, data: vec![0.0; n * d] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn scaled(&self, t: f64) -> Self {
        WaveMatrix { n: self.n, d: self.d, data: self.data.iter().map(|v| v * t).collect() }
    }

    pub fn swap_rows(&mut self, i: usize, j: usize) {
        for a in 0..self.d {
            self.data.swap(i * self.d + a, j * self.d + a);
        }
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn inf_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Particle positions x_1..x_n in R^d, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl Configuration {
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        check_block(n, d, &data, "configuration")?;
        Ok(Configuration { n, d, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn swap_particles(&mut self, i: usize, j: usize) {
        for a in 0..self.d {
            self.data.swap(i * self.d + a, j * self.d + a);
        }
    }

    fn check_shape(&self, n: usize, d: usize) -> Result<()> {
        if self.n != n || self.d != d {
            return Err(Error::Shape(format!(
                "configuration is {}x{}, expected {n}x{d}",
                self.n, self.d
            )));
        }
        Ok(())
    }
}

/// psi = sum_k c_k a_{w_k}; any 1/m prefactor lives in the coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlaterSum {
    pub terms: Vec<(Complex64, WaveMatrix)>,
}

impl SlaterSum {
    pub fn new(terms: Vec<(Complex64, WaveMatrix)>) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::InvalidInput("a Slater sum needs at least one term".into()));
        };
        let (n, d) = (first.n(), first.d());
        if terms.iter().any(|(c, w)| w.n() != n || w.d() != d || !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Shape("Slater sum terms must share (n, d) and be finite".into()));
        }
        Ok(SlaterSum { terms })
    }

    pub fn single(w: WaveMatrix) -> Self {
        SlaterSum { terms: vec![(Complex64::new(1.0, 0.0), w)] }
    }

    pub fn n(&self) -> usize {
        self.terms[0].1.n()
    }

    pub fn d(&self) -> usize {
        self.terms[0].1.d()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &Configuration) -> Result<Complex64> {
        let mut s = Complex64::new(0.0, 0.0);
        for (c, w) in &self.terms {
            s += c * evaluate_planewave_slater(w, x)?;
        }
        Ok(s)
    }

    pub fn norm_sq(&self) -> f64 {
        slater_sum_inner(self, self).map(|z| z.re).unwrap_or(f64::NAN)
    }
}

pub(crate) fn planewave_matrix(w: &[f64], x: &[f64], n: usize, d: usize) -> Vec<Complex64> {
    let mut m = Vec::with_capacity(n * n);
    for i in 0..n {
        let xi = &x[i * d..(i + 1) * d];
        for j in 0..n {
            let ph: f64 = w[j * d..(j + 1) * d].iter().zip(xi).map(|(a, b)| a * b).sum();
            m.push(Complex64::from_polar(1.0, ph));
        }
    }
    m
}

/// a_w(x) = det(exp(i w_j . x_i)) / sqrt(n!).
pub fn evaluate_planewave_slater(w: &WaveMatrix, x: &Configuration) -> Result<Complex64> {
    x.check_shape(w.n, w.d)?;
    let m = planewave_matrix(&w.data, &x.data, w.n, w.d);
    Ok(linalg::det_complex(&m, w.n) / factorial(w.n).sqrt())
}

/// <e_v, e_w> = exp(-|w - v|^2 / 2) under N(0, I_d).
pub fn single_particle_overlap(v: &[f64], w: &[f64]) -> Result<f64> {
    if v.len() != w.len() {
        return Err(Error::Shape(format!("vectors of length {} and {}", v.len(), w.len())));
    }
    Ok(sq_dist(v, w).mul(-0.5).exp())
}

fn sq_dist(v: &[f64], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(a, b)| (b - a) * (b - a)).sum()
}

fn dot(v: &[f64], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(a, b)| a * b).sum()
}

/// Determinant with a multiprecision retry when elimination loses accuracy.
fn guarded_det(n: usize, f64_entries: Vec<f64>, mp_entries: impl Fn(u32) -> Vec<Float>) -> f64 {
    let lu = linalg::lu_det(&f64_entries, n);
    if lu.min_pivot >= PIVOT_FLOOR {
        return lu.det;
    }
    mp::det_adaptive(n, mp_entries)
}

pub(crate) fn overlap_matrix(v: &WaveMatrix, w: &WaveMatrix) -> Vec<f64> {
    let n = v.n;
    let mut b = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            b.push((-0.5 * sq_dist(v.row(i), w.row(j))).exp());
        }
    }
    b
}

fn check_pair(v: &WaveMatrix, w: &WaveMatrix) -> Result<()> {
    if v.n != w.n || v.d != w.d {
        return Err(Error::Shape(format!("wave matrices {}x{} and {}x{}", v.n, v.d, w.n, w.d)));
    }
    Ok(())
}

/// <a_v, a_w> = det(B), B_ij = exp(-|w_j - v_i|^2 / 2).
pub fn slater_overlap(v: &WaveMatrix, w: &WaveMatrix) -> Result<f64> {
    check_pair(v, w)?;
    let n = v.n;
    let b = overlap_matrix(v, w);
    Ok(guarded_det(n, b, |bits| {
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut s = Float::with_val(bits, 0);
                for (a, c) in v.row(i).iter().zip(w.row(j)) {
                    let diff = Float::with_val(bits, c - Float::with_val(bits, *a));
                    s += diff.square();
                }
                out.push((-s / 2u32).exp());
            }
        }
        out
    }))
}

/// |a_w|^2 = exp(-|w|^2) det(exp(w_i . w_j)).
///
/// The Gram matrix is equilibrated as exp(w_i.w_j - |w_i|^2/2 - |w_j|^2/2),
/// which has unit diagonal and the same determinant times exp(-|w|^2).
pub fn slater_norm_sq(w: &WaveMatrix) -> f64 {
    let n = w.n;
    let norms: Vec<f64> = (0..n).map(|i| dot(w.row(i), w.row(i))).collect();
    let mut g = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            g.push((dot(w.row(i), w.row(j)) - 0.5 * norms[i] - 0.5 * norms[j]).exp());
        }
    }
    let v = guarded_det(n, g, |bits| {
        let rows: Vec<Vec<Float>> = (0..n)
            .map(|i| w.row(i).iter().map(|a| Float::with_val(bits, *a)).collect())
            .collect();
        let dotp = |i: usize, j: usize| {
            rows[i].iter().zip(&rows[j]).fold(Float::with_val(bits, 0), |s, (a, b)| s + Float::with_val(bits, a * b))
        };
        let half: Vec<Float> = (0..n).map(|i| dotp(i, i) / 2u32).collect();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push((dotp(i, j) - &half[i] - &half[j]).exp());
            }
        }
        out
    });
    v.max(0.0)
}

/// Gradient of slater_overlap(v, w) with respect to the entries of v.
///
/// d det(B) / d v_{i,a} = sum_l cof_il(B) B_il (w_{l,a} - v_{i,a}).
pub fn slater_overlap_grad_v(v: &WaveMatrix, w: &WaveMatrix) -> Result<(f64, Vec<f64>)> {
    check_pair(v, w)?;
    let (n, d) = (v.n, v.d);
    let b = overlap_matrix(v, w);
    let cof = linalg::cofactors(&b, n);
    let value: f64 = (0..n).map(|l| b[l] * cof[l]).sum();
    let mut g = vec![0.0; n * d];
    for i in 0..n {
        for l in 0..n {
            let f = cof[i * n + l] * b[i * n + l];
            for a in 0..d {
                g[i * d + a] += f * (w.row(l)[a] - v.row(i)[a]);
            }
        }
    }
    Ok((value, g))
}

/// sum_jk conj(c_j) c'_k <a_{w_j}, a_{w'_k}>.
pub fn slater_sum_inner(a: &SlaterSum, b: &SlaterSum) -> Result<Complex64> {
    if a.n() != b.n() || a.d() != b.d() {
        return Err(Error::Shape("Slater sums of different (n, d)".into()));
    }
    let mut s = Complex64::new(0.0, 0.0);
    for (c, v) in &a.terms {
        for (c2, w) in &b.terms {
            s += c.conj() * c2 * slater_overlap(v, w)?;
        }
    }
    Ok(s)
}

/// (1/sqrt(n!)) sum_pi (-1)^pi f(pi x) with (pi x)_i = x_{pi(i)}.
pub fn antisymmetrize_pointwise<T, F>(mut f: F, x: &Configuration) -> Result<T>
where
    T: Copy + Default + AddAssign + Mul<f64, Output = T>,
    F: FnMut(&Configuration) -> T,
{
    check_enumerable(x.n, MAX_ENUMERATED)?;
    let mut buf = x.clone();
    let mut perm: Vec<usize> = (0..x.n).collect();
    let mut acc = T::default();
    let d = x.d;
    heap_visit(&mut perm, |p, sign| {
        for (i, &pi) in p.iter().enumerate() {
            buf.data[i * d..(i + 1) * d].copy_from_slice(&x.data[pi * d..(pi + 1) * d]);
        }
        acc += f(&buf) * f64::from(sign);
    });
    Ok(acc * (1.0 / factorial(x.n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wm(n: usize, d: usize, v: &[f64]) -> WaveMatrix {
        WaveMatrix::new(n, d, v.to_vec()).unwrap()
    }

    #[test]
    fn one_particle_is_a_plane_wave() {
        let w = wm(1, 2, &[0.3, -1.1]);
        let x = Configuration::new(1, 2, vec![2.0, 0.5]).unwrap();
        let e = Complex64::from_polar(1.0, 0.3 * 2.0 - 1.1 * 0.5);
        assert!((evaluate_planewave_slater(&w, &x).unwrap() - e).norm() < 1e-15);
    }

    #[test]
    fn two_particle_expansion() {
        let (w1, w2, x1, x2) = (0.7, -0.4, 1.3, 0.2);
        let w = wm(2, 1, &[w1, w2]);
        let x = Configuration::new(2, 1, vec![x1, x2]).unwrap();
        let e = (Complex64::from_polar(1.0, w1 * x1 + w2 * x2) - Complex64::from_polar(1.0, w2 * x1 + w1 * x2))
            / 2f64.sqrt();
        assert!((evaluate_planewave_slater(&w, &x).unwrap() - e).norm() < 1e-15);
    }

    #[test]
    fn repeated_rows_vanish() {
        let w = wm(3, 1, &[0.5, 0.5, -1.0]);
        let x = Configuration::new(3, 1, vec![0.1, 0.9, -2.0]).unwrap();
        assert!(evaluate_planewave_slater(&w, &x).unwrap().norm() < 1e-15);
        assert_eq!(slater_norm_sq(&w), 0.0);
    }

    #[test]
    fn shape_errors() {
        let w = wm(2, 1, &[0.0, 1.0]);
        let x = Configuration::new(3, 1, vec![0.0; 3]).unwrap();
        assert!(matches!(evaluate_planewave_slater(&w, &x), Err(Error::Shape(_))));
        assert!(matches!(single_particle_overlap(&[1.0], &[1.0, 2.0]), Err(Error::Shape(_))));
        assert!(WaveMatrix::new(2, 1, vec![1.0, f64::NAN]).is_err());
        assert!(WaveMatrix::new(0, 1, vec![]).is_err());
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(single_particle_overlap(&[0.4], &[0.4]).unwrap(), 1.0);
        assert!((single_particle_overlap(&[0.0], &[1.0]).unwrap() - (-0.5f64).exp()).abs() < 1e-16);
        let v = wm(2, 1, &[0.0, 1.0]);
        let target = 1.0 - (-1.0f64).exp();
        assert!((slater_overlap(&v, &v).unwrap() - target).abs() < 1e-15);
        assert!((slater_norm_sq(&v) - target).abs() < 1e-15);
        let mut t = v.clone();
        t.swap_rows(0, 1);
        assert!((slater_overlap(&v, &t).unwrap() + target).abs() < 1e-15);
    }

    #[test]
    fn norm_of_single_particle_is_one() {
        for w in [0.0, 1.0, -7.5, 30.0] {
            assert!((slater_norm_sq(&wm(1, 1, &[w])) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn sum_inner_examples() {
        let w = wm(2, 1, &[0.0, 1.0]);
        let a = SlaterSum::single(w.clone());
        assert!((slater_sum_inner(&a, &a).unwrap().re - slater_norm_sq(&w)).abs() < 1e-15);
        let b = SlaterSum::new(vec![(Complex64::new(2.0, 0.0), w.clone())]).unwrap();
        let ab = slater_sum_inner(&a, &b).unwrap();
        assert!((ab - 2.0 * slater_norm_sq(&w)).norm() < 1e-15);
        let c = Complex64::new(0.3, -1.2);
        let z = SlaterSum::new(vec![(c, w.clone()), (-c, w)]).unwrap();
        assert!(z.norm_sq().abs() < 1e-15);
    }

    #[test]
    fn antisymmetrizer_reproduces_slater() {
        let w = wm(3, 2, &[0.3, -0.2, 1.0, 0.4, -0.7, 0.9]);
        let x = Configuration::new(3, 2, vec![0.5, 1.0, -0.3, 0.2, 1.4, -1.1]).unwrap();
        let prod = |y: &Configuration| {
            let ph: f64 = (0..3).map(|j| dot(w.row(j), y.row(j))).sum();
            Complex64::from_polar(1.0, ph)
        };
        let a = antisymmetrize_pointwise(prod, &x).unwrap();
        assert!((a - evaluate_planewave_slater(&w, &x).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn low_degree_polynomials_vanish() {
        let x = Configuration::new(3, 1, vec![0.4, -1.3, 2.2]).unwrap();
        let v: f64 = antisymmetrize_pointwise(|y: &Configuration| y.row(0)[0], &x).unwrap();
        assert!(v.abs() < 1e-15);
        let sym: f64 = antisymmetrize_pointwise(|y: &Configuration| y.row(0)[0] * y.row(1)[0], &x).unwrap();
        assert!(sym.abs() < 1e-15);
    }

    #[test]
    fn antisymmetrizer_cap() {
        let x = Configuration::new(11, 1, vec![0.0; 11]).unwrap();
        let r: Result<f64> = antisymmetrize_pointwise(|_| 1.0, &x);
        assert!(matches!(r, Err(Error::Capability(_))));
    }

    #[test]
    fn overlap_gradient_matches_finite_differences() {
        let v = wm(3, 2, &[0.3, -0.2, 1.0, 0.4, -0.7, 0.9]);
        let w = wm(3, 2, &[0.1, 0.2, 0.8, -0.4, -0.5, 1.2]);
        let (val, g) = slater_overlap_grad_v(&v, &w).unwrap();
        assert!((val - slater_overlap(&v, &w).unwrap()).abs() < 1e-14);
        let h = 1e-6;
        for k in 0..6 {
            let mut p = v.clone();
            p.as_mut_slice()[k] += h;
            let mut m = v.clone();
            m.as_mut_slice()[k] -= h;
            let fd = (slater_overlap(&p, &w).unwrap() - slater_overlap(&m, &w).unwrap()) / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-8);
        }
    }
}
