//! Low-rank structure of exp(v_i . w_j) and the determinant bound.

use nalgebra::DMatrix;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mp;
use crate::planewave::{slater_norm_sq, WaveMatrix};
use crate::rng;

pub const MAX_ORDER: usize = 60;

#[derive(Clone, Debug, PartialEq)]
pub struct LowRankTerm {
    pub k: usize,
    pub n: usize,
    /// Row-major n x n.
    pub matrix: Vec<f64>,
    pub rank_bound: usize,
    pub norm_bound: f64,
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Compositions of k into d non-negative parts, colexicographic order.
pub fn compositions(k: usize, d: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, d: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if d == 1 {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=k {
            prefix.push(first);
            rec(k - first, d - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, d, &mut Vec::with_capacity(d), &mut out);
    out.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
    out
}

fn check_pair(v: &WaveMatrix, w: &WaveMatrix) -> Result<()> {
    if v.n() != w.n() || v.d() != w.d() {
        return Err(Error::Shape("v and w differ in shape".into()));
    }
    Ok(())
}

/// mu = d |v|_inf |w|_inf.
pub fn taylor_mu(v: &WaveMatrix, w: &WaveMatrix) -> f64 {
    v.d() as f64 * v.inf_norm() * w.inf_norm()
}

/// Q_0, ..., Q_{k_max} with sum_k Q_k = (exp(v_i . w_j)).
pub fn lowrank_terms(v: &WaveMatrix, w: &WaveMatrix, k_max: usize) -> Result<Vec<LowRankTerm>> {
    check_pair(v, w)?;
    if k_max > MAX_ORDER {
        return Err(Error::Capability(format!("k_max = {k_max} exceeds {MAX_ORDER}")));
    }
    let (n, d) = (v.n(), v.d());
    let mu = taylor_mu(v, w);
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mut q = vec![0.0; n * n];
        for kappa in compositions(k, d) {
            let scale: f64 = kappa.iter().map(|&c| factorial(c)).product();
            let col = |m: &WaveMatrix| -> Vec<f64> {
                (0..n)
                    .map(|i| kappa.iter().enumerate().map(|(a, &c)| m.row(i)[a].powi(c as i32)).product())
                    .collect()
            };
            let (cv, cw) = (col(v), col(w));
            for i in 0..n {
                for j in 0..n {
                    q[i * n + j] += cv[i] * cw[j] / scale;
                }
            }
        }
        out.push(LowRankTerm {
            k,
            n,
            matrix: q,
            rank_bound: binomial(k + d - 1, d - 1).round() as usize,
            norm_bound: n as f64 * mu.powi(k as i32) / factorial(k),
        });
    }
    Ok(out)
}

fn singular_values(a: &[f64], n: usize) -> Vec<f64> {
    DMatrix::from_row_slice(n, n, a).singular_values().iter().copied().collect()
}

impl LowRankTerm {
    /// Singular values above 1e-9 sigma_max.
    pub fn numerical_rank(&self) -> usize {
        let s = singular_values(&self.matrix, self.n);
        let top = s.iter().fold(0.0f64, |m, v| m.max(*v));
        if top == 0.0 {
            return 0;
        }
        s.iter().filter(|&&v| v > 1e-9 * top).count()
    }

    pub fn spectral_norm(&self) -> f64 {
        singular_values(&self.matrix, self.n).iter().fold(0.0, |m, v| m.max(*v))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub frobenius_error: f64,
    /// n sum_{k > K} mu^k / k!
    pub tail_bound: f64,
    /// Accumulated f64 rounding in forming the exponentials and the sum.
    pub rounding: f64,
}

impl Reconstruction {
    pub fn holds(&self) -> bool {
        self.frobenius_error <= self.tail_bound + self.rounding
    }
}

pub fn reconstruction_check(v: &WaveMatrix, w: &WaveMatrix, k_max: usize) -> Result<Reconstruction> {
    let terms = lowrank_terms(v, w, k_max)?;
    let n = v.n();
    let mu = taylor_mu(v, w);
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let dot: f64 = v.row(i).iter().zip(w.row(j)).map(|(a, b)| a * b).sum();
            g[i * n + j] = dot.exp();
        }
    }
    let mut sum = vec![0.0; n * n];
    let mut mass = 0.0;
    for t in &terms {
        for (s, q) in sum.iter_mut().zip(&t.matrix) {
            *s += q;
        }
        mass += t.matrix.iter().map(|q| q * q).sum::<f64>().sqrt();
    }
    let frob = |m: &[f64]| m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let err: Vec<f64> = g.iter().zip(&sum).map(|(a, b)| a - b).collect();
    let mut tail = 0.0;
    let mut term = mu.powi(k_max as i32) / factorial(k_max);
    for k in k_max + 1..k_max + 200 {
        term *= mu / k as f64;
        tail += term;
        if term < 1e-30 * tail {
            break;
        }
    }
    let eps = f64::EPSILON;
    Ok(Reconstruction {
        frobenius_error: frob(&err),
        tail_bound: n as f64 * tail,
        rounding: 4.0 * eps * (k_max as f64 + 2.0) * (frob(&g) + mass),
    })
}

fn gram_mp(w: &WaveMatrix, bits: u32) -> Vec<Float> {
    let n = w.n();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut s = Float::with_val(bits, 0);
            for (a, b) in w.row(i).iter().zip(w.row(j)) {
                s += Float::with_val(bits, *a) * *b;
            }
            out.push(s.exp());
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenReport {
    pub l: usize,
    pub lambda_l: f64,
    pub bound: f64,
    pub margin: f64,
    pub lambda0: f64,
    pub lambda0_bound: f64,
    /// Absolute accuracy of the multiprecision eigensolve.
    pub tolerance: f64,
    pub eigenvalues: Vec<f64>,
}

impl EigenReport {
    pub fn holds(&self) -> bool {
        self.margin >= -self.tolerance && self.lambda0 <= self.lambda0_bound
    }
}

/// lambda_L <= (2n / p!) mu^p with L = binom(p+d-1, d), mu = d |w|_inf^2 <= 1/2.
pub fn eigenvalue_bound_check(w: &WaveMatrix, p: usize) -> Result<EigenReport> {
    let (n, d) = (w.n(), w.d());
    let mu = d as f64 * w.inf_norm().powi(2);
    if mu > 0.5 {
        return Err(Error::Precondition(format!("mu = d |w|_inf^2 = {mu} exceeds 1/2")));
    }
    let l = binomial(p + d - 1, d).round() as usize;
    if l >= n {
        return Err(Error::Precondition(format!("L = binom(p+d-1, d) = {l} is not below n = {n}")));
    }
    let bound = 2.0 * n as f64 / factorial(p) * mu.powi(p as i32);
    let lambda0_bound = n as f64 * mu.exp();
    let span = if bound > 0.0 { (lambda0_bound / bound).log2().max(0.0) } else { 0.0 };
    let bits = (96.0 + span).ceil().max(mp::START_BITS as f64) as u32;
    let mut eig = mp::jacobi_eigenvalues(gram_mp(w, bits), n, bits);
    for e in &mut eig {
        *e = e.abs();
    }
    eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(EigenReport {
        l,
        lambda_l: eig[l],
        bound,
        margin: bound - eig[l],
        lambda0: eig[0],
        lambda0_bound,
        tolerance: eig[0] * 2f64.powi(16 - bits as i32),
        eigenvalues: eig,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetBoundReport {
    pub n: usize,
    pub d: usize,
    pub p: usize,
    pub w_inf: f64,
    pub log_det: f64,
    pub log_bound: f64,
    /// log_bound - log_det; non-negative when the bound holds.
    pub margin: f64,
}

pub fn detbound_gamma(d: usize) -> f64 {
    1.0 / (2.0 * (d as f64).sqrt())
}

fn detbound_preconditions(n: usize, d: usize, p: usize) -> Result<()> {
    let l = binomial(p + d - 1, d);
    if 2.0 * l > n as f64 {
        return Err(Error::Precondition(format!("binom(p+d-1, d) = {l} exceeds n/2 = {}", n as f64 / 2.0)));
    }
    if factorial(p) < 4.0 * (n * n) as f64 {
        return Err(Error::Precondition(format!("p! = {} is below 4 n^2 = {}", factorial(p), 4 * n * n)));
    }
    Ok(())
}

/// ln det(exp(w_i . w_j)), multiprecision and checked at two precisions.
pub fn log_det_gram(w: &WaveMatrix) -> Result<f64> {
    let (sign, l) = mp::log_det_validated(w.n(), |bits| gram_mp(w, bits))?;
    if l != f64::NEG_INFINITY && sign <= 0 {
        return Err(Error::Numerical("Gram determinant came out negative".into()));
    }
    Ok(l)
}

/// det(exp(w_i . w_j)) <= (|w|_inf / (2 gamma))^{p n}, gamma = 1/(2 sqrt d).
pub fn detbound_check(w: &WaveMatrix, p: usize) -> Result<DetBoundReport> {
    let (n, d) = (w.n(), w.d());
    detbound_preconditions(n, d, p)?;
    let gamma = detbound_gamma(d);
    let w_inf = w.inf_norm();
    if w_inf > gamma * (1.0 + 1e-15) {
        return Err(Error::Precondition(format!("|w|_inf = {w_inf} exceeds gamma = {gamma}")));
    }
    let log_det = log_det_gram(w)?;
    let log_bound = (p * n) as f64 * (w_inf / (2.0 * gamma)).ln();
    let margin = if log_det == f64::NEG_INFINITY { f64::INFINITY } else { log_bound - log_det };
    Ok(DetBoundReport { n, d, p, w_inf, log_det, log_bound, margin })
}

/// Smallest p with p! >= 4n^2, provided binom(p+d-1, d) <= n/2 there.
pub fn admissible_p(n: usize, d: usize) -> Option<usize> {
    let p = (0..).find(|&p| factorial(p) >= 4.0 * (n * n) as f64)?;
    (2.0 * binomial(p + d - 1, d) <= n as f64).then_some(p)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormCurveRow {
    pub theta: f64,
    pub norm_sq: f64,
    /// (|theta| / (2 gamma))^{p n} where the determinant bound applies.
    pub bound: Option<f64>,
}

pub fn norm_curve(w: &WaveMatrix, theta_grid: &[f64]) -> Result<Vec<NormCurveRow>> {
    if (w.inf_norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("norm curve needs |w|_inf = 1, got {}", w.inf_norm())));
    }
    let gamma = detbound_gamma(w.d());
    let p = admissible_p(w.n(), w.d());
    Ok(theta_grid
        .iter()
        .map(|&theta| NormCurveRow {
            theta,
            norm_sq: slater_norm_sq(&w.scaled(theta)),
            bound: p
                .filter(|_| theta.abs() <= gamma)
                .map(|p| (theta.abs() / (2.0 * gamma)).powi((p * w.n()) as i32)),
        })
        .collect())
}

/// Row-wise random wavevectors rescaled to |w|_inf = 1 exactly.
pub fn random_unit_wave(n: usize, d: usize, seed: u64, stream: u64) -> Result<WaveMatrix> {
    let mut r = rng::stream(seed, stream);
    let mut v = rng::normals(&mut r, n * d);
    let (imax, m) = v.iter().enumerate().fold((0, 0.0f64), |acc, (i, x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc });
    if m == 0.0 {
        return Err(Error::Numerical("degenerate random draw".into()));
    }
    for x in v.iter_mut() {
        *x /= m;
    }
    v[imax] = v[imax].signum();
    WaveMatrix::new(n, d, v)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WInf {
    Value(f64),
    HalfGamma,
}

impl WInf {
    pub fn resolve(self, d: usize) -> f64 {
        match self {
            WInf::Value(v) => v,
            WInf::HalfGamma => detbound_gamma(d) / 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub d: usize,
    pub p: Option<usize>,
    pub w_inf: f64,
    pub log_det: Option<f64>,
    pub log_bound: Option<f64>,
    pub margin: Option<f64>,
    pub error: Option<String>,
}

/// Determinant-bound sweep; cells without an admissible p are reported as
/// infeasible, never dropped.
pub fn bound_sweep(ns: &[usize], ds: &[usize], w_infs: &[WInf], seed: u64) -> Vec<SweepRow> {
    let mut cells = Vec::new();
    for &n in ns {
        for &d in ds {
            for &wi in w_infs {
                cells.push((n, d, wi.resolve(d)));
            }
        }
    }
    use rayon::prelude::*;
    cells
        .par_iter()
        .enumerate()
        .map(|(idx, &(n, d, w_inf))| {
            let mut row = SweepRow { n, d, p: None, w_inf, log_det: None, log_bound: None, margin: None, error: None };
            let Some(p) = admissible_p(n, d) else {
                row.error = Some("infeasible: no p with p! >= 4n^2 and binom(p+d-1,d) <= n/2".into());
                return row;
            };
            row.p = Some(p);
            let result = random_unit_wave(n, d, seed, idx as u64).and_then(|w| detbound_check(&w.scaled(w_inf), p));
            match result {
                Ok(r) => {
                    row.log_det = Some(r.log_det);
                    row.log_bound = Some(r.log_bound);
                    row.margin = Some(r.margin);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compositions_colex() {
        assert_eq!(compositions(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(compositions(3, 3).len(), 10);
        assert_eq!(compositions(0, 4), vec![vec![0, 0, 0, 0]]);
    }

    #[test]
    fn first_terms() {
        let v = WaveMatrix::new(3, 1, vec![0.1, -0.2, 0.3]).unwrap();
        let w = WaveMatrix::new(3, 1, vec![0.5, 0.4, -0.1]).unwrap();
        let t = lowrank_terms(&v, &w, 3).unwrap();
        assert!(t[0].matrix.iter().all(|&x| x == 1.0));
        for i in 0..3 {
            for j in 0..3 {
                let e = (v.row(i)[0] * w.row(j)[0]).powi(2) / 2.0;
                assert!((t[2].matrix[i * 3 + j] - e).abs() < 1e-16);
            }
        }
        assert!(t.iter().all(|q| q.rank_bound == 1));
        assert!(t.iter().all(|q| q.numerical_rank() <= 1));
        assert!(lowrank_terms(&v, &w, 61).is_err());
    }

    #[test]
    fn admissible_p_values() {
        assert_eq!(admissible_p(20, 1), Some(7));
        assert_eq!(admissible_p(30, 1), Some(7));
        assert_eq!(admissible_p(40, 1), Some(8));
        for n in [20, 30, 40] {
            assert_eq!(admissible_p(n, 2), None);
        }
        assert_eq!(admissible_p(4, 1), None);
    }

    #[test]
    fn zero_wave_matrix() {
        let w = WaveMatrix::zeros(20, 1);
        let r = eigenvalue_bound_check(&w, 3).unwrap();
        assert!((r.eigenvalues[0] - 20.0).abs() < 1e-12);
        assert!(r.eigenvalues[1..].iter().all(|e| e.abs() < 1e-12));
        assert!(r.holds());
        let z = WaveMatrix::zeros(40, 1);
        let db = detbound_check(&z, 8).unwrap();
        assert_eq!(db.log_det, f64::NEG_INFINITY);
        assert!(db.margin > 0.0);
    }

    #[test]
    fn preconditions_are_named() {
        let w = WaveMatrix::zeros(20, 1);
        match detbound_check(&w, 5) {
            Err(Error::Precondition(m)) => assert!(m.contains("4 n^2")),
            other => panic!("{other:?}"),
        }
        let big = WaveMatrix::new(3, 1, vec![1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(eigenvalue_bound_check(&big, 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn norm_curve_needs_unit_w() {
        let w = WaveMatrix::new(3, 1, vec![0.5, 0.2, 0.1]).unwrap();
        assert!(norm_curve(&w, &[0.0]).is_err());
        let w = WaveMatrix::new(3, 1, vec![1.0, 0.2, -0.3]).unwrap();
        let rows = norm_curve(&w, &[0.0, 0.5, 3.0]).unwrap();
        assert_eq!(rows[0].norm_sq, 0.0);
        assert!(rows.iter().all(|r| r.norm_sq <= 1.0));
    }
}
