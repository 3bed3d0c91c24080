//! Harmonic-oscillator orbitals and windowed fermionic targets.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::compositions;
use crate::error::{Error, Result};
use crate::linalg;
use crate::permutations::factorial;
use crate::planewave::{Configuration, SlaterSum, WaveMatrix};
use crate::quadrature::GaussLegendre;

pub const MAX_ORBITAL: usize = 30;
const WINDOW_PANELS: usize = 24;
const WINDOW_NODES: usize = 16;

fn i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Normalized probabilists' Hermite polynomials h_0..h_kmax at y.
pub fn hermite_orbitals(kmax: usize, y: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(kmax + 1);
    h.push(1.0);
    if kmax >= 1 {
        h.push(y);
    }
    for k in 1..kmax {
        let next = (y * h[k] - (k as f64).sqrt() * h[k - 1]) / ((k + 1) as f64).sqrt();
        h.push(next);
    }
    h
}

/// <h_k, e^{i w .}> = (i w)^k e^{-w^2/2} / sqrt(k!).
pub fn hermite_orbital_overlap(k: usize, w: f64) -> Result<Complex64> {
    if k > MAX_ORBITAL {
        return Err(Error::Capability(format!("orbital index {k} exceeds {MAX_ORBITAL}")));
    }
    Ok(overlap_closed(k, w).0)
}

/// Value and w-derivative of the closed-form overlap.
fn overlap_closed(k: usize, w: f64) -> (Complex64, Complex64) {
    let g = (-0.5 * w * w).exp() / factorial(k).sqrt();
    let val = i_pow(k) * w.powi(k as i32) * g;
    let lower = if k == 0 { Complex64::new(0.0, 0.0) } else { i_pow(k) * (k as f64) * w.powi(k as i32 - 1) * g };
    (val, lower - val * w)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub center: Vec<f64>,
    pub halfwidth: f64,
}

/// Weighted Gauss-Legendre nodes on one window axis, weights include the
/// standard normal density.
#[derive(Clone, Debug)]
struct AxisRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// hermite[q][k] = h_k(nodes[q])
    hermite: Vec<Vec<f64>>,
}

impl AxisRule {
    fn new(lo: f64, hi: f64, kmax: usize) -> Self {
        let gl = GaussLegendre::new(WINDOW_NODES);
        let pts = gl.composite(lo, hi, WINDOW_PANELS);
        let norm = (2.0 * std::f64::consts::PI).sqrt();
        let nodes: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let weights = pts.iter().map(|(y, w)| w * (-0.5 * y * y).exp() / norm).collect();
        let hermite = nodes.iter().map(|&y| hermite_orbitals(kmax, y)).collect();
        AxisRule { nodes, weights, hermite }
    }

    fn overlap(&self, k: usize, w: f64) -> (Complex64, Complex64) {
        let mut v = Complex64::new(0.0, 0.0);
        let mut dv = Complex64::new(0.0, 0.0);
        for q in 0..self.nodes.len() {
            let e = Complex64::from_polar(self.weights[q] * self.hermite[q][k], w * self.nodes[q]);
            v += e;
            dv += e * Complex64::new(0.0, self.nodes[q]);
        }
        (v, dv)
    }

    fn gram(&self, j: usize, k: usize) -> f64 {
        (0..self.nodes.len()).map(|q| self.weights[q] * self.hermite[q][j] * self.hermite[q][k]).sum()
    }
}

/// Slater determinant of Hermite orbitals, optionally multiplied by the
/// indicator of a per-particle box.
#[derive(Clone, Debug)]
pub struct HermiteTarget {
    n: usize,
    d: usize,
    orbitals: Vec<Vec<usize>>,
    window: Option<Window>,
    rules: Option<Vec<AxisRule>>,
    raw_norm_sq: f64,
}

impl HermiteTarget {
    pub fn new(n: usize, d: usize, orbitals: Vec<Vec<usize>>, window: Option<Window>) -> Result<Self> {
        if n == 0 || d == 0 || orbitals.len() != n {
            return Err(Error::InvalidInput(format!("need {n} orbitals in dimension {d}")));
        }
        if orbitals.iter().any(|o| o.len() != d) {
            return Err(Error::Shape("orbital multi-index length differs from d".into()));
        }
        for i in 0..n {
            if orbitals[i + 1..].contains(&orbitals[i]) {
                return Err(Error::InvalidInput(format!("orbital {:?} is occupied twice", orbitals[i])));
            }
        }
        let kmax = orbitals.iter().flatten().copied().max().unwrap_or(0);
        if kmax > MAX_ORBITAL {
            return Err(Error::Capability(format!("orbital index {kmax} exceeds {MAX_ORBITAL}")));
        }
        let rules = match &window {
            None => None,
            Some(w) => {
                if !(w.halfwidth > 0.0 && w.halfwidth.is_finite()) || w.center.len() != d {
                    return Err(Error::InvalidInput("window needs a positive halfwidth and a center in R^d".into()));
                }
                Some(w.center.iter().map(|c| AxisRule::new(c - w.halfwidth, c + w.halfwidth, kmax)).collect())
            }
        };
        let mut t = HermiteTarget { n, d, orbitals, window, rules, raw_norm_sq: 1.0 };
        if let Some(rules) = &t.rules {
            let mut g = vec![0.0; n * n];
            for j in 0..n {
                for l in 0..n {
                    g[j * n + l] = (0..d).map(|a| rules[a].gram(t.orbitals[j][a], t.orbitals[l][a])).product();
                }
            }
            t.raw_norm_sq = linalg::det(&g, n);
            if !(t.raw_norm_sq > 1e-300) {
                return Err(Error::InvalidInput("the windowed target vanishes".into()));
            }
        }
        Ok(t)
    }

    /// The n lowest orbitals ordered by total degree, then colexicographically.
    pub fn ground_state(n: usize, d: usize, window: Option<Window>) -> Result<Self> {
        let mut orbitals = Vec::with_capacity(n);
        let mut deg = 0;
        while orbitals.len() < n {
            for c in compositions(deg, d) {
                if orbitals.len() < n {
                    orbitals.push(c);
                }
            }
            deg += 1;
        }
        Self::new(n, d, orbitals, window)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn orbitals(&self) -> &[Vec<usize>] {
        &self.orbitals
    }

    pub fn window(&self) -> Option<&Window> {
        self.window.as_ref()
    }

    /// Squared norm of the target as returned by [`target_eval`].
    pub fn raw_norm_sq(&self) -> f64 {
        self.raw_norm_sq
    }

    fn inside(&self, x: &Configuration) -> bool {
        match &self.window {
            None => true,
            Some(w) => (0..self.n).all(|i| x.row(i).iter().zip(&w.center).all(|(y, c)| (y - c).abs() <= w.halfwidth)),
        }
    }

    /// The target scaled to unit norm.
    pub fn normalized_eval(&self, x: &Configuration) -> Result<f64> {
        Ok(target_eval(self, x)? / self.raw_norm_sq.sqrt())
    }

    /// <e_w, phi_K> per axis and its derivative in w (conjugated overlaps).
    fn orbital_axis(&self, axis: usize, k: usize, w: f64) -> (Complex64, Complex64) {
        let (v, dv) = match &self.rules {
            None => overlap_closed(k, w),
            Some(r) => r[axis].overlap(k, w),
        };
        (v.conj(), dv.conj())
    }

    /// <a_w, T> for the raw target, with the gradient in the entries of w.
    pub(crate) fn wave_overlap(&self, w: &WaveMatrix, want_grad: bool) -> (Complex64, Option<Vec<Complex64>>) {
        let (n, d) = (self.n, self.d);
        let mut vals = vec![Complex64::new(0.0, 0.0); n * n * d];
        let mut ders = vec![Complex64::new(0.0, 0.0); n * n * d];
        let mut g = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut prod = Complex64::new(1.0, 0.0);
                for a in 0..d {
                    let (v, dv) = self.orbital_axis(a, self.orbitals[j][a], w.row(i)[a]);
                    vals[(i * n + j) * d + a] = v;
                    ders[(i * n + j) * d + a] = dv;
                    prod *= v;
                }
                g[i * n + j] = prod;
            }
        }
        let det = linalg::det_complex(&g, n);
        if !want_grad {
            return (det, None);
        }
        let cof = linalg::cofactors_complex(&g, n);
        let mut grad = vec![Complex64::new(0.0, 0.0); n * d];
        for i in 0..n {
            for j in 0..n {
                for a in 0..d {
                    let mut dg = ders[(i * n + j) * d + a];
                    for b in (0..d).filter(|&b| b != a) {
                        dg *= vals[(i * n + j) * d + b];
                    }
                    grad[i * d + a] += cof[i * n + j] * dg;
                }
            }
        }
        (det, Some(grad))
    }
}

/// (1/sqrt(n!)) det(phi_{K_j}(x_i)), times the window indicator if any.
pub fn target_eval(t: &HermiteTarget, x: &Configuration) -> Result<f64> {
    if x.n() != t.n || x.d() != t.d {
        return Err(Error::Shape("configuration shape differs from the target".into()));
    }
    if !t.inside(x) {
        return Ok(0.0);
    }
    let n = t.n;
    let kmax = t.orbitals.iter().flatten().copied().max().unwrap_or(0);
    let tables: Vec<Vec<Vec<f64>>> =
        (0..n).map(|i| x.row(i).iter().map(|&y| hermite_orbitals(kmax, y)).collect()).collect();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = t.orbitals[j].iter().enumerate().map(|(a, &k)| tables[i][a][k]).product();
        }
    }
    Ok(linalg::det(&m, n) / factorial(n).sqrt())
}

/// <A, T> = sum conj(c) det(G), G_ij = prod_axis conj(<h_{K_j}, e_{w_i}>).
pub fn slater_vs_hermite_inner(a: &SlaterSum, t: &HermiteTarget) -> Result<Complex64> {
    if t.window.is_some() {
        return Err(Error::Unsupported("windowed targets have no closed-form overlap; use Monte Carlo".into()));
    }
    if a.n() != t.n || a.d() != t.d {
        return Err(Error::Shape("Slater sum and target differ in (n, d)".into()));
    }
    Ok(a.terms.iter().map(|(c, w)| c.conj() * t.wave_overlap(w, false).0).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_examples() {
        assert!((hermite_orbital_overlap(0, 1.3).unwrap() - Complex64::new((-0.845f64).exp(), 0.0)).norm() < 1e-15);
        assert_eq!(hermite_orbital_overlap(3, 0.0).unwrap(), Complex64::new(0.0, 0.0));
        let v = hermite_orbital_overlap(1, 1.0).unwrap();
        assert!((v - Complex64::new(0.0, (-0.5f64).exp())).norm() < 1e-15);
        assert!(hermite_orbital_overlap(31, 1.0).is_err());
    }

    #[test]
    fn overlap_derivative() {
        for k in 0..6 {
            for w in [-1.2, 0.0, 0.4, 2.0] {
                let h = 1e-6;
                let fd = (overlap_closed(k, w + h).0 - overlap_closed(k, w - h).0) / (2.0 * h);
                assert!((fd - overlap_closed(k, w).1).norm() < 1e-8, "k={k} w={w}");
            }
        }
    }

    #[test]
    fn two_particle_target() {
        let t = HermiteTarget::new(2, 1, vec![vec![0], vec![1]], None).unwrap();
        let x = Configuration::new(2, 1, vec![0.3, 1.7]).unwrap();
        assert!((target_eval(&t, &x).unwrap() - (1.7 - 0.3) / 2f64.sqrt()).abs() < 1e-15);
        let one = HermiteTarget::ground_state(1, 3, None).unwrap();
        assert_eq!(target_eval(&one, &Configuration::new(1, 3, vec![0.1, 5.0, -2.0]).unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn ground_state_order() {
        let t = HermiteTarget::ground_state(4, 2, None).unwrap();
        assert_eq!(t.orbitals(), &[vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0]]);
        assert!(HermiteTarget::new(2, 1, vec![vec![1], vec![1]], None).is_err());
    }

    #[test]
    fn windowed_target_vanishes_outside() {
        let w = Window { center: vec![0.5], halfwidth: 1.0 };
        let t = HermiteTarget::ground_state(2, 1, Some(w)).unwrap();
        let x = Configuration::new(2, 1, vec![0.0, 1.6]).unwrap();
        assert_eq!(target_eval(&t, &x).unwrap(), 0.0);
        let y = Configuration::new(2, 1, vec![0.0, 1.4]).unwrap();
        assert!(target_eval(&t, &y).unwrap() != 0.0);
        assert!(t.raw_norm_sq() < 1.0);
        let sum = SlaterSum::single(WaveMatrix::zeros(2, 1));
        assert!(matches!(slater_vs_hermite_inner(&sum, &t), Err(Error::Unsupported(_))));
    }

    #[test]
    fn wide_window_matches_closed_form() {
        let w = Window { center: vec![0.0], halfwidth: 12.0 };
        let open = HermiteTarget::ground_state(3, 1, None).unwrap();
        let boxed = HermiteTarget::ground_state(3, 1, Some(w)).unwrap();
        let wm = WaveMatrix::new(3, 1, vec![0.4, -1.0, 1.7]).unwrap();
        let (a, ga) = open.wave_overlap(&wm, true);
        let (b, gb) = boxed.wave_overlap(&wm, true);
        assert!((a - b).norm() < 1e-12);
        for (x, y) in ga.unwrap().iter().zip(gb.unwrap()) {
            assert!((x - y).norm() < 1e-12);
        }
        assert!((boxed.raw_norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wave_overlap_gradient() {
        let t = HermiteTarget::ground_state(3, 2, None).unwrap();
        let w = WaveMatrix::new(3, 2, vec![0.3, -0.2, 1.0, 0.4, -0.7, 0.9]).unwrap();
        let (_, g) = t.wave_overlap(&w, true);
        let g = g.unwrap();
        let h = 1e-6;
        for k in 0..6 {
            let mut p = w.clone();
            p.as_mut_slice()[k] += h;
            let mut m = w.clone();
            m.as_mut_slice()[k] -= h;
            let fd = (t.wave_overlap(&p, false).0 - t.wave_overlap(&m, false).0) / (2.0 * h);
            assert!((fd - g[k]).norm() < 1e-8);
        }
    }

    #[test]
    fn single_particle_inner() {
        let t = HermiteTarget::ground_state(1, 1, None).unwrap();
        let c = Complex64::new(0.5, -2.0);
        let s = SlaterSum::new(vec![(c, WaveMatrix::new(1, 1, vec![0.8]).unwrap())]).unwrap();
        let v = slater_vs_hermite_inner(&s, &t).unwrap();
        assert!((v - c.conj() * (-0.32f64).exp()).norm() < 1e-15);
    }
}
