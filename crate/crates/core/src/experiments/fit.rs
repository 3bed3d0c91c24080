use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::hermite::HermiteTarget;
use super::TrainConfig;
use crate::error::{Error, Result};
use crate::planewave::{slater_overlap, slater_overlap_grad_v, SlaterSum, WaveMatrix};
use crate::rng;

/// Something a Slater sum can be fitted to in L^2(N(0, I)).
pub trait FitTarget: Sync {
    fn shape(&self) -> (usize, usize);
    fn norm_sq(&self) -> f64;
    /// <a_w, T> and, if asked, its gradient in the entries of w.
    fn overlap(&self, w: &WaveMatrix, want_grad: bool) -> (Complex64, Option<Vec<Complex64>>);
}

/// Hermite targets are fitted at unit norm.
impl FitTarget for HermiteTarget {
    fn shape(&self) -> (usize, usize) {
        (self.n(), self.d())
    }

    fn norm_sq(&self) -> f64 {
        1.0
    }

    fn overlap(&self, w: &WaveMatrix, want_grad: bool) -> (Complex64, Option<Vec<Complex64>>) {
        let s = 1.0 / self.raw_norm_sq().sqrt();
        let (v, g) = self.wave_overlap(w, want_grad);
        (v * s, g.map(|g| g.into_iter().map(|z| z * s).collect()))
    }
}

impl FitTarget for SlaterSum {
    fn shape(&self) -> (usize, usize) {
        (self.n(), self.d())
    }

    fn norm_sq(&self) -> f64 {
        SlaterSum::norm_sq(self)
    }

    fn overlap(&self, w: &WaveMatrix, want_grad: bool) -> (Complex64, Option<Vec<Complex64>>) {
        let mut v = Complex64::new(0.0, 0.0);
        let mut g = want_grad.then(|| vec![Complex64::new(0.0, 0.0); w.as_slice().len()]);
        for (c, wk) in &self.terms {
            if let Some(g) = g.as_mut() {
                let (val, dg) = slater_overlap_grad_v(w, wk).expect("shapes checked by caller");
                v += c * val;
                for (gi, di) in g.iter_mut().zip(dg) {
                    *gi += c * di;
                }
            } else {
                v += c * slater_overlap(w, wk).expect("shapes checked by caller");
            }
        }
        (v, g)
    }
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub sum: SlaterSum,
    /// sqrt of the objective, clamped at 0.
    pub error: f64,
    /// Best objective per restart.
    pub restart_objectives: Vec<f64>,
}

const RIDGE: f64 = 1e-10;

struct Eval {
    objective: f64,
    coef: Vec<Complex64>,
    grad: Vec<f64>,
}

/// Objective with the coefficients eliminated: for fixed wavevectors the
/// optimal c solves (S + ridge I) c = g, and the wavevector gradient follows
/// from the envelope theorem.
fn evaluate(t: &dyn FitTarget, ws: &[WaveMatrix], want_grad: bool) -> Result<Eval> {
    let m = ws.len();
    let mut s = DMatrix::<f64>::zeros(m, m);
    let mut sgrad: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); m]; m];
    for j in 0..m {
        for k in 0..m {
            if want_grad {
                let (v, g) = slater_overlap_grad_v(&ws[j], &ws[k])?;
                s[(j, k)] = v;
                sgrad[j][k] = g;
            } else if k >= j {
                let v = slater_overlap(&ws[j], &ws[k])?;
                s[(j, k)] = v;
                s[(k, j)] = v;
            }
        }
    }
    let mut gv = Vec::with_capacity(m);
    let mut gg = Vec::with_capacity(m);
    for w in ws {
        let (v, g) = t.overlap(w, want_grad);
        gv.push(v);
        gg.push(g);
    }
    let scale = (0..m).map(|j| s[(j, j)]).fold(0.0, f64::max).max(1e-300);
    let mut reg = s.clone();
    for j in 0..m {
        reg[(j, j)] += RIDGE * scale;
    }
    let re = DVector::from_iterator(m, gv.iter().map(|z| z.re));
    let im = DVector::from_iterator(m, gv.iter().map(|z| z.im));
    let lu = reg.lu();
    let (cr, ci) = match (lu.solve(&re), lu.solve(&im)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Numerical("singular overlap system".into())),
    };
    let coef: Vec<Complex64> = (0..m).map(|j| Complex64::new(cr[j], ci[j])).collect();
    let mut quad = 0.0;
    for j in 0..m {
        for k in 0..m {
            quad += (coef[j].conj() * coef[k]).re * s[(j, k)];
        }
    }
    let lin: f64 = coef.iter().zip(&gv).map(|(c, g)| (c.conj() * g).re).sum();
    let objective = quad - 2.0 * lin + t.norm_sq();
    let mut grad = Vec::new();
    if want_grad {
        let nd = ws[0].as_slice().len();
        grad = vec![0.0; m * nd];
        for j in 0..m {
            let gj = &mut grad[j * nd..(j + 1) * nd];
            for k in 0..m {
                let f = 2.0 * (coef[j].conj() * coef[k]).re;
                for (x, d) in gj.iter_mut().zip(&sgrad[j][k]) {
                    *x += f * d;
                }
            }
            if let Some(dg) = &gg[j] {
                for (x, d) in gj.iter_mut().zip(dg) {
                    *x -= 2.0 * (coef[j].conj() * d).re;
                }
            }
        }
    }
    Ok(Eval { objective, coef, grad })
}

fn to_sum(ws: &[WaveMatrix], coef: &[Complex64]) -> Result<SlaterSum> {
    SlaterSum::new(coef.iter().copied().zip(ws.iter().cloned()).collect())
}

/// Momentum descent on the wavevectors from `init`; returns the best iterate.
fn descend(t: &dyn FitTarget, init: Vec<WaveMatrix>, cfg: &TrainConfig) -> Result<(f64, Vec<WaveMatrix>, Vec<Complex64>)> {
    let mut ws = init;
    let nd = ws[0].as_slice().len();
    let mut vel = vec![0.0; ws.len() * nd];
    let mut best: Option<(f64, Vec<WaveMatrix>, Vec<Complex64>)> = None;
    let mut trace = Vec::new();
    for step in 0..=cfg.steps {
        let last = step == cfg.steps;
        let e = evaluate(t, &ws, !last)?;
        trace.push(e.objective);
        if !e.objective.is_finite() {
            return Err(Error::Training { msg: format!("objective became {} at step {step}", e.objective), trace });
        }
        if best.as_ref().map_or(true, |b| e.objective < b.0) {
            best = Some((e.objective, ws.clone(), e.coef.clone()));
        }
        if last {
            break;
        }
        let norm = e.grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let clip = if norm > 1.0 { 1.0 / norm } else { 1.0 };
        let lr = cfg.rate(step);
        for (k, w) in ws.iter_mut().enumerate() {
            for (a, x) in w.as_mut_slice().iter_mut().enumerate() {
                let v = &mut vel[k * nd + a];
                *v = cfg.momentum * *v - lr * clip * e.grad[k * nd + a];
                *x += *v;
            }
        }
    }
    Ok(best.expect("at least one evaluation"))
}

fn random_waves(n: usize, d: usize, count: usize, scale: f64, seed: u64, stream: u64) -> Result<Vec<WaveMatrix>> {
    let mut r = rng::stream(seed, stream);
    (0..count)
        .map(|_| WaveMatrix::new(n, d, rng::normals(&mut r, n * d).into_iter().map(|v| v * scale).collect()))
        .collect()
}

/// Fits m plane-wave Slater determinants; best of `cfg.restarts` random starts.
pub fn fit_slater_sum(t: &dyn FitTarget, m: usize, cfg: &TrainConfig) -> Result<FitResult> {
    fit_slater_sum_from(t, m, cfg, None)
}

/// As [`fit_slater_sum`], with the first restart seeded by the wavevectors of
/// `warm` and random extra terms. The starting point keeps the objective of
/// `warm`, so the fit never ends worse than it.
pub fn fit_slater_sum_from(t: &dyn FitTarget, m: usize, cfg: &TrainConfig, warm: Option<&SlaterSum>) -> Result<FitResult> {
    cfg.validate()?;
    if m == 0 {
        return Err(Error::InvalidInput("m must be at least 1".into()));
    }
    let (n, d) = t.shape();
    if let Some(w) = warm {
        if w.n() != n || w.d() != d || w.len() > m {
            return Err(Error::Shape("warm start does not fit the requested ansatz".into()));
        }
    }
    let mut best: Option<(f64, Vec<WaveMatrix>, Vec<Complex64>)> = None;
    let mut objectives = Vec::with_capacity(cfg.restarts);
    for r in 0..cfg.restarts {
        let stream = (m as u64) << 32 | r as u64;
        let init = match (r, warm) {
            (0, Some(w)) => {
                let mut ws: Vec<WaveMatrix> = w.terms.iter().map(|(_, x)| x.clone()).collect();
                ws.extend(random_waves(n, d, m - ws.len(), cfg.init_scale, cfg.seed, stream)?);
                ws
            }
            _ => random_waves(n, d, m, cfg.init_scale, cfg.seed, stream)?,
        };
        let res = descend(t, init, cfg)?;
        objectives.push(res.0);
        if best.as_ref().map_or(true, |b| res.0 < b.0) {
            best = Some(res);
        }
    }
    let (obj, ws, coef) = best.expect("restarts >= 1");
    Ok(FitResult { sum: to_sum(&ws, &coef)?, error: obj.max(0.0).sqrt(), restart_objectives: objectives })
}

/// Fits for each m in increasing order, warm-starting from the previous best.
pub fn fit_nested(t: &dyn FitTarget, ms: &[usize], cfg: &TrainConfig) -> Result<Vec<FitResult>> {
    let mut out: Vec<FitResult> = Vec::with_capacity(ms.len());
    for &m in ms {
        let warm = out.last().filter(|p| p.sum.len() <= m).map(|p| &p.sum);
        let mut res = fit_slater_sum_from(t, m, cfg, warm)?;
        if let Some(prev) = out.last() {
            if prev.error < res.error && prev.sum.len() <= m {
                // pad the previous optimum with zero-weight terms
                let mut terms = prev.sum.terms.clone();
                let filler = prev.sum.terms[0].1.clone();
                terms.resize(m, (Complex64::new(0.0, 0.0), filler));
                res = FitResult { sum: SlaterSum::new(terms)?, error: prev.error, restart_objectives: res.restart_objectives };
            }
        }
        out.push(res);
    }
    Ok(out)
}
