//! Softplus anti-symmetric networks and the penalized estimator of the
//! smooth anti-symmetric Barron norm.

use serde::{Deserialize, Serialize};

use super::hermite::HermiteTarget;
use super::TrainConfig;
use crate::activation::softplus;
use crate::error::{Error, Result};
use crate::permutations::{all_permutations, check_enumerable, factorial, Permutation};
use crate::planewave::Configuration;
use crate::rng;

/// Pointwise anti-symmetric networks are limited to n <= 8.
pub const MAX_NETWORK_PARTICLES: usize = 8;

/// A function sampled pointwise during training.
pub trait PointTarget: Sync {
    fn shape(&self) -> (usize, usize);
    fn value(&self, x: &Configuration) -> f64;
}

impl PointTarget for HermiteTarget {
    fn shape(&self) -> (usize, usize) {
        (self.n(), self.d())
    }

    fn value(&self, x: &Configuration) -> f64 {
        self.normalized_eval(x).unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroTarget {
    pub n: usize,
    pub d: usize,
}

impl PointTarget for ZeroTarget {
    fn shape(&self) -> (usize, usize) {
        (self.n, self.d)
    }

    fn value(&self, _: &Configuration) -> f64 {
        0.0
    }
}

/// psi(x) = AS[sum_k a_k softplus(w_k . x + b_k)](x).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AntisymNetwork {
    pub n: usize,
    pub d: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub w: Vec<Vec<f64>>,
}

impl AntisymNetwork {
    pub fn new(n: usize, d: usize, a: Vec<f64>, b: Vec<f64>, w: Vec<Vec<f64>>) -> Result<Self> {
        check_enumerable(n, MAX_NETWORK_PARTICLES)?;
        if a.len() != b.len() || a.len() != w.len() || w.iter().any(|r| r.len() != n * d) {
            return Err(Error::Shape("network parameter lengths disagree".into()));
        }
        let net = AntisymNetwork { n, d, a, b, w };
        if !net.params_finite() {
            return Err(Error::InvalidInput("network parameters must be finite".into()));
        }
        Ok(net)
    }

    pub fn width(&self) -> usize {
        self.a.len()
    }

    /// phi~ = sum |a_k| (|w_k|_1 + |b_k|).
    pub fn phi_tilde(&self) -> f64 {
        (0..self.width())
            .map(|k| self.a[k].abs() * (self.w[k].iter().map(|v| v.abs()).sum::<f64>() + self.b[k].abs()))
            .sum()
    }

    fn params_finite(&self) -> bool {
        self.a.iter().chain(&self.b).chain(self.w.iter().flatten()).all(|v| v.is_finite())
    }

    fn check(&self, x: &Configuration) -> Result<()> {
        if x.n() != self.n || x.d() != self.d {
            return Err(Error::Shape(format!("configuration is {}x{}, network is {}x{}", x.n(), x.d(), self.n, self.d)));
        }
        Ok(())
    }
}

impl PointTarget for AntisymNetwork {
    fn shape(&self) -> (usize, usize) {
        (self.n, self.d)
    }

    fn value(&self, x: &Configuration) -> f64 {
        antisym_network_eval(self, x).unwrap_or(f64::NAN)
    }
}

/// Permuted copies of x, one per permutation, in the order of `perms`.
fn permuted(perms: &[Permutation], x: &Configuration) -> Vec<Vec<f64>> {
    let d = x.d();
    perms
        .iter()
        .map(|p| p.mapping.iter().flat_map(|&j| x.row(j).iter().copied()).collect::<Vec<f64>>())
        .map(|v| {
            debug_assert_eq!(v.len(), x.n() * d);
            v
        })
        .collect()
}

/// softplus(z) and its derivative from one exponential.
fn softplus_and_slope(z: f64) -> (f64, f64) {
    let e = (-z.abs()).exp();
    let sg = if z >= 0.0 { 1.0 / (1.0 + e) } else { e / (1.0 + e) };
    (z.max(0.0) + e.ln_1p(), sg)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn eval_with(net: &AntisymNetwork, perms: &[Permutation], x: &Configuration) -> f64 {
    let scale = 1.0 / factorial(net.n).sqrt();
    let px = permuted(perms, x);
    let mut s = 0.0;
    for (p, y) in perms.iter().zip(&px) {
        let f: f64 = (0..net.width()).map(|k| net.a[k] * softplus(dot(&net.w[k], y) + net.b[k])).sum();
        s += f64::from(p.sign) * f;
    }
    s * scale
}

pub fn antisym_network_eval(net: &AntisymNetwork, x: &Configuration) -> Result<f64> {
    net.check(x)?;
    let perms = all_permutations(net.n)?;
    Ok(eval_with(net, &perms, x))
}

/// Gradient of the batch loss (1/B) sum_s (psi(x_s) - y_s)^2.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkGrad {
    pub loss: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub w: Vec<Vec<f64>>,
}

fn grad_with(net: &AntisymNetwork, perms: &[Permutation], batch: &[Configuration], targets: &[f64]) -> NetworkGrad {
    let m = net.width();
    let nd = net.n * net.d;
    let scale = 1.0 / factorial(net.n).sqrt();
    let mut g = NetworkGrad { loss: 0.0, a: vec![0.0; m], b: vec![0.0; m], w: vec![vec![0.0; nd]; m] };
    // per-sample derivatives of psi, before weighting by the residual
    let mut da = vec![0.0; m];
    let mut db = vec![0.0; m];
    let mut dw = vec![vec![0.0; nd]; m];
    let inv_b = 1.0 / batch.len() as f64;
    for (x, &t) in batch.iter().zip(targets) {
        da.fill(0.0);
        db.fill(0.0);
        dw.iter_mut().for_each(|r| r.fill(0.0));
        let mut psi = 0.0;
        for (p, y) in perms.iter().zip(permuted(perms, x)) {
            let s = f64::from(p.sign);
            for k in 0..m {
                let z = dot(&net.w[k], &y) + net.b[k];
                let (sp, slope) = softplus_and_slope(z);
                let sg = s * net.a[k] * slope;
                psi += s * net.a[k] * sp;
                da[k] += s * sp;
                db[k] += sg;
                for (acc, v) in dw[k].iter_mut().zip(&y) {
                    *acc += sg * v;
                }
            }
        }
        let r = psi * scale - t;
        g.loss += r * r * inv_b;
        let f = 2.0 * r * scale * inv_b;
        for k in 0..m {
            g.a[k] += f * da[k];
            g.b[k] += f * db[k];
            for (acc, v) in g.w[k].iter_mut().zip(&dw[k]) {
                *acc += f * v;
            }
        }
    }
    g
}

pub fn antisym_network_grad(net: &AntisymNetwork, batch: &[Configuration], targets: &[f64]) -> Result<NetworkGrad> {
    if batch.is_empty() || batch.len() != targets.len() {
        return Err(Error::Shape("batch and target lengths must agree and be nonzero".into()));
    }
    for x in batch {
        net.check(x)?;
    }
    let perms = all_permutations(net.n)?;
    let g = grad_with(net, &perms, batch, targets);
    let finite = g.loss.is_finite() && g.a.iter().chain(&g.b).chain(g.w.iter().flatten()).all(|v| v.is_finite());
    if !finite {
        return Err(Error::Training { msg: "non-finite gradient".into(), trace: vec![g.loss] });
    }
    Ok(g)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrainLogRow {
    pub step: usize,
    pub loss: f64,
    pub penalty1: f64,
    pub penalty2: f64,
}

#[derive(Clone, Debug)]
pub struct NormEstimate {
    /// phi~ of the returned network.
    pub estimate: f64,
    /// Squared residual of the returned network on fresh samples.
    pub residual: f64,
    pub converged: bool,
    /// Lowest smoothed batch residual; without convergence the network held
    /// at that point is returned.
    pub best_residual: f64,
    pub network: AntisymNetwork,
    pub log: Vec<TrainLogRow>,
}

fn draw_batch(n: usize, d: usize, count: usize, seed: u64, stream: u64) -> Vec<Configuration> {
    let mut r = rng::stream(seed, stream);
    (0..count)
        .map(|_| Configuration::new(n, d, rng::normals(&mut r, n * d)).expect("shape is valid"))
        .collect()
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn init_network(n: usize, d: usize, m: usize, cfg: &TrainConfig, stream: u64) -> AntisymNetwork {
    let mut r = rng::stream(cfg.seed, stream);
    let nd = n * d;
    let w = (0..m).map(|_| rng::normals(&mut r, nd).into_iter().map(|v| v * cfg.init_scale).collect()).collect();
    let b = rng::normals(&mut r, m).into_iter().map(|v| v * cfg.init_scale).collect();
    let a = rng::normals(&mut r, m).into_iter().map(|v| v * cfg.init_scale / m as f64).collect();
    AntisymNetwork { n, d, a, b, w }
}

fn mse(net: &AntisymNetwork, perms: &[Permutation], xs: &[Configuration], ys: &[f64]) -> f64 {
    xs.iter().zip(ys).map(|(x, y)| (eval_with(net, perms, x) - y).powi(2)).sum::<f64>() / xs.len() as f64
}

const EMA_DECAY: f64 = 0.95;

struct Run {
    converged: bool,
    best_residual: f64,
    network: AntisymNetwork,
    log: Vec<TrainLogRow>,
}

fn train_once(t: &dyn PointTarget, m: usize, cfg: &TrainConfig, restart: u64) -> Result<Run> {
    let (n, d) = t.shape();
    let perms = all_permutations(n)?;
    let base = restart << 40;
    let mut net = init_network(n, d, m, cfg, base);
    let nd = n * d;
    let mut va = vec![0.0; m];
    let mut vb = vec![0.0; m];
    let mut vw = vec![vec![0.0; nd]; m];
    let mut log = Vec::with_capacity(cfg.steps);
    let mut streak = 0usize;
    let mut held: Option<AntisymNetwork> = None;
    let mut best_residual = f64::INFINITY;
    let mut best_net = net.clone();
    let mut ema = 0.0;
    for step in 0..cfg.steps {
        let xs = draw_batch(n, d, cfg.batch, cfg.seed, base + 1 + step as u64);
        let ys: Vec<f64> = xs.iter().map(|x| t.value(x)).collect();
        let mut g = grad_with(&net, &perms, &xs, &ys);
        let tau = (g.loss - cfg.epsilon).max(0.0);
        let pen = cfg.lambda * net.phi_tilde();
        let loss = tau + pen;
        log.push(TrainLogRow { step, loss, penalty1: tau, penalty2: pen });
        if !loss.is_finite() {
            return Err(Error::Training {
                msg: format!("loss became {loss} at step {step}"),
                trace: log.iter().map(|r| r.loss).collect(),
            });
        }
        ema = if step == 0 { g.loss } else { EMA_DECAY * ema + (1.0 - EMA_DECAY) * g.loss };
        if ema < best_residual {
            best_residual = ema;
            best_net = net.clone();
        }
        if tau <= cfg.converge_tol {
            streak += 1;
        } else {
            streak = 0;
        }
        if streak >= cfg.converge_window {
            held = Some(net.clone());
        }
        // the residual term is flat below epsilon
        if tau == 0.0 {
            g.a.fill(0.0);
            g.b.fill(0.0);
            g.w.iter_mut().for_each(|r| r.fill(0.0));
        }
        for k in 0..m {
            let l1 = net.w[k].iter().map(|v| v.abs()).sum::<f64>() + net.b[k].abs();
            g.a[k] += cfg.lambda * sign(net.a[k]) * l1;
            g.b[k] += cfg.lambda * net.a[k].abs() * sign(net.b[k]);
            for (gv, wv) in g.w[k].iter_mut().zip(&net.w[k]) {
                *gv += cfg.lambda * net.a[k].abs() * sign(*wv);
            }
        }
        let norm = g.a.iter().chain(&g.b).chain(g.w.iter().flatten()).map(|v| v * v).sum::<f64>().sqrt();
        let clip = if norm > 1.0 { 1.0 / norm } else { 1.0 };
        let lr = cfg.rate(step) * clip;
        let mu = cfg.momentum;
        for k in 0..m {
            va[k] = mu * va[k] - lr * g.a[k];
            net.a[k] += va[k];
            vb[k] = mu * vb[k] - lr * g.b[k];
            net.b[k] += vb[k];
            for j in 0..nd {
                vw[k][j] = mu * vw[k][j] - lr * g.w[k][j];
                net.w[k][j] += vw[k][j];
            }
        }
    }
    let converged = held.is_some();
    Ok(Run { converged, best_residual, network: held.unwrap_or(best_net), log })
}

/// Trains width-m networks on L = tau_eps(residual) + lambda phi~ and returns
/// phi~ of the network held once the residual penalty has stayed below
/// `converge_tol` for `converge_window` consecutive steps. Among restarts the
/// smallest converged estimate wins. Without convergence the network with
/// the lowest smoothed batch residual is returned with `converged = false`.
pub fn estimate_ab_norm(t: &dyn PointTarget, m: usize, cfg: &TrainConfig) -> Result<NormEstimate> {
    cfg.validate()?;
    if m == 0 {
        return Err(Error::InvalidInput("network width must be at least 1".into()));
    }
    let (n, d) = t.shape();
    check_enumerable(n, MAX_NETWORK_PARTICLES)?;
    let mut best: Option<Run> = None;
    for r in 0..cfg.restarts as u64 {
        let run = train_once(t, m, cfg, r)?;
        let better = match &best {
            None => true,
            Some(b) => match (run.converged, b.converged) {
                (true, false) => true,
                (false, true) => false,
                (true, true) => run.network.phi_tilde() < b.network.phi_tilde(),
                (false, false) => run.best_residual < b.best_residual,
            },
        };
        if better {
            best = Some(run);
        }
    }
    let run = best.expect("restarts >= 1");
    let perms = all_permutations(n)?;
    let xs = draw_batch(n, d, cfg.eval_samples, cfg.seed, u64::MAX);
    let ys: Vec<f64> = xs.iter().map(|x| t.value(x)).collect();
    let residual = mse(&run.network, &perms, &xs, &ys);
    if !residual.is_finite() {
        return Err(Error::Training { msg: "final residual is not finite".into(), trace: run.log.iter().map(|r| r.loss).collect() });
    }
    Ok(NormEstimate {
        estimate: run.network.phi_tilde(),
        residual,
        converged: run.converged,
        best_residual: run.best_residual,
        network: run.network,
        log: run.log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::Activation;
    use crate::barron::{antisymmetrize_measure, evaluate_f_rho, BarronAtom, BarronMeasure};

    fn net3() -> AntisymNetwork {
        AntisymNetwork::new(
            3,
            1,
            vec![0.7, -1.2],
            vec![0.1, -0.4],
            vec![vec![0.5, -0.3, 1.1], vec![-0.8, 0.2, 0.4]],
        )
        .unwrap()
    }

    #[test]
    fn zero_weights_give_zero() {
        let net = AntisymNetwork::new(3, 1, vec![1.0], vec![0.3], vec![vec![0.0; 3]]).unwrap();
        let x = Configuration::new(3, 1, vec![0.2, -1.0, 0.7]).unwrap();
        assert!(antisym_network_eval(&net, &x).unwrap().abs() < 1e-14);
    }

    #[test]
    fn transposition_flips_sign() {
        let net = net3();
        let x = Configuration::new(3, 1, vec![0.2, -1.0, 0.7]).unwrap();
        let mut y = x.clone();
        y.swap_particles(0, 2);
        let (u, v) = (antisym_network_eval(&net, &x).unwrap(), antisym_network_eval(&net, &y).unwrap());
        assert!((u + v).abs() < 1e-13);
    }

    #[test]
    fn matches_antisymmetrized_measure() {
        let net = net3();
        let atoms = (0..2).map(|k| BarronAtom { a: net.a[k], b: net.b[k], w: net.w[k].clone() }).collect();
        let rho = antisymmetrize_measure(&BarronMeasure::new(3, 1, atoms).unwrap()).unwrap();
        let x = Configuration::new(3, 1, vec![0.9, -0.1, 0.4]).unwrap();
        let lhs = antisym_network_eval(&net, &x).unwrap();
        let rhs = 6f64.sqrt() * evaluate_f_rho(&rho, &x, Activation::Softplus).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn gradient_in_a_is_linear_correlation() {
        let net = AntisymNetwork::new(3, 1, vec![0.0, 0.0], vec![0.1, -0.4], vec![vec![0.5, -0.3, 1.1], vec![-0.8, 0.2, 0.4]]).unwrap();
        let xs = draw_batch(3, 1, 8, 2, 0);
        let ys: Vec<f64> = (0..8).map(|i| i as f64 * 0.1 - 0.3).collect();
        let g = antisym_network_grad(&net, &xs, &ys).unwrap();
        for k in 0..2 {
            let mut unit = net.clone();
            unit.a = vec![0.0; 2];
            unit.a[k] = 1.0;
            let want: f64 =
                xs.iter().zip(&ys).map(|(x, y)| -2.0 * y * antisym_network_eval(&unit, x).unwrap()).sum::<f64>() / 8.0;
            assert!((g.a[k] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_target_estimate_vanishes() {
        let cfg = TrainConfig { epsilon: 0.0, steps: 600, batch: 32, restarts: 1, eval_samples: 256, ..TrainConfig::default() };
        let e = estimate_ab_norm(&ZeroTarget { n: 2, d: 1 }, 4, &cfg).unwrap();
        assert!(e.converged);
        assert!(e.estimate < 0.05, "estimate {}", e.estimate);
    }
}
