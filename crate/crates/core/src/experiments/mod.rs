//! Fitting Slater sums to harmonic-oscillator targets and estimating their
//! anti-symmetric Barron norms with softplus networks.

mod fit;
mod hermite;
mod network;
mod scatter;

pub use fit::{fit_slater_sum, fit_slater_sum_from, fit_nested, FitResult, FitTarget};
pub use hermite::{hermite_orbital_overlap, hermite_orbitals, slater_vs_hermite_inner, target_eval, HermiteTarget, Window};
pub use network::{
    antisym_network_eval, antisym_network_grad, estimate_ab_norm, AntisymNetwork, NetworkGrad, NormEstimate, PointTarget,
    TrainLogRow, ZeroTarget,
};
pub use scatter::{theorem_scatter, window_grid, ScatterRow};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Optimizer settings shared by the Slater fit and the network training.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Slack in the squared residual below which the first penalty vanishes.
    pub epsilon: f64,
    /// Weight of the phi~ penalty.
    pub lambda: f64,
    pub steps: usize,
    pub batch: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub seed: u64,
    pub restarts: usize,
    /// Standard deviation of the initial wavevectors / network weights.
    pub init_scale: f64,
    /// Consecutive steps with tau_eps <= converge_tol that count as converged.
    pub converge_window: usize,
    pub converge_tol: f64,
    /// Fresh samples used for the final residual of a network.
    pub eval_samples: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epsilon: 0.01,
            lambda: 1e-3,
            steps: 2000,
            batch: 256,
            learning_rate: 0.05,
            momentum: 0.9,
            seed: 0,
            restarts: 2,
            init_scale: 1.0,
            converge_window: 100,
            converge_tol: 1e-3,
            eval_samples: 16384,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |f: &str| Err(Error::InvalidInput(format!("train config: {f}")));
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be a non-negative number");
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be positive");
        }
        if self.steps == 0 || self.batch == 0 || self.restarts == 0 || self.eval_samples < 2 {
            return bad("steps, batch, restarts must be positive and eval_samples at least 2");
        }
        if !(self.learning_rate > 0.0) || !(0.0..1.0).contains(&self.momentum) {
            return bad("learning_rate must be positive and momentum in [0, 1)");
        }
        if !(self.init_scale > 0.0) || !(self.converge_tol >= 0.0) {
            return bad("init_scale must be positive and converge_tol non-negative");
        }
        Ok(())
    }

    /// Cosine-decayed step size.
    pub(crate) fn rate(&self, step: usize) -> f64 {
        let t = step as f64 / self.steps as f64;
        self.learning_rate * 0.5 * (1.0 + (std::f64::consts::PI * t).cos())
    }
}
