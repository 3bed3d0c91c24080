use rayon::prelude::*;
use serde::Serialize;

use super::fit::fit_slater_sum;
use super::hermite::{HermiteTarget, Window};
use super::network::estimate_ab_norm;
use super::TrainConfig;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScatterRow {
    pub window_center: Option<Vec<f64>>,
    pub window_halfwidth: Option<f64>,
    pub ab_norm_estimate: f64,
    pub epsilon_achieved: f64,
    pub slater_fit_error: f64,
    /// (1 - eps)^10, clamped to [0, 1].
    pub opacity: f64,
    pub converged: bool,
    pub error: Option<String>,
}

impl ScatterRow {
    fn failed(w: Option<&Window>, e: Error) -> Self {
        ScatterRow {
            window_center: w.map(|w| w.center.clone()),
            window_halfwidth: w.map(|w| w.halfwidth),
            ab_norm_estimate: f64::NAN,
            epsilon_achieved: f64::NAN,
            slater_fit_error: f64::NAN,
            opacity: f64::NAN,
            converged: false,
            error: Some(e.to_string()),
        }
    }
}

/// Windows centred on the diagonal c (1, ..., 1), one per (centre, halfwidth).
pub fn window_grid(d: usize, centers: &[f64], halfwidths: &[f64]) -> Vec<Window> {
    centers
        .iter()
        .flat_map(|&c| halfwidths.iter().map(move |&h| Window { center: vec![c; d], halfwidth: h }))
        .collect()
}

fn row(t: &HermiteTarget, m: usize, cfg: &TrainConfig) -> Result<ScatterRow> {
    let est = estimate_ab_norm(t, m, cfg)?;
    let fit = fit_slater_sum(t, m, cfg)?;
    let eps = est.residual;
    Ok(ScatterRow {
        window_center: t.window().map(|w| w.center.clone()),
        window_halfwidth: t.window().map(|w| w.halfwidth),
        ab_norm_estimate: est.estimate,
        epsilon_achieved: eps,
        slater_fit_error: fit.error,
        opacity: (1.0 - eps).clamp(0.0, 1.0).powi(10),
        converged: est.converged,
        error: None,
    })
}

/// One row per target: norm estimate and m-term Slater fit error. Failures
/// are recorded in the row and the sweep continues.
pub fn theorem_scatter(targets: &[HermiteTarget], m: usize, cfg: &TrainConfig) -> Result<Vec<ScatterRow>> {
    if targets.is_empty() {
        return Err(Error::InvalidInput("scatter needs at least one target".into()));
    }
    cfg.validate()?;
    Ok(targets
        .par_iter()
        .map(|t| row(t, m, cfg).unwrap_or_else(|e| ScatterRow::failed(t.window(), e)))
        .collect())
}
