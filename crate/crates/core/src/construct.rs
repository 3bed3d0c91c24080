//! The constructive pipeline: canonical measure, high-pass complex measure,
//! Maurey sampling, and a Monte Carlo check against the exact AS f_rho.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::activation::{Activation, HighPassThreshold};
use crate::barron::{
    canonicalize, evaluate_f_rho, infrared_gap_norm, maurey_sample, phi, total_variation, BarronMeasure,
    ComplexMeasureSpec, NormSelector,
};
use crate::error::{Error, Result};
use crate::planewave::{antisymmetrize_pointwise, mc_l2_distance, SlaterSum, WaveMatrix};

/// C = 2 sqrt(d) / pi.
pub fn theorem_constant(d: usize) -> f64 {
    2.0 * (d as f64).sqrt() / PI
}

/// gamma = 1 / (2 sqrt(d)), so that ||mu|| <= phi(rho) C.
pub fn default_gamma(d: usize) -> Result<HighPassThreshold> {
    HighPassThreshold::new(0.5 / (d as f64).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstructReport {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub seed: u64,
    pub gamma: f64,
    pub phi: f64,
    pub total_variation: f64,
    /// phi(rho) C / sqrt(m).
    pub sampling_bound: f64,
    /// sum |a_k| ||A_{w_k,b_k;gamma} - A_{w_k,b_k}||; infinite for n < 3.
    pub truncation_bound: f64,
    pub mc_samples: usize,
    /// Monte Carlo estimate of ||psi_m - AS f_rho||.
    pub error: f64,
    pub std_error: f64,
}

impl ConstructReport {
    pub fn right_side(&self) -> f64 {
        self.sampling_bound + self.truncation_bound
    }

    /// error <= right side + 3 sigma.
    pub fn holds(&self) -> bool {
        self.error <= self.right_side() + 3.0 * self.std_error
    }
}

/// Sum over atoms of the infra-red truncation gap, weighted by |a|.
pub fn truncation_bound(rho: &BarronMeasure, gamma: HighPassThreshold) -> Result<f64> {
    if rho.n < 3 {
        return Ok(f64::INFINITY);
    }
    let mut s = 0.0;
    for at in &rho.atoms {
        let w = WaveMatrix::new(rho.n, rho.d, at.w.clone())?;
        s += at.a.abs() * infrared_gap_norm(&w, at.b, gamma)?;
    }
    Ok(s)
}

/// Runs the pipeline for one m and returns the sampled sum with its report.
pub fn construct(rho: &BarronMeasure, m: usize, seed: u64, mc_samples: usize) -> Result<(SlaterSum, ConstructReport)> {
    if rho.atoms.is_empty() {
        return Err(Error::InvalidInput("measure has no atoms".into()));
    }
    let canon = canonicalize(rho, NormSelector::Inf)?;
    let gamma = default_gamma(rho.d)?;
    let mu = ComplexMeasureSpec::new(canon.clone(), gamma)?;
    let sum = maurey_sample(&mu, m, seed)?;
    let truncation = truncation_bound(&canon, gamma)?;
    let psi = |x: &_| {
        let v = antisymmetrize_pointwise(|y: &_| evaluate_f_rho(&canon, y, Activation::Relu).unwrap_or(f64::NAN), x);
        Complex64::new(v.unwrap_or(f64::NAN), 0.0)
    };
    let psi_m = |x: &_| sum.eval(x).unwrap_or(Complex64::new(f64::NAN, 0.0));
    let est = mc_l2_distance(psi_m, psi, rho.n, rho.d, mc_samples, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let ph = phi(&canon);
    let report = ConstructReport {
        n: rho.n,
        d: rho.d,
        m,
        seed,
        gamma: gamma.gamma(),
        phi: ph,
        total_variation: total_variation(&mu),
        sampling_bound: ph * theorem_constant(rho.d) / (m as f64).sqrt(),
        truncation_bound: truncation,
        mc_samples,
        error: est.estimate,
        std_error: est.std_error,
    };
    Ok((sum, report))
}
