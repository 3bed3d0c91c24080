//! ReLU, softplus and the Fourier high-pass/low-pass split of ReLU.

mod si;

pub use si::sine_integral;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planewave::Configuration;

pub fn relu(y: f64) -> f64 {
    y.max(0.0)
}

/// log(1 + e^y) without overflow.
pub fn softplus(y: f64) -> f64 {
    y.max(0.0) + (-y.abs()).exp().ln_1p()
}

/// The logistic function, the derivative of softplus.
pub fn sigmoid(y: f64) -> f64 {
    if y >= 0.0 {
        1.0 / (1.0 + (-y).exp())
    } else {
        let e = y.exp();
        e / (1.0 + e)
    }
}

/// Frequency cutoff gamma > 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HighPassThreshold(f64);

impl HighPassThreshold {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidInput(format!("gamma must be positive and finite, got {gamma}")));
        }
        Ok(HighPassThreshold(gamma))
    }

    pub fn gamma(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for HighPassThreshold {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<HighPassThreshold> for f64 {
    fn from(g: HighPassThreshold) -> f64 {
        g.0
    }
}

/// The part of ReLU carried by frequencies |theta| >= gamma:
/// |y|/2 - cos(gamma y)/(pi gamma) - y Si(gamma y)/pi.
pub fn highpass_relu(y: f64, g: HighPassThreshold) -> f64 {
    let gm = g.0;
    0.5 * y.abs() - (gm * y).cos() / (PI * gm) - y * sine_integral(gm * y) / PI
}

pub fn lowpass_relu(y: f64, g: HighPassThreshold) -> f64 {
    relu(y) - highpass_relu(y, g)
}

/// Degree-one part of the low-pass remainder, y/2 + 1/(pi gamma).
pub fn lowpass_polynomial(y: f64, g: HighPassThreshold) -> f64 {
    0.5 * y + 1.0 / (PI * g.0)
}

/// Bound on |lowpass - polynomial|: gamma (3 / 2pi) y^2.
pub fn lowpass_remainder_bound(y: f64, g: HighPassThreshold) -> f64 {
    g.0 * 3.0 / (2.0 * PI) * y * y
}

/// lowpass - polynomial, summed as (1/(pi g)) sum_k (-1)^{k-1} (g y)^{2k} / ((2k-1)(2k)!)
/// for |g y| <= 4 where the closed form cancels badly.
pub fn lowpass_remainder(y: f64, g: HighPassThreshold) -> f64 {
    let gm = g.0;
    let s = gm * y;
    if s.abs() > 4.0 {
        return lowpass_relu(y, g) - lowpass_polynomial(y, g);
    }
    let s2 = s * s;
    let mut fact_term = s2 / 2.0;
    let mut sum = fact_term;
    let mut k = 1.0;
    loop {
        k += 1.0;
        fact_term *= -s2 / ((2.0 * k - 1.0) * (2.0 * k));
        let c = fact_term / (2.0 * k - 1.0);
        sum += c;
        if c.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (PI * gm)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "gamma", rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Softplus,
    HighpassRelu(HighPassThreshold),
    LowpassRelu(HighPassThreshold),
}

impl Activation {
    pub fn apply(self, y: f64) -> f64 {
        match self {
            Activation::Relu => relu(y),
            Activation::Softplus => softplus(y),
            Activation::HighpassRelu(g) => highpass_relu(y, g),
            Activation::LowpassRelu(g) => lowpass_relu(y, g),
        }
    }
}

/// sigma(w . x + b) over the flattened configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RidgeSpec {
    pub w: Vec<f64>,
    pub b: f64,
    pub activation: Activation,
}

impl RidgeSpec {
    pub fn new(w: Vec<f64>, b: f64, activation: Activation) -> Result<Self> {
        if !b.is_finite() || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("ridge parameters must be finite".into()));
        }
        Ok(RidgeSpec { w, b, activation })
    }
}

pub fn ridge_eval(spec: &RidgeSpec, x: &Configuration) -> Result<f64> {
    if spec.w.len() != x.as_slice().len() {
        return Err(Error::Shape(format!(
            "ridge has {} weights, configuration has {} coordinates",
            spec.w.len(),
            x.as_slice().len()
        )));
    }
    let z: f64 = spec.w.iter().zip(x.as_slice()).map(|(a, b)| a * b).sum::<f64>() + spec.b;
    Ok(spec.activation.apply(z))
}

#[derive(Clone, Debug, PartialEq)]
pub struct InversionRow {
    pub y: f64,
    pub remainder: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InversionReport {
    pub gamma: f64,
    pub rows: Vec<InversionRow>,
    /// max over the grid of |remainder| - bound; at most 0 when the bound holds.
    pub max_violation: f64,
}

/// Checks |relu - highpass - p_gamma| <= gamma (3/(2pi)) y^2 on a grid.
pub fn fourier_inversion_check(g: HighPassThreshold, y_grid: &[f64]) -> InversionReport {
    let mut max_violation = f64::NEG_INFINITY;
    let rows = y_grid
        .iter()
        .map(|&y| {
            let remainder = lowpass_remainder(y, g);
            let bound = lowpass_remainder_bound(y, g);
            max_violation = max_violation.max(remainder.abs() - bound);
            InversionRow { y, remainder, bound }
        })
        .collect();
    InversionReport { gamma: g.0, rows, max_violation }
}

pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}
