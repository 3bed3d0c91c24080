//! Run configurations. Each command reads an optional JSON file whose keys
//! are the snake_case names of its flags; flags given on the command line
//! override file values, which override the defaults.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use slater_barron::bounds::WInf;
use slater_barron::experiments::TrainConfig;
use slater_barron::{Error, Result};

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display())))
        }
    }
}

fn field(name: &str, msg: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("field `{name}`: {msg}"))
}

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(field(name, "must be at least 1"));
    }
    Ok(())
}

fn finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(field(name, "must be a finite number"));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig1Config {
    pub gammas: Vec<f64>,
    pub y_min: f64,
    pub y_max: f64,
    pub points: usize,
    pub output: Option<PathBuf>,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Fig1Config { gammas: vec![0.25, 0.5, 1.0, 2.0], y_min: -10.0, y_max: 10.0, points: 2001, output: None }
    }
}

impl Fig1Config {
    pub fn validate(&self) -> Result<()> {
        if self.gammas.is_empty() || self.gammas.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(field("gammas", "needs at least one positive value"));
        }
        finite("y_min", self.y_min)?;
        finite("y_max", self.y_max)?;
        if self.y_max <= self.y_min {
            return Err(field("y_max", "must exceed y_min"));
        }
        if self.points < 2 {
            return Err(field("points", "must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig2Config {
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub theta_max: f64,
    pub points: usize,
    pub output: Option<PathBuf>,
}

impl Default for Fig2Config {
    fn default() -> Self {
        Fig2Config { n: 20, d: 3, seed: 0, theta_max: 10.0, points: 401, output: None }
    }
}

impl Fig2Config {
    pub fn validate(&self) -> Result<()> {
        positive("n", self.n)?;
        positive("d", self.d)?;
        if !(self.theta_max.is_finite() && self.theta_max > 0.0) {
            return Err(field("theta_max", "must be positive"));
        }
        if self.points < 2 {
            return Err(field("points", "must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstructConfig {
    pub measure: Option<PathBuf>,
    pub m: usize,
    pub seed: u64,
    pub mc_samples: usize,
    /// Where the sampled Slater sum is written as JSON.
    pub output: Option<PathBuf>,
    /// Where the report is written; stdout otherwise.
    pub report: Option<PathBuf>,
}

impl Default for ConstructConfig {
    fn default() -> Self {
        ConstructConfig { measure: None, m: 64, seed: 0, mc_samples: 1 << 16, output: None, report: None }
    }
}

impl ConstructConfig {
    pub fn validate(&self) -> Result<()> {
        if self.measure.is_none() {
            return Err(field("measure", "a measure file is required"));
        }
        positive("m", self.m)?;
        if self.mc_samples < 2 {
            return Err(field("mc_samples", "must be at least 2"));
        }
        Ok(())
    }
}

/// A sweep value for |w|_inf: a number or "half_gamma".
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum WInfSpec {
    Value(f64),
    Named(String),
}

impl WInfSpec {
    pub fn resolve(&self) -> Result<WInf> {
        match self {
            WInfSpec::Value(v) if v.is_finite() && *v > 0.0 => Ok(WInf::Value(*v)),
            WInfSpec::Named(s) if s == "half_gamma" => Ok(WInf::HalfGamma),
            other => Err(field("w_infs", format!("{other:?} is neither a positive number nor \"half_gamma\""))),
        }
    }
}

impl std::str::FromStr for WInfSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(s.parse::<f64>().map(WInfSpec::Value).unwrap_or_else(|_| WInfSpec::Named(s.to_string())))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    pub ns: Vec<usize>,
    pub ds: Vec<usize>,
    pub w_infs: Vec<WInfSpec>,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            ns: vec![20, 30, 40],
            ds: vec![1, 2],
            w_infs: vec![
                WInfSpec::Value(0.05),
                WInfSpec::Value(0.1),
                WInfSpec::Value(0.2),
                WInfSpec::Named("half_gamma".into()),
            ],
            seed: 0,
            output: None,
        }
    }
}

impl BoundsConfig {
    pub fn validate(&self) -> Result<Vec<WInf>> {
        if self.ns.is_empty() || self.ns.contains(&0) {
            return Err(field("ns", "needs positive particle counts"));
        }
        if self.ds.is_empty() || self.ds.contains(&0) {
            return Err(field("ds", "needs positive dimensions"));
        }
        if self.w_infs.is_empty() {
            return Err(field("w_infs", "needs at least one value"));
        }
        self.w_infs.iter().map(WInfSpec::resolve).collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatterConfig {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub centers: Vec<f64>,
    pub halfwidths: Vec<f64>,
    pub train: TrainConfig,
    pub output: Option<PathBuf>,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        ScatterConfig {
            n: 4,
            d: 1,
            m: 64,
            centers: vec![-0.5, 0.0, 0.5],
            halfwidths: vec![1.5, 2.5, 3.5],
            train: TrainConfig { steps: 2000, restarts: 1, eval_samples: 8192, ..TrainConfig::default() },
            output: None,
        }
    }
}

impl ScatterConfig {
    pub fn validate(&self) -> Result<()> {
        positive("n", self.n)?;
        positive("d", self.d)?;
        positive("m", self.m)?;
        if self.centers.is_empty() || self.centers.iter().any(|c| !c.is_finite()) {
            return Err(field("centers", "needs at least one finite value"));
        }
        if self.halfwidths.is_empty() || self.halfwidths.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(field("halfwidths", "needs at least one positive value"));
        }
        self.train.validate()
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum NormTarget {
    Hermite,
    Zero,
}

impl std::str::FromStr for NormTarget {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "hermite" => Ok(NormTarget::Hermite),
            "zero" => Ok(NormTarget::Zero),
            _ => Err(format!("unknown target {s:?}, expected hermite or zero")),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormConfig {
    pub target: NormTarget,
    pub n: usize,
    pub d: usize,
    /// Occupied multi-indices; the ground state when absent.
    pub orbitals: Option<Vec<Vec<usize>>>,
    pub window_center: Option<Vec<f64>>,
    pub window_halfwidth: Option<f64>,
    pub m: usize,
    pub train: TrainConfig,
    pub output: Option<PathBuf>,
    /// Training log `step,loss,penalty1,penalty2`.
    pub log: Option<PathBuf>,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig {
            target: NormTarget::Hermite,
            n: 2,
            d: 1,
            orbitals: None,
            window_center: None,
            window_halfwidth: None,
            m: 16,
            train: TrainConfig::default(),
            output: None,
            log: None,
        }
    }
}

impl NormConfig {
    pub fn validate(&self) -> Result<()> {
        positive("n", self.n)?;
        positive("d", self.d)?;
        positive("m", self.m)?;
        if self.window_center.is_some() != self.window_halfwidth.is_some() {
            return Err(field("window_center", "window_center and window_halfwidth go together"));
        }
        if let Some(c) = &self.window_center {
            if c.len() != self.d {
                return Err(field("window_center", format!("needs {} coordinates", self.d)));
            }
        }
        if let Some(h) = self.window_halfwidth {
            if !(h.is_finite() && h > 0.0) {
                return Err(field("window_halfwidth", "must be positive"));
            }
        }
        self.train.validate()
    }
}
