//! Discrete Barron measures and their plane-wave expansion.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::activation::{highpass_relu, relu, Activation, HighPassThreshold};
use crate::error::{Error, Result};
use crate::mp;
use crate::permutations::{check_enumerable, factorial, heap_visit};
use crate::planewave::{antisymmetrize_pointwise, slater_norm_sq, slater_overlap, Configuration, SlaterSum, WaveMatrix};
use crate::quadrature::GaussLegendre;
use crate::rng;

/// Largest n accepted by [`antisymmetrize_measure`].
pub const MAX_MEASURE_AS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarronAtom {
    pub a: f64,
    pub b: f64,
    pub w: Vec<f64>,
}

impl BarronAtom {
    pub fn ridge(&self, x: &[f64]) -> f64 {
        self.w.iter().zip(x).map(|(u, v)| u * v).sum::<f64>() + self.b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormSelector {
    L1,
    L2,
    Inf,
}

impl NormSelector {
    pub fn norm(self, w: &[f64]) -> f64 {
        match self {
            NormSelector::L1 => w.iter().map(|v| v.abs()).sum(),
            NormSelector::L2 => w.iter().map(|v| v * v).sum::<f64>().sqrt(),
            NormSelector::Inf => w.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}

impl std::str::FromStr for NormSelector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "l1" => Ok(NormSelector::L1),
            "2" | "l2" => Ok(NormSelector::L2),
            "inf" | "linf" => Ok(NormSelector::Inf),
            _ => Err(Error::InvalidInput(format!("unknown norm selector {s:?}"))),
        }
    }
}

/// A finite list of atoms (a, b, w) with w in R^{n d}.
///
/// `canonical` records the norm in which every |w| equals one, if any.
#[derive(Clone, Debug, PartialEq)]
pub struct BarronMeasure {
    pub n: usize,
    pub d: usize,
    pub atoms: Vec<BarronAtom>,
    pub canonical: Option<NormSelector>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureDoc {
    n: usize,
    d: usize,
    atoms: Vec<BarronAtom>,
}

impl BarronMeasure {
    pub fn new(n: usize, d: usize, atoms: Vec<BarronAtom>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidInput("n and d must be at least 1".into()));
        }
        for (i, at) in atoms.iter().enumerate() {
            if at.w.len() != n * d {
                return Err(Error::Shape(format!("atom {i}: w has {} entries, expected {}", at.w.len(), n * d)));
            }
            if !at.a.is_finite() || !at.b.is_finite() || at.w.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("atom {i} has a non-finite entry")));
            }
        }
        Ok(BarronMeasure { n, d, atoms, canonical: None })
    }

    /// Marks the measure canonical in `p` after checking every atom.
    pub fn assume_canonical(mut self, p: NormSelector) -> Result<Self> {
        if let Some(i) = self.atoms.iter().position(|at| (p.norm(&at.w) - 1.0).abs() > 1e-12) {
            return Err(Error::InvalidInput(format!("atom {i} is not normalised")));
        }
        self.canonical = Some(p);
        Ok(self)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: MeasureDoc = serde_json::from_str(s)?;
        Self::new(doc.n, doc.d, doc.atoms)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let doc = MeasureDoc { n: self.n, d: self.d, atoms: self.atoms.clone() };
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }

    fn check_config(&self, x: &Configuration) -> Result<()> {
        if x.n() != self.n || x.d() != self.d {
            return Err(Error::Shape(format!(
                "configuration {}x{} for a measure on {}x{}",
                x.n(),
                x.d(),
                self.n,
                self.d
            )));
        }
        Ok(())
    }
}

/// phi(rho) = sum |a| |w|_1.
pub fn phi(rho: &BarronMeasure) -> f64 {
    rho.atoms.iter().map(|at| at.a.abs() * NormSelector::L1.norm(&at.w)).sum()
}

/// phi~(rho) = sum |a| (|w|_1 + |b|).
pub fn phi_tilde(rho: &BarronMeasure) -> f64 {
    rho.atoms.iter().map(|at| at.a.abs() * (NormSelector::L1.norm(&at.w) + at.b.abs())).sum()
}

/// f_rho(x) = sum a sigma(w . x + b).
pub fn evaluate_f_rho(rho: &BarronMeasure, x: &Configuration, act: Activation) -> Result<f64> {
    rho.check_config(x)?;
    Ok(rho.atoms.iter().map(|at| at.a * act.apply(at.ridge(x.as_slice()))).sum())
}

/// Rescales each atom to |w|_p = 1 using positive homogeneity of ReLU.
pub fn canonicalize(rho: &BarronMeasure, p: NormSelector) -> Result<BarronMeasure> {
    let bad: Vec<usize> = rho
        .atoms
        .iter()
        .enumerate()
        .filter(|(_, at)| p.norm(&at.w) == 0.0)
        .map(|(i, _)| i)
        .collect();
    if !bad.is_empty() {
        return Err(Error::DegenerateAtoms(bad));
    }
    let atoms = rho
        .atoms
        .iter()
        .map(|at| {
            let s = p.norm(&at.w);
            let mut w: Vec<f64> = at.w.iter().map(|v| v / s).collect();
            // the largest entry must be exactly +-1 for the infinity norm
            if p == NormSelector::Inf {
                for (v, orig) in w.iter_mut().zip(&at.w) {
                    if orig.abs() == s {
                        *v = orig.signum();
                    }
                }
            }
            BarronAtom { a: at.a * s, b: at.b / s, w }
        })
        .collect();
    Ok(BarronMeasure { n: rho.n, d: rho.d, atoms, canonical: Some(p) })
}

/// rho' = (1/n!) sum_pi rho_pi with atoms ((-1)^pi a / n!, b, pi(w)), so that
/// AS f_rho = sqrt(n!) f_{rho'}.
pub fn antisymmetrize_measure(rho: &BarronMeasure) -> Result<BarronMeasure> {
    check_enumerable(rho.n, MAX_MEASURE_AS)?;
    let (n, d) = (rho.n, rho.d);
    let nf = factorial(n);
    let mut atoms = Vec::with_capacity(rho.atoms.len() * nf as usize);
    let mut perm: Vec<usize> = (0..n).collect();
    heap_visit(&mut perm, |p, sign| {
        for at in &rho.atoms {
            let mut w = vec![0.0; n * d];
            for (j, &pj) in p.iter().enumerate() {
                w[j * d..(j + 1) * d].copy_from_slice(&at.w[pj * d..(pj + 1) * d]);
            }
            atoms.push(BarronAtom { a: f64::from(sign) * at.a / nf, b: at.b, w });
        }
    });
    Ok(BarronMeasure { n, d, atoms, canonical: rho.canonical })
}

/// A_{w,b;gamma}: the anti-symmetrized high-pass ReLU ridge.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedAntiRidge {
    pub w: Vec<f64>,
    pub b: f64,
    pub gamma: HighPassThreshold,
}

pub fn truncated_antiridge_eval(t: &TruncatedAntiRidge, x: &Configuration) -> Result<f64> {
    if t.w.len() != x.as_slice().len() {
        return Err(Error::Shape("ridge weight length differs from n*d".into()));
    }
    antisymmetrize_pointwise(
        |y: &Configuration| {
            let z: f64 = t.w.iter().zip(y.as_slice()).map(|(a, b)| a * b).sum::<f64>() + t.b;
            highpass_relu(z, t.gamma)
        },
        x,
    )
}

/// AS of the plain ReLU ridge, A_{w,b}.
pub fn antiridge_eval(w: &[f64], b: f64, x: &Configuration) -> Result<f64> {
    if w.len() != x.as_slice().len() {
        return Err(Error::Shape("ridge weight length differs from n*d".into()));
    }
    antisymmetrize_pointwise(
        |y: &Configuration| relu(w.iter().zip(y.as_slice()).map(|(a, b)| a * b).sum::<f64>() + b),
        x,
    )
}

/// The complex measure mu over (theta, atom): |mu| has density
/// |a| / (2 pi theta^2) on |theta| >= gamma and phase -sign(a) e^{i b theta}.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMeasureSpec {
    base: BarronMeasure,
    gamma: HighPassThreshold,
}

impl ComplexMeasureSpec {
    pub fn new(base: BarronMeasure, gamma: HighPassThreshold) -> Result<Self> {
        if base.canonical.is_none() {
            return Err(Error::InvalidInput("complex measure needs a canonical base".into()));
        }
        Ok(ComplexMeasureSpec { base, gamma })
    }

    pub fn base(&self) -> &BarronMeasure {
        &self.base
    }

    pub fn gamma(&self) -> HighPassThreshold {
        self.gamma
    }
}

/// Exact ||mu|| = sum |a| / (pi gamma). This is phi(rho)/(pi gamma) when the
/// base is l1-canonical and at most that otherwise.
pub fn total_variation(mu: &ComplexMeasureSpec) -> f64 {
    let mass: f64 = mu.base.atoms.iter().map(|at| at.a.abs()).sum();
    mass / (PI * mu.gamma.gamma())
}

/// m i.i.d. draws from |mu| / ||mu||, each weighted ||mu|| / m times its phase.
///
/// Draw k uses stream k of `seed`: one uniform picks the atom in proportion
/// to |a|, one u in (0, 1] gives |theta| = gamma / u, one bit gives the sign.
pub fn maurey_sample(mu: &ComplexMeasureSpec, m: usize, seed: u64) -> Result<SlaterSum> {
    if m == 0 {
        return Err(Error::InvalidInput("m must be at least 1".into()));
    }
    let base = &mu.base;
    let mut cum = Vec::with_capacity(base.atoms.len());
    let mut total = 0.0;
    for at in &base.atoms {
        total += at.a.abs();
        cum.push(total);
    }
    if !(total > 0.0) || phi(base) == 0.0 {
        return Err(Error::DegenerateMeasure);
    }
    let tv = total_variation(mu);
    let g = mu.gamma.gamma();
    let mut terms = Vec::with_capacity(m);
    for k in 0..m {
        let mut r = rng::stream(seed, k as u64);
        let target = rng::uniform(&mut r) * total;
        let idx = cum.partition_point(|&c| c <= target).min(cum.len() - 1);
        let at = &base.atoms[idx];
        let u = rng::uniform_open0(&mut r);
        let sign = if rng::uniform(&mut r) < 0.5 { -1.0 } else { 1.0 };
        let theta = sign * g / u;
        let phase = Complex64::from_polar(1.0, at.b * theta) * -at.a.signum();
        let w = WaveMatrix::new(base.n, base.d, at.w.iter().map(|v| v * theta).collect())?;
        terms.push((phase * (tv / m as f64), w));
    }
    SlaterSum::new(terms)
}

/// psi_gamma(x) = sum_atoms a A_{w,b;gamma}(x) for a canonical measure.
pub fn psi_gamma_eval(rho: &BarronMeasure, gamma: HighPassThreshold, x: &Configuration) -> Result<f64> {
    if rho.canonical.is_none() {
        return Err(Error::InvalidInput("psi_gamma needs a canonical measure".into()));
    }
    rho.check_config(x)?;
    let mut s = 0.0;
    for at in &rho.atoms {
        let t = TruncatedAntiRidge { w: at.w.clone(), b: at.b, gamma };
        s += at.a * truncated_antiridge_eval(&t, x)?;
    }
    Ok(s)
}

fn check_gap_inputs(w: &WaveMatrix) -> Result<()> {
    if w.n() < 3 {
        return Err(Error::InvalidInput(
            "the infra-red integral converges only for n >= 3".into(),
        ));
    }
    Ok(())
}

const GAP_NODES: usize = 24;
const GAP_PANELS: usize = 2;

/// (1/2pi) int_{|theta| < gamma} ||a_{theta w}|| / theta^2 dtheta.
pub fn infrared_gap_bound(w: &WaveMatrix, gamma: HighPassThreshold) -> Result<f64> {
    check_gap_inputs(w)?;
    let gl = GaussLegendre::new(GAP_NODES);
    let s = gl.integrate(0.0, gamma.gamma(), GAP_PANELS, |t| slater_norm_sq(&w.scaled(t)).sqrt() / (t * t));
    Ok(s / PI)
}

fn planewave_slater_mp(w: &WaveMatrix, x: &Configuration, theta: f64) -> Complex64 {
    let (n, d) = (w.n(), w.d());
    let nf = factorial(n).sqrt();
    let mut bits = mp::START_BITS;
    loop {
        let mut m = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut ph = Float::with_val(bits, 0);
                for a in 0..d {
                    ph += Float::with_val(bits, w.row(j)[a]) * x.row(i)[a];
                }
                ph *= theta;
                m.push(Complex::with_val(bits, (Float::new(bits), ph)).exp());
            }
        }
        let det = mp::det_complex(m, n, bits);
        let mag = Float::with_val(bits, det.abs_ref());
        let lost = if mag.is_zero() { f64::INFINITY } else { -mag.log2().to_f64() };
        if lost + 80.0 < bits as f64 || bits >= mp::MAX_BITS {
            let (re, im) = det.into_real_imag();
            return Complex64::new(re.to_f64(), im.to_f64()) / nf;
        }
        bits *= 2;
    }
}

/// A_{w,b;gamma}(x) - A_{w,b}(x) = (1/pi) int_0^gamma Re(e^{i b theta} a_{theta w}(x)) / theta^2 dtheta,
/// with the plane waves evaluated in multiprecision.
pub fn infrared_gap_eval(w: &WaveMatrix, b: f64, gamma: HighPassThreshold, x: &Configuration) -> Result<f64> {
    check_gap_inputs(w)?;
    if x.n() != w.n() || x.d() != w.d() {
        return Err(Error::Shape("configuration shape differs from w".into()));
    }
    let gl = GaussLegendre::new(GAP_NODES);
    let s = gl.integrate(0.0, gamma.gamma(), GAP_PANELS, |t| {
        (Complex64::from_polar(1.0, b * t) * planewave_slater_mp(w, x, t)).re / (t * t)
    });
    Ok(s / PI)
}

/// ||A_{w,b;gamma} - A_{w,b}|| from the overlap rule:
/// (1/pi^2) int int <R_s, R_t> / (s t)^2 with
/// <R_s, R_t> = (cos(b(t-s)) D(s,t) + cos(b(s+t)) D(s,-t)) / 2, D(s,t) = <a_{sw}, a_{tw}>.
pub fn infrared_gap_norm(w: &WaveMatrix, b: f64, gamma: HighPassThreshold) -> Result<f64> {
    check_gap_inputs(w)?;
    let nodes = GaussLegendre::new(GAP_NODES).composite(0.0, gamma.gamma(), GAP_PANELS);
    let scaled: Vec<WaveMatrix> = nodes.iter().map(|(t, _)| w.scaled(*t)).collect();
    let flipped: Vec<WaveMatrix> = nodes.iter().map(|(t, _)| w.scaled(-*t)).collect();
    let mut total = 0.0;
    for (i, (s, ws)) in nodes.iter().enumerate() {
        for (j, (t, wt)) in nodes.iter().enumerate().skip(i) {
            let same = slater_overlap(&scaled[i], &scaled[j])?;
            let cross = slater_overlap(&scaled[i], &flipped[j])?;
            let inner = 0.5 * ((b * (t - s)).cos() * same + (b * (s + t)).cos() * cross);
            let mult = if i == j { 1.0 } else { 2.0 };
            total += mult * ws * wt * inner / (s * s * t * t);
        }
    }
    Ok((total.max(0.0)).sqrt() / PI)
}
