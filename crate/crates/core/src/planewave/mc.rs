//! Monte Carlo estimates of L^2(N(0, I)) quantities.
//!
//! Samples are grouped into fixed chunks; chunk c draws from stream c of the
//! seed, and chunk sums are reduced in chunk order, so the result does not
//! depend on the thread count.

use num_complex::Complex64;
use rayon::prelude::*;

use super::Configuration;
use crate::error::{Error, Result};
use crate::rng;

pub const DEFAULT_SAMPLES: usize = 65536;
const CHUNK: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

fn chunked<A, F>(n: usize, d: usize, n_samples: usize, seed: u64, init: A, per_sample: F) -> Result<Vec<A>>
where
    A: Clone + Send + Sync,
    F: Fn(&mut A, &Configuration) -> Result<()> + Sync,
{
    let chunks = n_samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, c as u64);
            let mut acc = init.clone();
            let count = CHUNK.min(n_samples - c * CHUNK);
            let mut x = Configuration::new(n, d, vec![0.0; n * d])?;
            for _ in 0..count {
                for v in x.as_mut_slice() {
                    *v = rng::normal(&mut r);
                }
                per_sample(&mut acc, &x)?;
            }
            Ok(acc)
        })
        .collect()
}

/// Estimates ||f - g|| in L^2(N(0, I_{nd})) with a first-order standard error.
pub fn mc_l2_distance<F, G>(f: F, g: G, n: usize, d: usize, n_samples: usize, seed: u64) -> Result<McEstimate>
where
    F: Fn(&Configuration) -> Complex64 + Sync,
    G: Fn(&Configuration) -> Complex64 + Sync,
{
    if n_samples < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let parts = chunked(n, d, n_samples, seed, (0.0f64, 0.0f64), |acc, x| {
        let h = (f(x) - g(x)).norm_sqr();
        if !h.is_finite() {
            return Err(Error::NonFinite { x: x.as_slice().to_vec() });
        }
        acc.0 += h;
        acc.1 += h * h;
        Ok(())
    })?;
    let (s1, s2) = parts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let m = n_samples as f64;
    let mean = s1 / m;
    let var = ((s2 / m - mean * mean) * m / (m - 1.0)).max(0.0);
    let se = (var / m).sqrt();
    if mean <= 0.0 {
        return Ok(McEstimate { estimate: 0.0, std_error: se.sqrt() });
    }
    Ok(McEstimate { estimate: mean.sqrt(), std_error: se / (2.0 * mean.sqrt()) })
}

/// Estimates <f, g> = E[conj(f) g]; the error is the standard error of the
/// complex mean, sqrt(E|z - mean|^2 / m).
pub fn mc_inner_product<F, G>(f: F, g: G, n: usize, d: usize, n_samples: usize, seed: u64) -> Result<(Complex64, f64)>
where
    F: Fn(&Configuration) -> Complex64 + Sync,
    G: Fn(&Configuration) -> Complex64 + Sync,
{
    if n_samples < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let zero = Complex64::new(0.0, 0.0);
    let parts = chunked(n, d, n_samples, seed, (zero, 0.0f64), |acc, x| {
        let z = f(x).conj() * g(x);
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite { x: x.as_slice().to_vec() });
        }
        acc.0 += z;
        acc.1 += z.norm_sqr();
        Ok(())
    })?;
    let (s1, s2) = parts.iter().fold((zero, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let m = n_samples as f64;
    let mean = s1 / m;
    let var = ((s2 / m - mean.norm_sqr()) * m / (m - 1.0)).max(0.0);
    Ok((mean, (var / m).sqrt()))
}
