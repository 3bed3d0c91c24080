//! The ten acceptance criteria as runnable checks.
//!
//! Each check returns an [`Outcome`] carrying its measured quantities; a
//! check passes only if its inequality holds and it finishes within budget.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use slater_barron::activation::{fourier_inversion_check, highpass_relu, uniform_grid, HighPassThreshold};
use slater_barron::barron::{
    canonicalize, infrared_gap_bound, infrared_gap_norm, maurey_sample, psi_gamma_eval, total_variation,
    BarronMeasure, ComplexMeasureSpec, NormSelector,
};
use slater_barron::bounds::{bound_sweep, lowrank_terms, random_unit_wave, reconstruction_check, WInf};
use slater_barron::construct::{construct, default_gamma, theorem_constant};
use slater_barron::experiments::{
    antisym_network_grad, theorem_scatter, window_grid, AntisymNetwork, HermiteTarget, TrainConfig,
};
use slater_barron::planewave::{mc_l2_distance, slater_norm_sq, slater_overlap, Configuration, WaveMatrix};
use slater_barron::{rng, Result};
use slater_barron_oracles as oracle;

pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub budget: Duration,
    run: fn() -> Result<(bool, String)>,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} [{:>2}] {}: {} ({:.1}s of {}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

impl Criterion {
    pub fn run(&self) -> Outcome {
        let t0 = Instant::now();
        let res = (self.run)();
        let elapsed = t0.elapsed();
        let (ok, mut detail) = res.unwrap_or_else(|e| (false, format!("error: {e}")));
        let in_time = elapsed <= self.budget;
        if !in_time {
            detail.push_str("; over budget");
        }
        Outcome { id: self.id, title: self.title, passed: ok && in_time, detail, elapsed, budget: self.budget }
    }
}

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

pub const CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, title: "overlap and norm vs Gauss-Hermite", budget: secs(10), run: oracle_equivalence },
    Criterion { id: 2, title: "Hadamard bound on the norm", budget: secs(5), run: hadamard },
    Criterion { id: 3, title: "Fourier inversion and high-pass closed form", budget: secs(30), run: fourier_inversion },
    Criterion { id: 4, title: "low-rank decomposition", budget: secs(60), run: low_rank },
    Criterion { id: 5, title: "determinant bound sweep", budget: secs(60), run: determinant_bound },
    Criterion { id: 6, title: "Maurey sampling rate", budget: secs(300), run: maurey_rate },
    Criterion { id: 7, title: "end-to-end construction", budget: secs(600), run: end_to_end },
    Criterion { id: 8, title: "infra-red gap decay", budget: secs(300), run: infrared_decay },
    Criterion { id: 9, title: "network gradient check", budget: secs(30), run: gradient_check },
    Criterion { id: 10, title: "experiments scatter", budget: secs(1200), run: scatter },
];

pub fn criterion(id: u8) -> Option<&'static Criterion> {
    CRITERIA.iter().find(|c| c.id == id)
}

/// Path of a measure file shipped with the core crate.
pub fn shipped_measure(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn random_wave(n: usize, d: usize, scale: f64, seed: u64, stream: u64) -> Result<WaveMatrix> {
    let mut r = rng::stream(seed, stream);
    WaveMatrix::new(n, d, rng::normals(&mut r, n * d).into_iter().map(|v| v * scale).collect())
}

fn oracle_equivalence() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut stream = 0;
    for n in 1..=2 {
        for d in 1..=2 {
            for _ in 0..50 {
                let v = random_wave(n, d, 1.0, 1, stream)?;
                let w = random_wave(n, d, 1.0, 1, stream + 1)?;
                stream += 2;
                let nodes = 100;
                let norm = oracle::slater_inner_gh_factored(w.as_slice(), w.as_slice(), n, d, nodes);
                let cross = oracle::slater_inner_gh_factored(v.as_slice(), w.as_slice(), n, d, nodes);
                worst = worst.max((slater_norm_sq(&w) - norm.re).abs()).max(norm.im.abs());
                let ov = Complex64::new(slater_overlap(&v, &w)?, 0.0);
                worst = worst.max((ov - cross).norm());
            }
        }
    }
    Ok((worst <= 1e-6, format!("max deviation {worst:.2e} over 200 sets")))
}

fn hadamard() -> Result<(bool, String)> {
    let mut worst = f64::NEG_INFINITY;
    let mut stream = 0;
    for n in 1..=6 {
        for d in 1..=3 {
            for _ in 0..1000 {
                let mut r = rng::stream(2, stream);
                let scale = 2f64.powf(2.5 * rng::uniform(&mut r) - 1.0);
                let w = random_wave(n, d, scale, 3, stream)?;
                stream += 1;
                worst = worst.max(slater_norm_sq(&w));
            }
        }
    }
    Ok((worst <= 1.0 + 1e-10, format!("max norm_sq {worst:.12} over 18000 draws")))
}

fn fourier_inversion() -> Result<(bool, String)> {
    let grid = uniform_grid(-10.0, 10.0, 4001);
    let gammas = [0.25, 0.5, 1.0, 2.0];
    let mut violation = f64::NEG_INFINITY;
    for &g in &gammas {
        let rep = fourier_inversion_check(HighPassThreshold::new(g)?, &grid);
        violation = violation.max(rep.max_violation);
    }
    let mut spot = 0.0f64;
    for i in 0..30 {
        let g = gammas[i % 4];
        let y = -9.7 + 0.67 * i as f64;
        let closed = highpass_relu(y, HighPassThreshold::new(g)?);
        spot = spot.max((closed - oracle::highpass_by_fourier(y, g)).abs());
    }
    let ok = violation <= 0.0 && spot <= 1e-6;
    Ok((ok, format!("max violation {violation:.3e}, spot deviation {spot:.2e}")))
}

fn low_rank() -> Result<(bool, String)> {
    let k_max = 25;
    let mut failures = 0;
    let mut worst_ratio = 0.0f64;
    for case in 0..100u64 {
        let mut r = rng::stream(4, case);
        let n = 1 + (rng::uniform(&mut r) * 12.0) as usize;
        let d = 1 + (rng::uniform(&mut r) * 3.0) as usize;
        let mut v = random_wave(n, d, 1.0, 5, 2 * case)?;
        let mut w = random_wave(n, d, 1.0, 5, 2 * case + 1)?;
        let target_mu = rng::uniform(&mut r);
        let (sv, sw) = (v.inf_norm(), w.inf_norm());
        let s = (target_mu / (d as f64 * sv * sw)).sqrt();
        v = v.scaled(s);
        w = w.scaled(s);
        let rec = reconstruction_check(&v, &w, k_max)?;
        if !rec.holds() {
            failures += 1;
        }
        if rec.tail_bound > 0.0 {
            worst_ratio = worst_ratio.max(rec.frobenius_error / (rec.tail_bound + rec.rounding));
        }
        for t in lowrank_terms(&v, &w, k_max)? {
            if t.numerical_rank() > t.rank_bound || t.spectral_norm() > t.norm_bound * (1.0 + 1e-9) {
                failures += 1;
            }
        }
    }
    Ok((failures == 0, format!("{failures} violations, worst error/bound {worst_ratio:.3}")))
}

fn determinant_bound() -> Result<(bool, String)> {
    let rows = bound_sweep(&[20, 30, 40], &[1, 2], &[WInf::Value(0.05), WInf::Value(0.1), WInf::Value(0.2), WInf::HalfGamma], 6);
    let feasible: Vec<_> = rows.iter().filter(|r| r.p.is_some()).collect();
    let infeasible = rows.iter().filter(|r| r.error.as_deref().is_some_and(|e| e.starts_with("infeasible"))).count();
    let negative = feasible.iter().filter(|r| r.margin.map_or(true, |m| !(m > 0.0))).count();
    let min_margin = feasible.iter().filter_map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let ok = !feasible.is_empty() && negative == 0 && feasible.len() + infeasible == rows.len();
    Ok((
        ok,
        format!(
            "{} feasible cells, {} non-positive margins (min {:.3}), {} infeasible reported",
            feasible.len(),
            negative,
            min_margin,
            infeasible
        ),
    ))
}

fn three_atom() -> Result<BarronMeasure> {
    canonicalize(&BarronMeasure::read_json(shipped_measure("three_atom_n3_d1.json"))?, NormSelector::Inf)
}

fn maurey_rate() -> Result<(bool, String)> {
    let rho = three_atom()?;
    let gamma = default_gamma(rho.d)?;
    let mu = ComplexMeasureSpec::new(rho.clone(), gamma)?;
    let tv = total_variation(&mu);
    let ms = [4usize, 16, 64, 256];
    let seeds = 50u64;
    let samples = 8192;
    let psi = |x: &Configuration| Complex64::new(psi_gamma_eval(&rho, gamma, x).unwrap_or(f64::NAN), 0.0);
    let mut means = Vec::new();
    for &m in &ms {
        let mut total = 0.0;
        for s in 0..seeds {
            let sum = maurey_sample(&mu, m, 1000 + s)?;
            let f = |x: &Configuration| sum.eval(x).unwrap_or(Complex64::new(f64::NAN, 0.0));
            total += mc_l2_distance(f, psi, rho.n, rho.d, samples, 77)?.estimate;
        }
        means.push(total / seeds as f64);
    }
    let lx: Vec<f64> = ms.iter().map(|&m| (m as f64).ln()).collect();
    let ly: Vec<f64> = means.iter().map(|v| v.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / 4.0, ly.iter().sum::<f64>() / 4.0);
    let slope = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let within = ms.iter().zip(&means).all(|(&m, &e)| e <= 1.5 * tv / (m as f64).sqrt());
    let ok = (-0.65..=-0.35).contains(&slope) && within;
    let pairs: Vec<String> = ms.iter().zip(&means).map(|(m, e)| format!("m={m}: {e:.4}")).collect();
    Ok((ok, format!("slope {slope:.3}, |mu| = {tv:.4}, means [{}]", pairs.join(", "))))
}

fn end_to_end() -> Result<(bool, String)> {
    let rho = BarronMeasure::read_json(shipped_measure("three_atom_n3_d1.json"))?;
    let mut ok = true;
    let mut parts = Vec::new();
    for m in [16usize, 64, 256] {
        let (_, rep) = construct(&rho, m, 11, 1 << 18)?;
        ok &= rep.holds();
        parts.push(format!(
            "m={m}: {:.4} <= {:.4} + {:.1e} + 3*{:.1e}",
            rep.error, rep.sampling_bound, rep.truncation_bound, rep.std_error
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn infrared_decay() -> Result<(bool, String)> {
    let gamma = HighPassThreshold::new(0.5)?;
    let mut gaps = Vec::new();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [4usize, 6, 8] {
        let w = random_unit_wave(n, 1, 8, 0)?;
        let gap = infrared_gap_norm(&w, 0.0, gamma)?;
        let bound = infrared_gap_bound(&w, gamma)?;
        ok &= gap <= bound;
        parts.push(format!("n={n}: {gap:.3e} <= {bound:.3e}"));
        gaps.push(gap);
    }
    ok &= gaps.windows(2).all(|p| p[1] < p[0]);
    Ok((ok, parts.join("; ")))
}

fn gradient_check() -> Result<(bool, String)> {
    let h = 1e-5;
    let mut worst = 0.0f64;
    for case in 0..20u64 {
        let mut r = rng::stream(9, case);
        let n = 1 + (rng::uniform(&mut r) * 4.0) as usize;
        let d = 1 + (rng::uniform(&mut r) * 2.0) as usize;
        let m = 1 + (rng::uniform(&mut r) * 8.0) as usize;
        let net = AntisymNetwork::new(
            n,
            d,
            rng::normals(&mut r, m),
            rng::normals(&mut r, m),
            (0..m).map(|_| rng::normals(&mut r, n * d)).collect(),
        )?;
        let batch: Vec<Configuration> =
            (0..6).map(|_| Configuration::new(n, d, rng::normals(&mut r, n * d))).collect::<Result<_>>()?;
        let ys = rng::normals(&mut r, batch.len());
        let g = antisym_network_grad(&net, &batch, &ys)?;
        let loss = |p: &AntisymNetwork| antisym_network_grad(p, &batch, &ys).map(|g| g.loss);
        let mut analytic = Vec::new();
        let mut numeric = Vec::new();
        for k in 0..m {
            for slot in 0..2 + n * d {
                let bump = |t: f64| {
                    let mut p = net.clone();
                    match slot {
                        0 => p.a[k] += t,
                        1 => p.b[k] += t,
                        s => p.w[k][s - 2] += t,
                    }
                    p
                };
                numeric.push((loss(&bump(h))? - loss(&bump(-h))?) / (2.0 * h));
                analytic.push(match slot {
                    0 => g.a[k],
                    1 => g.b[k],
                    s => g.w[k][s - 2],
                });
            }
        }
        let scale = numeric.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let err = analytic.iter().zip(&numeric).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        if scale > 0.0 {
            worst = worst.max(err / scale);
        }
    }
    Ok((worst <= 1e-4, format!("max relative deviation {worst:.2e} over 20 instances")))
}

/// Settings used for the desk-scale scatter.
pub fn scatter_config() -> TrainConfig {
    TrainConfig { steps: 2000, restarts: 1, batch: 256, eval_samples: 8192, ..TrainConfig::default() }
}

fn scatter() -> Result<(bool, String)> {
    let (n, d, m) = (4, 1, 64);
    let targets = window_grid(d, &[-0.5, 0.0, 0.5], &[1.5, 2.5, 3.5])
        .into_iter()
        .map(|w| HermiteTarget::ground_state(n, d, Some(w)))
        .collect::<Result<Vec<_>>>()?;
    let rows = theorem_scatter(&targets, m, &scatter_config())?;
    let c = theorem_constant(d);
    let mut ok = rows.len() == targets.len();
    let mut worst = f64::NEG_INFINITY;
    let mut converged = 0;
    for r in &rows {
        if r.error.is_some() {
            ok = false;
            continue;
        }
        converged += usize::from(r.converged);
        let rhs = r.ab_norm_estimate * c / (m as f64).sqrt() + 0.05 + r.epsilon_achieved.sqrt();
        worst = worst.max(r.slater_fit_error - rhs);
        ok &= r.slater_fit_error <= rhs;
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    Ok((
        ok,
        format!("{} rows, {failed} failed, {converged} converged, max(fit - bound) {worst:.3}", rows.len()),
    ))
}
