use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use slater_barron::activation::{highpass_relu, uniform_grid, HighPassThreshold};
use slater_barron::barron::BarronMeasure;
use slater_barron::bounds::{bound_sweep, norm_curve, random_unit_wave};
use slater_barron::experiments::{
    estimate_ab_norm, theorem_scatter, window_grid, HermiteTarget, NormEstimate, PointTarget, Window, ZeroTarget,
};
use slater_barron::{construct, Error, Result};

use crate::config::{BoundsConfig, ConstructConfig, Fig1Config, Fig2Config, NormConfig, NormTarget, ScatterConfig};

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidInput(format!("{other:?}")),
    }
}

fn write_csv<R: Serialize>(path: Option<&Path>, rows: impl IntoIterator<Item = R>) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink(path)?);
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

#[derive(Serialize)]
struct Fig1Row {
    y: f64,
    gamma: f64,
    highpass_relu: f64,
}

pub fn fig1(c: &Fig1Config) -> Result<()> {
    c.validate()?;
    let grid = uniform_grid(c.y_min, c.y_max, c.points);
    let mut rows = Vec::with_capacity(grid.len() * c.gammas.len());
    for &g in &c.gammas {
        let gamma = HighPassThreshold::new(g)?;
        rows.extend(grid.iter().map(|&y| Fig1Row { y, gamma: g, highpass_relu: highpass_relu(y, gamma) }));
    }
    write_csv(c.output.as_deref(), rows)
}

#[derive(Serialize)]
struct Fig2Row {
    theta: f64,
    norm_sq: f64,
    bound: Option<f64>,
}

pub fn fig2(c: &Fig2Config) -> Result<()> {
    c.validate()?;
    let w = random_unit_wave(c.n, c.d, c.seed, 0)?;
    let rows = norm_curve(&w, &uniform_grid(0.0, c.theta_max, c.points))?;
    write_csv(
        c.output.as_deref(),
        rows.into_iter().map(|r| Fig2Row { theta: r.theta, norm_sq: r.norm_sq, bound: r.bound }),
    )
}

#[derive(Serialize)]
struct ConstructOutput<'a> {
    #[serde(flatten)]
    report: &'a construct::ConstructReport,
    right_side: f64,
    holds: bool,
}

pub fn construct(c: &ConstructConfig) -> Result<()> {
    c.validate()?;
    let measure = BarronMeasure::read_json(c.measure.as_deref().expect("validated"))?;
    let (sum, report) = construct::construct(&measure, c.m, c.seed, c.mc_samples)?;
    if let Some(p) = &c.output {
        std::fs::write(p, serde_json::to_string_pretty(&sum)?)?;
    }
    let out = ConstructOutput { report: &report, right_side: report.right_side(), holds: report.holds() };
    let mut w = sink(c.report.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &out)?;
    writeln!(w)?;
    Ok(())
}


pub fn bounds(c: &BoundsConfig) -> Result<()> {
    let w_infs = c.validate()?;
    let rows = bound_sweep(&c.ns, &c.ds, &w_infs, c.seed);
    write_csv(c.output.as_deref(), rows)
}

#[derive(Serialize)]
struct ScatterCsvRow {
    window_center: String,
    window_halfwidth: Option<f64>,
    ab_norm_estimate: f64,
    epsilon_achieved: f64,
    slater_fit_error: f64,
    opacity: f64,
    converged: bool,
    error: Option<String>,
}

pub fn scatter(c: &ScatterConfig) -> Result<()> {
    c.validate()?;
    let targets = window_grid(c.d, &c.centers, &c.halfwidths)
        .into_iter()
        .map(|w| HermiteTarget::ground_state(c.n, c.d, Some(w)))
        .collect::<Result<Vec<_>>>()?;
    let rows = theorem_scatter(&targets, c.m, &c.train)?;
    write_csv(
        c.output.as_deref(),
        rows.into_iter().map(|r| ScatterCsvRow {
            window_center: r.window_center.as_deref().map(join).unwrap_or_default(),
            window_halfwidth: r.window_halfwidth,
            ab_norm_estimate: r.ab_norm_estimate,
            epsilon_achieved: r.epsilon_achieved,
            slater_fit_error: r.slater_fit_error,
            opacity: r.opacity,
            converged: r.converged,
            error: r.error,
        }),
    )
}

#[derive(Serialize)]
struct NormSummary {
    estimate: f64,
    residual: f64,
    best_residual: f64,
    converged: bool,
    width: usize,
}

pub fn norm(c: &NormConfig) -> Result<NormEstimate> {
    c.validate()?;
    let target: Box<dyn PointTarget> = match c.target {
        NormTarget::Zero => Box::new(ZeroTarget { n: c.n, d: c.d }),
        NormTarget::Hermite => {
            let window = match (&c.window_center, c.window_halfwidth) {
                (Some(center), Some(halfwidth)) => Some(Window { center: center.clone(), halfwidth }),
                _ => None,
            };
            Box::new(match &c.orbitals {
                Some(o) => HermiteTarget::new(c.n, c.d, o.clone(), window)?,
                None => HermiteTarget::ground_state(c.n, c.d, window)?,
            })
        }
    };
    let est = estimate_ab_norm(target.as_ref(), c.m, &c.train)?;
    write_csv(
        c.output.as_deref(),
        [NormSummary {
            estimate: est.estimate,
            residual: est.residual,
            best_residual: est.best_residual,
            converged: est.converged,
            width: est.network.width(),
        }],
    )?;
    if let Some(p) = &c.log {
        write_csv(Some(p), &est.log)?;
    }
    Ok(est)
}

pub fn selftest(ids: Option<&[u8]>) -> Result<bool> {
    let selected: Vec<_> = match ids {
        None => slater_barron_checks::CRITERIA.iter().collect(),
        Some(ids) => ids
            .iter()
            .map(|&id| {
                slater_barron_checks::criterion(id)
                    .ok_or_else(|| Error::InvalidInput(format!("field `criteria`: no criterion {id}")))
            })
            .collect::<Result<_>>()?,
    };
    let mut all = true;
    for c in selected {
        let outcome = c.run();
        all &= outcome.passed;
        println!("{outcome}");
    }
    Ok(all)
}
