use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::{NormTarget, WInfSpec};

#[derive(Parser, Debug)]
#[command(name = "slater-barron", version, about = "Plane-wave Slater determinants and antisymmetric Barron functions")]
struct Cli {
    /// Worker threads for parallel sweeps; all cores when absent.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// High-pass ReLU curves for several cutoffs.
    #[command(after_help = "Config keys: gammas, y_min, y_max, points, output")]
    Fig1(Fig1Args),
    /// Squared norm of a plane-wave Slater along theta * w with |w|_inf = 1.
    #[command(after_help = "Config keys: n, d, seed, theta_max, points, output")]
    Fig2(Fig2Args),
    /// Sample a Slater sum from a Barron measure and measure the error.
    #[command(after_help = "Config keys: measure, m, seed, mc_samples, output, report")]
    Construct(ConstructArgs),
    /// Determinant lower bounds over a grid of (n, d, |w|_inf).
    #[command(after_help = "Config keys: ns, ds, w_infs, seed, output")]
    Bounds(BoundsArgs),
    /// Norm estimate versus Slater fit error over windowed Hermite targets.
    #[command(after_help = concat!(
        "Config keys: n, d, m, centers, halfwidths, output, train\n",
        "train keys: epsilon, lambda, steps, batch, learning_rate, momentum, seed, restarts, init_scale, converge_window, converge_tol, eval_samples"
    ))]
    Scatter(ScatterArgs),
    /// Estimate the antisymmetric Barron norm of one target.
    #[command(after_help = concat!(
        "Config keys: target, n, d, orbitals, window_center, window_halfwidth, m, output, log, train\n",
        "train keys: epsilon, lambda, steps, batch, learning_rate, momentum, seed, restarts, init_scale, converge_window, converge_tol, eval_samples"
    ))]
    Norm(NormArgs),
    /// Run the acceptance checks.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
struct Fig1Args {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    y_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    y_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Fig2Args {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    theta_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Barron measure JSON.
    #[arg(long)]
    measure: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    mc_samples: Option<usize>,
    /// Slater sum JSON destination.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Report JSON destination; stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    ds: Option<Vec<usize>>,
    /// Numbers or `half_gamma`.
    #[arg(long, value_delimiter = ',')]
    w_infs: Option<Vec<WInfSpec>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct TrainArgs {
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    init_scale: Option<f64>,
    #[arg(long)]
    converge_window: Option<usize>,
    #[arg(long)]
    converge_tol: Option<f64>,
    #[arg(long)]
    eval_samples: Option<usize>,
}

#[derive(Args, Debug)]
struct ScatterArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Network width and number of Slater terms.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    centers: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    halfwidths: Option<Vec<f64>>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    train: TrainArgs,
}

#[derive(Args, Debug)]
struct NormArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// `hermite` or `zero`.
    #[arg(long)]
    target: Option<NormTarget>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    window_center: Option<Vec<f64>>,
    #[arg(long)]
    window_halfwidth: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Training log CSV destination.
    #[arg(long)]
    log: Option<PathBuf>,
    #[command(flatten)]
    train: TrainArgs,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    /// Criterion ids; all when absent.
    #[arg(long, value_delimiter = ',')]
    criteria: Option<Vec<u8>>,
}

macro_rules! overlay {
    ($cfg:expr, $args:expr; $($f:ident),*) => {
        $(if let Some(v) = $args.$f { $cfg.$f = v; })*
    };
}

macro_rules! overlay_opt {
    ($cfg:expr, $args:expr; $($f:ident),*) => {
        $(if let Some(v) = $args.$f { $cfg.$f = Some(v); })*
    };
}

fn overlay_train(cfg: &mut slater_barron::experiments::TrainConfig, a: TrainArgs) {
    overlay!(cfg, a; epsilon, lambda, steps, batch, learning_rate, momentum, seed, restarts, init_scale,
        converge_window, converge_tol, eval_samples);
}

fn run(cli: Cli) -> slater_barron::Result<ExitCode> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(slater_barron::Error::InvalidInput("field `threads`: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| slater_barron::Error::InvalidInput(e.to_string()))?;
    }
    match cli.command {
        Command::Fig1(a) => {
            let mut c: config::Fig1Config = config::load(a.config.as_deref())?;
            overlay!(c, a; gammas, y_min, y_max, points);
            overlay_opt!(c, a; output);
            commands::fig1(&c)?;
        }
        Command::Fig2(a) => {
            let mut c: config::Fig2Config = config::load(a.config.as_deref())?;
            overlay!(c, a; n, d, seed, theta_max, points);
            overlay_opt!(c, a; output);
            commands::fig2(&c)?;
        }
        Command::Construct(a) => {
            let mut c: config::ConstructConfig = config::load(a.config.as_deref())?;
            overlay!(c, a; m, seed, mc_samples);
            overlay_opt!(c, a; measure, output, report);
            commands::construct(&c)?;
        }
        Command::Bounds(a) => {
            let mut c: config::BoundsConfig = config::load(a.config.as_deref())?;
            overlay!(c, a; ns, ds, w_infs, seed);
            overlay_opt!(c, a; output);
            commands::bounds(&c)?;
        }
        Command::Scatter(a) => {
            let mut c: config::ScatterConfig = config::load(a.config.as_deref())?;
            overlay!(c, a; n, d, m, centers, halfwidths);
            overlay_opt!(c, a; output);
            overlay_train(&mut c.train, a.train);
            commands::scatter(&c)?;
        }
        Command::Norm(a) => {
            let mut c: config::NormConfig = config::load(a.config.as_deref())?;
            overlay!(c, a; target, n, d, m);
            overlay_opt!(c, a; window_center, window_halfwidth, output, log);
            overlay_train(&mut c.train, a.train);
            commands::norm(&c)?;
        }
        Command::Selftest(a) => {
            if !commands::selftest(a.criteria.as_deref())? {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(slater_barron::Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
