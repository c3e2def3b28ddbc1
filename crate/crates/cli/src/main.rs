//! `stablecov`: coverage curves, fitting and self-similarity checks for
//! cellular networks with α-stable base-station density.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numerical
//! failure. Errors print one line, `stablecov: error[<kind>]: <reason>`.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use stablecov_core::analytic::{
    coverage_a_inf_with, coverage_hppp_with, coverage_r_inf_with, coverage_thm2_with, upper_bound_thm4,
    CoverageQuery, GeometryWindow, IntegrationOptions, Window,
};
use stablecov_core::deployment::Deployment;
use stablecov_core::fitting::{fit_stable, grid_density};
use stablecov_core::kernels::ChannelModel;
use stablecov_core::montecarlo::{
    empirical_coverage, empirical_coverage_at, sample_deployment, simulate_coverage, EmpiricalOptions, SimConfig,
};
use stablecov_core::rng::stream;
use stablecov_core::selfsim::{hurst_multi_origin, HurstMethod, SeriesKind};
use stablecov_core::stable::{SelfSimParams, StableParams};
use stablecov_core::Error;

use config::{parse_list, pick, thresholds, FileConfig, Model};
use output::{write_curve, write_json, Sink};

#[derive(Parser, Debug)]
#[command(name = "stablecov", version, about = "Coverage analysis for networks with α-stable base-station density")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML file with model keys (alpha, sigma, mu, delta, zeta, n0, hurst, zoom, radius_r).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Accept α = 1 and its formulas as printed.
    #[arg(long, global = true)]
    allow_alpha_one: bool,
    /// SINR thresholds in dB, comma separated.
    #[arg(long, global = true, allow_hyphen_values = true)]
    thresholds: Option<String>,
    /// Stability index α.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Density scale σ.
    #[arg(long, global = true)]
    sigma: Option<f64>,
    /// Density location μ (per m²).
    #[arg(long, global = true)]
    mu: Option<f64>,
    /// Path-loss exponent δ.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Rayleigh fading rate ζ.
    #[arg(long, global = true)]
    zeta: Option<f64>,
    /// Normalized noise power N₀.
    #[arg(long, global = true)]
    n0: Option<f64>,
    /// Hurst exponent H of the density field.
    #[arg(long, global = true)]
    hurst: Option<f64>,
    /// Zoom factor a of the outer annulus.
    #[arg(long, global = true)]
    zoom: Option<f64>,
    /// Inner radius R in meters.
    #[arg(long = "radius-r", global = true)]
    radius_r: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coverage probability against SINR threshold.
    Coverage {
        #[arg(long, value_enum)]
        mode: Mode,
        /// Density of the homogeneous model; defaults to mu.
        #[arg(long)]
        lambda: Option<f64>,
        /// Monte Carlo realizations.
        #[arg(long)]
        realizations: Option<usize>,
        /// Lower end of the radial integral in meters.
        #[arg(long, default_value_t = 0.0)]
        r_min: f64,
    },
    /// Fit the stable law and a Poisson intensity to a deployment.
    Fit {
        deployment: PathBuf,
        /// Grid cell side in meters.
        #[arg(long)]
        cell_side: f64,
        /// Read `lon,lat` columns instead of `x_m,y_m`.
        #[arg(long)]
        geo: bool,
    },
    /// Hurst exponent of concentric-ring counts.
    Hurst {
        deployment: PathBuf,
        #[arg(long)]
        ring_width: f64,
        #[arg(long)]
        n_rings: usize,
        #[arg(long, default_value_t = 16)]
        origins: usize,
        /// `rs` or `vt`.
        #[arg(long, default_value = "rs")]
        method: String,
        /// Count whole discs instead of annuli.
        #[arg(long)]
        cumulative: bool,
        #[arg(long)]
        geo: bool,
    },
    /// Coverage of users dropped over a fixed deployment.
    Empirical {
        deployment: PathBuf,
        #[arg(long)]
        drops: Option<usize>,
        /// Fraction of the region users are dropped in.
        #[arg(long, default_value_t = 0.8)]
        margin: f64,
        /// Fixed user position; both coordinates are required.
        #[arg(long, requires = "user_y", allow_hyphen_values = true)]
        user_x: Option<f64>,
        #[arg(long, requires = "user_x", allow_hyphen_values = true)]
        user_y: Option<f64>,
        #[arg(long)]
        geo: bool,
    },
    /// Sample a synthetic deployment.
    Gen,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    AnalyticThm2,
    AnalyticAInf,
    AnalyticRInf,
    Hppp,
    UpperBound,
    Simulate,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::AnalyticThm2 => "analytic-thm2",
            Mode::AnalyticAInf => "analytic-a-inf",
            Mode::AnalyticRInf => "analytic-r-inf",
            Mode::Hppp => "hppp",
            Mode::UpperBound => "upper-bound",
            Mode::Simulate => "simulate",
        }
    }
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl From<String> for Failure {
    fn from(s: String) -> Self {
        Failure::Config(s)
    }
}

type Outcome = Result<(), Failure>;

struct Context {
    file: FileConfig,
    flags: FileConfig,
    model: Model,
    seed: u64,
    allow_alpha_one: bool,
    sink: Sink,
}

impl Context {
    fn stable(&self) -> Result<StableParams, Failure> {
        let m = &self.model;
        Ok(StableParams::with_alpha_one(m.alpha, m.sigma, m.mu, self.allow_alpha_one)?)
    }

    fn channel(&self, n0: f64) -> Result<ChannelModel, Failure> {
        Ok(ChannelModel::new(self.model.delta, self.model.zeta, n0)?)
    }

    fn window(&self) -> Result<GeometryWindow, Failure> {
        let ss = SelfSimParams::new(self.model.hurst, self.model.zoom)?;
        Ok(GeometryWindow::new(self.model.radius_r, ss)?)
    }

    fn thresholds(&self) -> Result<Vec<f64>, Failure> {
        Ok(thresholds(self.flags.thresholds_db.clone(), self.file.thresholds_db.clone())?)
    }
}

fn read_deployment(path: &std::path::Path, geo: bool) -> Result<Deployment, Failure> {
    Deployment::read_csv_path(path, geo).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Outcome {
    let g = cli.global;
    if let Some(n) = g.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be ≥ 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    }
    let file = match &g.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let flags = FileConfig {
        alpha: g.alpha,
        sigma: g.sigma,
        mu: g.mu,
        delta: g.delta,
        zeta: g.zeta,
        n0: g.n0,
        hurst: g.hurst,
        zoom: g.zoom,
        radius_r: g.radius_r,
        thresholds_db: g.thresholds.as_deref().map(parse_list).transpose()?,
        seed: g.seed,
        ..FileConfig::default()
    };
    let model = Model::merge(&file, &flags);
    let seed = pick(g.seed, file.seed, 0);
    let sink = Sink::resolve(g.out.as_deref(), std::env::var_os(output::OUT_DIR_VAR));
    let ctx = Context { file, flags, model, seed, allow_alpha_one: g.allow_alpha_one, sink };

    match cli.command {
        Command::Coverage { mode, lambda, realizations, r_min } => coverage(&ctx, mode, lambda, realizations, r_min),
        Command::Fit { deployment, cell_side, geo } => fit(&ctx, &deployment, cell_side, geo),
        Command::Hurst { deployment, ring_width, n_rings, origins, method, cumulative, geo } => {
            let method: HurstMethod = method.parse()?;
            let kind = if cumulative { SeriesKind::Cumulative } else { SeriesKind::Annulus };
            hurst(&ctx, &deployment, ring_width, n_rings, origins, method, kind, geo)
        }
        Command::Empirical { deployment, drops, margin, user_x, user_y, geo } => {
            let user = user_x.zip(user_y);
            empirical(&ctx, &deployment, drops, margin, user, geo)
        }
        Command::Gen => gen(&ctx),
    }
}

fn coverage(ctx: &Context, mode: Mode, lambda: Option<f64>, realizations: Option<usize>, r_min: f64) -> Outcome {
    let t = ctx.thresholds()?;
    let ch = ctx.channel(ctx.model.n0)?;
    let opts = IntegrationOptions { r_min, ..IntegrationOptions::default() };
    let curve = match mode {
        Mode::Hppp => {
            let lambda = pick(lambda, ctx.file.lambda, ctx.model.mu);
            coverage_hppp_with(lambda, &ch, &t, &opts)?
        }
        Mode::Simulate => {
            let mut cfg = SimConfig::new(ctx.stable()?, ctx.window()?, ch, ctx.seed);
            cfg.realizations = pick(realizations, ctx.file.realizations, cfg.realizations);
            simulate_coverage(&cfg, &t)?
        }
        _ => {
            let window = match mode {
                Mode::AnalyticThm2 => Window::Finite(ctx.window()?),
                Mode::AnalyticAInf => Window::ZoomInfinite { inner_radius: ctx.model.radius_r },
                _ => Window::RadiusInfinite,
            };
            let q = CoverageQuery::new(ctx.stable()?, ch, window, t)?;
            match mode {
                Mode::AnalyticThm2 => coverage_thm2_with(&q, &opts)?,
                Mode::AnalyticAInf => coverage_a_inf_with(&q, &opts)?,
                Mode::AnalyticRInf => coverage_r_inf_with(&q, &opts)?,
                _ => upper_bound_thm4(&q)?,
            }
        }
    };
    let meta = json!({ "command": "coverage", "mode": mode.name(), "seed": ctx.seed, "meta": curve.meta });
    write_curve(&ctx.sink, &meta, &curve)
}

fn fit(ctx: &Context, path: &std::path::Path, cell_side: f64, geo: bool) -> Outcome {
    let dep = read_deployment(path, geo)?;
    let field = grid_density(&dep, cell_side)?;
    let r = fit_stable(&field)?;
    let report = json!({
        "stable": {
            "alpha": r.stable.alpha(),
            "beta": r.stable.beta(),
            "sigma": r.stable.sigma(),
            "mu": r.stable.mu(),
        },
        "poisson": { "lambda": r.poisson_lambda },
        "field": {
            "cell_side_m": field.cell_side,
            "rows": field.grid_dims.0,
            "cols": field.grid_dims.1,
            "base_stations": dep.len(),
        },
        "diagnostics": r.diagnostics,
    });
    write_json(&ctx.sink, &report)
}

#[allow(clippy::too_many_arguments)]
fn hurst(
    ctx: &Context,
    path: &std::path::Path,
    ring_width: f64,
    n_rings: usize,
    origins: usize,
    method: HurstMethod,
    kind: SeriesKind,
    geo: bool,
) -> Outcome {
    let dep = read_deployment(path, geo)?;
    let rep = hurst_multi_origin(&dep, ring_width, n_rings, origins, method, kind, ctx.seed)?;
    let per_origin: Vec<_> = rep
        .origins
        .iter()
        .zip(&rep.estimates)
        .zip(&rep.truncated)
        .map(|((o, e), tr)| {
            json!({
                "x_m": o.0, "y_m": o.1, "h": e.h, "raw_h": e.raw_h, "r2": e.r2,
                "low_confidence": e.low_confidence, "truncated": tr, "points": e.points,
            })
        })
        .collect();
    let report = json!({
        "method": rep.method,
        "series": kind,
        "ring_width_m": ring_width,
        "n_rings": n_rings,
        "seed": ctx.seed,
        "mean": rep.mean,
        "std": rep.std,
        "origins": per_origin,
    });
    write_json(&ctx.sink, &report)
}

fn empirical(
    ctx: &Context,
    path: &std::path::Path,
    drops: Option<usize>,
    margin: f64,
    user: Option<(f64, f64)>,
    geo: bool,
) -> Outcome {
    let dep = read_deployment(path, geo)?;
    if dep.is_empty() {
        return Err(Error::EmptyDeployment.into());
    }
    // noise-free unless asked for
    let n0 = pick(ctx.flags.n0, ctx.file.n0, 0.0);
    let ch = ctx.channel(n0)?;
    let t = ctx.thresholds()?;
    let defaults = EmpiricalOptions::default();
    let opts = EmpiricalOptions { drops: pick(drops, ctx.file.drops, defaults.drops), seed: ctx.seed, margin };
    let curve = match user {
        Some(u) => empirical_coverage_at(&dep, &ch, u, &t, &opts)?,
        None => empirical_coverage(&dep, &ch, &t, &opts)?,
    };
    let meta = json!({ "command": "empirical", "seed": ctx.seed, "meta": curve.meta });
    write_curve(&ctx.sink, &meta, &curve)
}

fn gen(ctx: &Context) -> Outcome {
    let cfg = SimConfig::new(ctx.stable()?, ctx.window()?, ctx.channel(ctx.model.n0)?, ctx.seed);
    let mut rng = stream(ctx.seed, 0);
    let dep = sample_deployment(&cfg, &mut rng)?;
    let mut buf = Vec::new();
    dep.write_csv(&mut buf)?;
    ctx.sink.write(&buf)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let first = e.to_string();
                let line = first.lines().next().unwrap_or("").trim_start_matches("error: ");
                eprintln!("stablecov: error[usage]: {line}");
                return ExitCode::from(2);
            }
            // help and version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("stablecov: error[config]: {}", one_line(&msg));
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("stablecov: error[numerical]: {}", one_line(&msg));
            ExitCode::from(3)
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
