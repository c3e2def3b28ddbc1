//! Monte Carlo estimates of coverage.
//!
//! A realization draws one density `λ` for the whole window, places a PPP of
//! density `λ` on the inner disc and `λ a^(H−2)` on the annulus `[R, aR]`,
//! and puts the user at the origin. Only distances to the origin matter, so
//! points are generated in radial order: the `k`-th point of a PPP of
//! density `λ` beyond radius `ρ` lies at `√(ρ² + Γ_k / (πλ))`, where the
//! `Γ_k` are unit-rate Poisson arrival times. After `max_explicit` points the
//! rest of a region contributes its mean interference.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Exp, Exp1, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{db_to_linear, CoverageCurve, CurveMeta, CurvePoint, GeometryWindow, PointDiagnostics};
use crate::deployment::{Bounds, Deployment};
use crate::error::{Error, Result};
use crate::kernels::ChannelModel;
use crate::rng::stream;
use crate::stable::{draw, StableParams};

/// Settings of a simulation run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub stable: StableParams,
    pub window: GeometryWindow,
    pub channel: ChannelModel,
    pub realizations: usize,
    pub seed: u64,
    /// Independent fading draws per deployment.
    pub drops_per_realization: usize,
    /// Explicit points per region before switching to mean interference.
    pub max_explicit: usize,
    /// Upper limit on expected points for [`sample_deployment`].
    pub max_points: usize,
}

impl SimConfig {
    pub fn new(stable: StableParams, window: GeometryWindow, channel: ChannelModel, seed: u64) -> Self {
        Self {
            stable,
            window,
            channel,
            realizations: 15_000,
            seed,
            drops_per_realization: 1,
            max_explicit: 4096,
            max_points: 5_000_000,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::InvalidParameter("realizations must be ≥ 1".into()));
        }
        if self.drops_per_realization == 0 {
            return Err(Error::InvalidParameter("drops per realization must be ≥ 1".into()));
        }
        if self.max_explicit == 0 {
            return Err(Error::InvalidParameter("max_explicit must be ≥ 1".into()));
        }
        Ok(())
    }
}

fn check_thresholds(thresholds_db: &[f64]) -> Result<Vec<f64>> {
    if thresholds_db.is_empty() {
        return Err(Error::InvalidParameter("threshold list is empty".into()));
    }
    if let Some(t) = thresholds_db.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter(format!("threshold {t} dB is not finite")));
    }
    let mut t = thresholds_db.to_vec();
    t.sort_by(f64::total_cmp);
    Ok(t)
}

fn density<R: Rng + ?Sized>(stable: &StableParams, rng: &mut R) -> (f64, bool) {
    let x = draw(stable, rng);
    if x < 0.0 {
        (0.0, true)
    } else {
        (x, false)
    }
}

/// Materialized deployment of one realization, on the disc of radius `aR`.
pub fn sample_deployment<R: Rng + ?Sized>(cfg: &SimConfig, rng: &mut R) -> Result<Deployment> {
    let (lambda, _) = density(&cfg.stable, rng);
    let big_r = cfg.window.inner_radius();
    let outer = cfg.window.outer_radius();
    let inner_mean = lambda * PI * big_r * big_r;
    let outer_mean = lambda * cfg.window.selfsim().density_factor() * PI * (outer * outer - big_r * big_r);
    let expected = inner_mean + outer_mean;
    if expected > cfg.max_points as f64 {
        return Err(Error::TooManyPoints { expected, limit: cfg.max_points });
    }
    let mut points = Vec::new();
    for (mean, lo, hi) in [(inner_mean, 0.0, big_r), (outer_mean, big_r, outer)] {
        if !(mean > 0.0) {
            continue;
        }
        let n = Poisson::new(mean).map_err(|e| Error::InvalidParameter(e.to_string()))?.sample(rng) as usize;
        for _ in 0..n {
            let u: f64 = rng.random();
            let r = (lo * lo + u * (hi * hi - lo * lo)).sqrt();
            let phi = TAU * rng.random::<f64>();
            points.push((r * phi.cos(), r * phi.sin()));
        }
    }
    Deployment::new(points, Bounds::disc(0.0, 0.0, outer)?)
}

/// Radial PPP on `[lo, hi)` with density `lambda`: up to `max` distances in
/// increasing order, plus whether the region was cut short.
fn radial_points<R: Rng + ?Sized>(lambda: f64, lo: f64, hi: f64, max: usize, rng: &mut R, out: &mut Vec<f64>) -> bool {
    if !(lambda > 0.0) || hi <= lo {
        return false;
    }
    let mut gamma = 0.0;
    let lo2 = lo * lo;
    let hi2 = hi * hi;
    for _ in 0..max {
        let e: f64 = Exp1.sample(rng);
        gamma += e;
        let d2 = lo2 + gamma / (PI * lambda);
        if d2 >= hi2 {
            return false;
        }
        out.push(d2.sqrt());
    }
    true
}

/// Mean interference `λ ∫_ρ^c 2πv v^(−δ) dv / ζ` of the unsampled remainder.
fn mean_interference(lambda: f64, rho: f64, c: f64, ch: &ChannelModel) -> f64 {
    let d = ch.delta();
    let radial = if d == 2.0 {
        (c / rho).ln()
    } else {
        (rho.powf(2.0 - d) - c.powf(2.0 - d)) / (d - 2.0)
    };
    lambda * TAU * radial / ch.zeta()
}

struct Tally {
    covered: Vec<u64>,
    clamped: u64,
    truncated: u64,
    empty: u64,
}

impl Tally {
    fn zero(n: usize) -> Self {
        Self { covered: vec![0; n], clamped: 0, truncated: 0, empty: 0 }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.covered.iter_mut().zip(&other.covered) {
            *a += b;
        }
        self.clamped += other.clamped;
        self.truncated += other.truncated;
        self.empty += other.empty;
        self
    }
}

fn realization(cfg: &SimConfig, thresholds: &[f64], index: u64) -> Tally {
    let mut rng = stream(cfg.seed, index);
    let mut tally = Tally::zero(thresholds.len());
    let (lambda, clamped) = density(&cfg.stable, &mut rng);
    tally.clamped += clamped as u64;
    let ch = &cfg.channel;
    let big_r = cfg.window.inner_radius();
    let outer = cfg.window.outer_radius();
    let lambda_s = lambda * cfg.window.selfsim().density_factor();

    let mut inner = Vec::new();
    let mut outer_pts = Vec::new();
    let cut_inner = radial_points(lambda, 0.0, big_r, cfg.max_explicit, &mut rng, &mut inner);
    let cut_outer = radial_points(lambda_s, big_r, outer, cfg.max_explicit, &mut rng, &mut outer_pts);
    let mut background = 0.0;
    if cut_inner {
        background += mean_interference(lambda, *inner.last().unwrap(), big_r, ch);
    }
    if cut_outer {
        background += mean_interference(lambda_s, *outer_pts.last().unwrap(), outer, ch);
    }
    tally.truncated += (cut_inner || cut_outer) as u64;

    let mut dists = inner;
    dists.extend(outer_pts);
    if dists.is_empty() {
        tally.empty += cfg.drops_per_realization as u64;
        return tally;
    }
    let fade = Exp::new(ch.zeta()).expect("zeta validated positive");
    let d = ch.delta();
    let gains: Vec<f64> = dists.iter().map(|r| r.powf(-d)).collect();
    for _ in 0..cfg.drops_per_realization {
        let h: f64 = fade.sample(&mut rng);
        let signal = h * gains[0];
        let mut interference = ch.n0() + background;
        for g in &gains[1..] {
            interference += fade.sample(&mut rng) * g;
        }
        let sinr = signal / interference;
        for (c, t) in tally.covered.iter_mut().zip(thresholds) {
            if sinr > *t {
                *c += 1;
            }
        }
    }
    tally
}

fn curve_from_counts(
    method: &str,
    thresholds_db: &[f64],
    covered: &[u64],
    trials: u64,
    params: BTreeMap<String, f64>,
    counters: BTreeMap<String, u64>,
    r_max: f64,
) -> CoverageCurve {
    let n = trials as f64;
    let mut points = Vec::new();
    let mut diagnostics = Vec::new();
    for (t_db, c) in thresholds_db.iter().zip(covered) {
        let p = *c as f64 / n;
        points.push(CurvePoint { t_db: *t_db, p_c: p });
        diagnostics.push(PointDiagnostics {
            t_db: *t_db,
            raw: p,
            error_estimate: (p * (1.0 - p) / n).sqrt(),
            evaluations: trials as usize,
            r_max,
            truncated_mass: 0.0,
            flags: Vec::new(),
        });
    }
    CoverageCurve { points, meta: CurveMeta { method: method.into(), params, counters, diagnostics } }
}

/// Fraction of realizations whose SINR at the origin exceeds each threshold.
///
/// Deterministic for a given seed regardless of the thread count.
pub fn simulate_coverage(cfg: &SimConfig, thresholds_db: &[f64]) -> Result<CoverageCurve> {
    cfg.validate()?;
    let sorted = check_thresholds(thresholds_db)?;
    let linear: Vec<f64> = sorted.iter().map(|t| db_to_linear(*t)).collect();
    let tally = (0..cfg.realizations as u64)
        .into_par_iter()
        .map(|i| realization(cfg, &linear, i))
        .reduce(|| Tally::zero(linear.len()), Tally::merge);

    let mut params = BTreeMap::new();
    params.insert("alpha".into(), cfg.stable.alpha());
    params.insert("sigma".into(), cfg.stable.sigma());
    params.insert("mu".into(), cfg.stable.mu());
    params.insert("delta".into(), cfg.channel.delta());
    params.insert("zeta".into(), cfg.channel.zeta());
    params.insert("n0".into(), cfg.channel.n0());
    params.insert("radius_r".into(), cfg.window.inner_radius());
    params.insert("hurst".into(), cfg.window.selfsim().hurst());
    params.insert("zoom".into(), cfg.window.selfsim().zoom());
    let mut counters = BTreeMap::new();
    counters.insert("seed".into(), cfg.seed);
    counters.insert("realizations".into(), cfg.realizations as u64);
    counters.insert("drops_per_realization".into(), cfg.drops_per_realization as u64);
    counters.insert("max_explicit".into(), cfg.max_explicit as u64);
    counters.insert("clamped_densities".into(), tally.clamped);
    counters.insert("mean_field_realizations".into(), tally.truncated);
    counters.insert("empty_trials".into(), tally.empty);
    let trials = (cfg.realizations * cfg.drops_per_realization) as u64;
    Ok(curve_from_counts("simulate", &sorted, &tally.covered, trials, params, counters, cfg.window.outer_radius()))
}

/// Options of [`empirical_coverage`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EmpiricalOptions {
    pub drops: usize,
    pub seed: u64,
    /// Users are dropped in the bounds shrunk linearly by this factor; 1
    /// uses the whole region.
    pub margin: f64,
}

impl Default for EmpiricalOptions {
    fn default() -> Self {
        Self { drops: 100_000, seed: 0, margin: 0.8 }
    }
}

fn sinr_at(dep: &Deployment, ch: &ChannelModel, ux: f64, uy: f64, rng: &mut impl Rng) -> f64 {
    let fade = Exp::new(ch.zeta()).expect("zeta validated positive");
    let half = ch.delta() / 2.0;
    let int_half = (half.fract() == 0.0 && half <= 16.0).then_some(half as i32);
    let gain = |d2: f64| match int_half {
        Some(k) => d2.powi(-k),
        None => d2.powf(-half),
    };
    let pts = dep.points();
    let mut best = 0;
    let mut best_d2 = f64::INFINITY;
    for (i, &(x, y)) in pts.iter().enumerate() {
        let d2 = (x - ux).powi(2) + (y - uy).powi(2);
        if d2 < best_d2 {
            best_d2 = d2;
            best = i;
        }
    }
    let signal_gain = gain(best_d2);
    let h: f64 = fade.sample(rng);
    let mut interference = ch.n0();
    for (i, &(x, y)) in pts.iter().enumerate() {
        if i == best {
            continue;
        }
        let d2 = (x - ux).powi(2) + (y - uy).powi(2);
        interference += fade.sample(rng) * gain(d2);
    }
    if signal_gain.is_infinite() {
        return f64::INFINITY;
    }
    h * signal_gain / interference
}

fn empirical_run<F>(dep: &Deployment, ch: &ChannelModel, opts: &EmpiricalOptions, thresholds_db: &[f64], user: F) -> Result<CoverageCurve>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> (f64, f64) + Sync,
{
    if dep.is_empty() {
        return Err(Error::EmptyDeployment);
    }
    if opts.drops == 0 {
        return Err(Error::InvalidParameter("drops must be ≥ 1".into()));
    }
    let sorted = check_thresholds(thresholds_db)?;
    let linear: Vec<f64> = sorted.iter().map(|t| db_to_linear(*t)).collect();
    let covered = (0..opts.drops as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(opts.seed, i);
            let (ux, uy) = user(&mut rng);
            let sinr = sinr_at(dep, ch, ux, uy, &mut rng);
            linear.iter().map(|t| (sinr > *t) as u64).collect::<Vec<u64>>()
        })
        .reduce(|| vec![0; linear.len()], |mut a, b| {
            for (x, y) in a.iter_mut().zip(&b) {
                *x += y;
            }
            a
        });
    let mut params = BTreeMap::new();
    params.insert("delta".into(), ch.delta());
    params.insert("zeta".into(), ch.zeta());
    params.insert("n0".into(), ch.n0());
    params.insert("margin".into(), opts.margin);
    let mut counters = BTreeMap::new();
    counters.insert("seed".into(), opts.seed);
    counters.insert("drops".into(), opts.drops as u64);
    counters.insert("base_stations".into(), dep.len() as u64);
    Ok(curve_from_counts("empirical", &sorted, &covered, opts.drops as u64, params, counters, f64::NAN))
}

/// Coverage of users dropped uniformly over a fixed deployment, each served
/// by its nearest base station with fresh fading per drop.
pub fn empirical_coverage(
    dep: &Deployment,
    ch: &ChannelModel,
    thresholds_db: &[f64],
    opts: &EmpiricalOptions,
) -> Result<CoverageCurve> {
    if !(opts.margin > 0.0 && opts.margin <= 1.0) {
        return Err(Error::InvalidParameter(format!("margin {} must lie in (0, 1]", opts.margin)));
    }
    let region = dep.bounds().shrink(opts.margin);
    empirical_run(dep, ch, opts, thresholds_db, |rng| region.sample_uniform(rng))
}

/// Same as [`empirical_coverage`] with every drop at `user`.
pub fn empirical_coverage_at(
    dep: &Deployment,
    ch: &ChannelModel,
    user: (f64, f64),
    thresholds_db: &[f64],
    opts: &EmpiricalOptions,
) -> Result<CoverageCurve> {
    empirical_run(dep, ch, opts, thresholds_db, |_| user)
}
