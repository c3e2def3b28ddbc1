//! Coverage probability of the α-stable doubly stochastic model.
//!
//! Every formula is a single radial integral over the distance `r` to the
//! nearest base station. The mixture over the random density enters through
//! the Laplace transform `Ψ(y) = E[e^(−λy)]` and its slope
//! `E[λ e^(−λy)] = Ψ(y) w(y)`, with `w(y) = kαy^(α−1) + μ` and
//! `k = σ^α / cos(πα/2)`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{xi, xi_limit_b, ChannelModel};
use crate::quadrature::{self, maximize, Tolerance};
use crate::special::gamma_complete;
use crate::stable::{laplace_outer, DensitySample, SelfSimParams, StableParams};

/// Inner radius `R` together with the self-similar zoom of the outer ring.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeometryWindow {
    inner_radius: f64,
    selfsim: SelfSimParams,
}

impl GeometryWindow {
    pub fn new(inner_radius: f64, selfsim: SelfSimParams) -> Result<Self> {
        if !(inner_radius > 0.0) || !inner_radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "inner radius R = {inner_radius} must be finite and > 0"
            )));
        }
        Ok(Self { inner_radius, selfsim })
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }
    pub fn selfsim(&self) -> SelfSimParams {
        self.selfsim
    }
    pub fn outer_radius(&self) -> f64 {
        self.inner_radius * self.selfsim.zoom()
    }
}

/// Interference region of a coverage query.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Window {
    /// Inner disc of radius `R` plus the zoomed annulus `[R, aR]`.
    Finite(GeometryWindow),
    /// `a → ∞`: the outer annulus no longer contributes.
    ZoomInfinite { inner_radius: f64 },
    /// `R → ∞`: interference from the whole plane.
    RadiusInfinite,
}

impl Window {
    fn inner_radius(&self) -> Option<f64> {
        match self {
            Window::Finite(g) => Some(g.inner_radius),
            Window::ZoomInfinite { inner_radius } => Some(*inner_radius),
            Window::RadiusInfinite => None,
        }
    }
}

/// Parameters and SINR thresholds (dB) of a coverage evaluation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageQuery {
    pub stable: StableParams,
    pub channel: ChannelModel,
    pub window: Window,
    pub thresholds_db: Vec<f64>,
}

impl CoverageQuery {
    pub fn new(stable: StableParams, channel: ChannelModel, window: Window, thresholds_db: Vec<f64>) -> Result<Self> {
        if thresholds_db.is_empty() {
            return Err(Error::InvalidParameter("threshold list is empty".into()));
        }
        if let Some(t) = thresholds_db.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter(format!("threshold {t} dB is not finite")));
        }
        if let Window::ZoomInfinite { inner_radius } = window {
            if !(inner_radius > 0.0) || !inner_radius.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "inner radius R = {inner_radius} must be finite and > 0"
                )));
            }
        }
        Ok(Self { stable, channel, window, thresholds_db })
    }

    fn sorted_thresholds(&self) -> Vec<f64> {
        let mut t = self.thresholds_db.clone();
        t.sort_by(f64::total_cmp);
        t
    }
}

/// The 13-point grid −10, −7.5, …, 20 dB.
pub fn default_threshold_grid() -> Vec<f64> {
    (0..13).map(|i| -10.0 + 2.5 * i as f64).collect()
}

/// `10^(t/10)`.
pub fn db_to_linear(t_db: f64) -> f64 {
    10f64.powf(t_db / 10.0)
}

/// Controls for the radial integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegrationOptions {
    /// Relative tolerance of the adaptive Gauss–Kronrod scheme.
    pub rel_tol: f64,
    /// Probability mass of the nearest-distance law allowed beyond `r_max`.
    pub tail_mass: f64,
    /// Lower end of the radial integral. Zero gives the exact integral; a
    /// positive value excludes serving distances below it.
    pub r_min: f64,
    pub max_intervals: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-6, tail_mass: 1e-12, r_min: 0.0, max_intervals: 4000 }
    }
}

impl IntegrationOptions {
    fn tolerance(&self) -> Tolerance {
        Tolerance { abs: self.tail_mass, rel: self.rel_tol, max_intervals: self.max_intervals }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.tail_mass > 0.0 && self.tail_mass < 1.0) || !(self.r_min >= 0.0) {
            return Err(Error::InvalidParameter(format!("invalid integration options {self:?}")));
        }
        Ok(())
    }
}

/// One `(T, p_c)` sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t_db: f64,
    pub p_c: f64,
}

/// Per-threshold numerical diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointDiagnostics {
    pub t_db: f64,
    /// Value before clamping to `[0, 1]`; for bounds, the uncapped bound.
    pub raw: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    /// Upper end of the radial integral.
    pub r_max: f64,
    /// Probability that the nearest base station lies beyond `r_max`.
    pub truncated_mass: f64,
    pub flags: Vec<String>,
}

/// Query echo and diagnostics attached to a curve.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CurveMeta {
    pub method: String,
    pub params: BTreeMap<String, f64>,
    /// Integer settings and event counts (seed, realizations, clamps, …).
    pub counters: BTreeMap<String, u64>,
    pub diagnostics: Vec<PointDiagnostics>,
}

/// Coverage probability against threshold, sorted by `t_db`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CoverageCurve {
    pub points: Vec<CurvePoint>,
    pub meta: CurveMeta,
}

impl CoverageCurve {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.p_c).collect()
    }

    /// `p_c` at the given threshold, if present.
    pub fn at(&self, t_db: f64) -> Option<f64> {
        self.points.iter().find(|p| p.t_db == t_db).map(|p| p.p_c)
    }
}

pub(crate) fn echo(q: &CoverageQuery, opts: &IntegrationOptions) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    m.insert("alpha".into(), q.stable.alpha());
    m.insert("sigma".into(), q.stable.sigma());
    m.insert("mu".into(), q.stable.mu());
    m.insert("delta".into(), q.channel.delta());
    m.insert("zeta".into(), q.channel.zeta());
    m.insert("n0".into(), q.channel.n0());
    match q.window {
        Window::Finite(g) => {
            m.insert("radius_r".into(), g.inner_radius);
            m.insert("hurst".into(), g.selfsim.hurst());
            m.insert("zoom".into(), g.selfsim.zoom());
        }
        Window::ZoomInfinite { inner_radius } => {
            m.insert("radius_r".into(), inner_radius);
        }
        Window::RadiusInfinite => {}
    }
    m.insert("rel_tol".into(), opts.rel_tol);
    m.insert("r_min".into(), opts.r_min);
    m
}

/// `Ψ(y)` and `w(y) = −Ψ'(y)/Ψ(y)` for the density law.
fn laplace_and_rate(p: &StableParams, y: f64) -> (f64, f64) {
    let (s, mu) = (p.sigma(), p.mu());
    if p.is_alpha_one() {
        if y == 0.0 {
            return (1.0, f64::INFINITY);
        }
        let psi = (2.0 * s / PI * y * y.ln() - mu * y).exp();
        return (psi, mu - 2.0 * s / PI * (y.ln() + 1.0));
    }
    let a = p.alpha();
    let k = p.laplace_coefficient();
    if k == 0.0 {
        return ((-mu * y).exp(), mu);
    }
    let psi = (-k * y.powf(a) - mu * y).exp();
    (psi, k * a * y.powf(a - 1.0) + mu)
}

/// Distance to the nearest base station: `p_d(r) = 2πr Ψ(πr²) w(πr²)`.
///
/// At `r = 0` the limit is returned: 0 for `α > 1/2`, `+∞` for `α < 1/2`.
pub fn pdf_nearest(r: f64, stable: &StableParams) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("distance r = {r} must be ≥ 0")));
    }
    if r == 0.0 {
        let a = stable.alpha();
        let k = stable.laplace_coefficient();
        return Ok(if stable.sigma() == 0.0 || stable.is_alpha_one() || a > 0.5 {
            0.0
        } else if a == 0.5 {
            2.0 * a * k * PI.powf(a)
        } else {
            f64::INFINITY
        });
    }
    let y = PI * r * r;
    let (psi, w) = laplace_and_rate(stable, y);
    Ok(2.0 * PI * r * psi * w)
}

/// `P(no base station within r) = Ψ(πr²)`.
pub fn void_probability(r: f64, stable: &StableParams) -> f64 {
    laplace_and_rate(stable, PI * r * r).0
}

/// Laplace transform of the interference at the origin from base stations
/// beyond `r`, given the inner density: the inner disc is conditioned on
/// `λ`, the outer annulus is averaged over its own density law.
pub fn laplace_interference(
    s: f64,
    r: f64,
    lambda_inner: DensitySample,
    stable: &StableParams,
    window: &GeometryWindow,
    ch: &ChannelModel,
) -> Result<f64> {
    let big_r = window.inner_radius;
    if !(r > 0.0 && r <= big_r) {
        return Err(Error::Domain(format!("distance r = {r} must lie in (0, R = {big_r}]")));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    let inner = xi(s, r, big_r, ch)?;
    let outer = xi(s, big_r, window.outer_radius(), ch)?;
    Ok((-lambda_inner.value() * inner).exp() * laplace_outer(stable, &window.selfsim, outer)?)
}

/// Smallest `r` with `Ψ(πr²) ≤ tail`, by bisection on `r`.
fn envelope_radius(stable: &StableParams, tail: f64) -> Result<f64> {
    let mut hi = 1.0;
    let mut steps = 0;
    while void_probability(hi, stable) > tail {
        hi *= 2.0;
        steps += 1;
        if steps > 200 || !hi.is_finite() {
            return Err(Error::Integration(
                "nearest-distance law does not decay; the density law has no usable Laplace transform".into(),
            ));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if void_probability(mid, stable) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(hi)
}

fn check_formula_params(stable: &StableParams) -> Result<()> {
    if stable.mu() < 0.0 {
        return Err(Error::InvalidParameter(format!("mu = {} must be ≥ 0 for coverage formulas", stable.mu())));
    }
    if stable.mu() == 0.0 && stable.sigma() == 0.0 {
        return Err(Error::InvalidParameter("sigma = mu = 0 describes an empty network".into()));
    }
    Ok(())
}

struct RadialResult {
    value: f64,
    error: f64,
    evaluations: usize,
    r_max: f64,
    truncated_mass: f64,
}

/// Integrates `f` over `(r_min, min(r_env, cap)]`.
fn radial_integral<F>(
    stable: &StableParams,
    cap: Option<f64>,
    opts: &IntegrationOptions,
    f: F,
) -> Result<RadialResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let r_env = envelope_radius(stable, opts.tail_mass)?;
    let r_max = cap.map_or(r_env, |c| c.min(r_env));
    let truncated_mass = void_probability(r_max, stable);
    if opts.r_min >= r_max {
        return Ok(RadialResult { value: 0.0, error: 0.0, evaluations: 0, r_max, truncated_mass });
    }
    let q = quadrature::try_integrate(f, opts.r_min, r_max, opts.tolerance())?;
    Ok(RadialResult { value: q.value, error: q.error, evaluations: q.evaluations, r_max, truncated_mass })
}

fn assemble<F>(q: &CoverageQuery, opts: &IntegrationOptions, method: &str, eval: F) -> Result<CoverageCurve>
where
    F: Fn(f64) -> Result<(RadialResult, Vec<String>)> + Sync,
{
    opts.validate()?;
    let thresholds = q.sorted_thresholds();
    let results: Vec<Result<(RadialResult, Vec<String>)>> = thresholds.par_iter().map(|&t| eval(t)).collect();
    let mut points = Vec::with_capacity(thresholds.len());
    let mut diagnostics = Vec::with_capacity(thresholds.len());
    for (t_db, res) in thresholds.iter().zip(results) {
        let (r, mut flags) = res?;
        if !(0.0..=1.0).contains(&r.value) {
            flags.push("clamped".into());
        }
        points.push(CurvePoint { t_db: *t_db, p_c: r.value.clamp(0.0, 1.0) });
        diagnostics.push(PointDiagnostics {
            t_db: *t_db,
            raw: r.value,
            error_estimate: r.error,
            evaluations: r.evaluations,
            r_max: r.r_max,
            truncated_mass: r.truncated_mass,
            flags,
        });
    }
    Ok(CoverageCurve { points, meta: CurveMeta { method: method.into(), params: echo(q, opts), counters: BTreeMap::new(), diagnostics } })
}

fn window_flags(r: &RadialResult, cap: Option<f64>) -> Vec<String> {
    match cap {
        Some(c) if r.r_max >= c && r.truncated_mass > 0.0 => vec!["nearest_may_lie_beyond_r".into()],
        _ => Vec::new(),
    }
}

/// Coverage with a finite inner disc and the zoomed outer annulus.
pub fn coverage_thm2(q: &CoverageQuery) -> Result<CoverageCurve> {
    coverage_thm2_with(q, &IntegrationOptions::default())
}

pub fn coverage_thm2_with(q: &CoverageQuery, opts: &IntegrationOptions) -> Result<CoverageCurve> {
    let Window::Finite(win) = q.window else {
        return Err(Error::InvalidParameter("this formula needs a finite window".into()));
    };
    check_formula_params(&q.stable)?;
    let (stable, ch) = (q.stable, q.channel);
    let big_r = win.inner_radius;
    assemble(q, opts, "analytic-thm2", |t_db| {
        let t = db_to_linear(t_db);
        let res = radial_integral(&stable, Some(big_r), opts, |r| {
            if r == 0.0 {
                return Ok(0.0);
            }
            let s = ch.zeta() * t * r.powf(ch.delta());
            let x = xi(s, r, big_r, &ch)? + PI * r * r;
            let outer = laplace_outer(&stable, &win.selfsim, xi(s, big_r, win.outer_radius(), &ch)?)?;
            let (psi, w) = laplace_and_rate(&stable, x);
            Ok(2.0 * PI * r * psi * w * outer * (-s * ch.n0()).exp())
        })?;
        let flags = window_flags(&res, Some(big_r));
        Ok((res, flags))
    })
}

/// Coverage in the `a → ∞` limit: the inner disc of radius `R` only.
pub fn coverage_a_inf(q: &CoverageQuery) -> Result<CoverageCurve> {
    coverage_a_inf_with(q, &IntegrationOptions::default())
}

pub fn coverage_a_inf_with(q: &CoverageQuery, opts: &IntegrationOptions) -> Result<CoverageCurve> {
    let Some(big_r) = q.window.inner_radius() else {
        return Err(Error::InvalidParameter("this formula needs a finite inner radius".into()));
    };
    check_formula_params(&q.stable)?;
    let (stable, ch) = (q.stable, q.channel);
    assemble(q, opts, "analytic-a-inf", |t_db| {
        let t = db_to_linear(t_db);
        let res = radial_integral(&stable, Some(big_r), opts, |r| {
            if r == 0.0 {
                return Ok(0.0);
            }
            let s = ch.zeta() * t * r.powf(ch.delta());
            let x = xi(s, r, big_r, &ch)? + PI * r * r;
            let (psi, w) = laplace_and_rate(&stable, x);
            Ok(2.0 * PI * r * psi * w * (-s * ch.n0()).exp())
        })?;
        let flags = window_flags(&res, Some(big_r));
        Ok((res, flags))
    })
}

/// Coverage in the `R → ∞` limit, through the kernel `B(r)`.
pub fn coverage_r_inf(q: &CoverageQuery) -> Result<CoverageCurve> {
    coverage_r_inf_with(q, &IntegrationOptions::default())
}

pub fn coverage_r_inf_with(q: &CoverageQuery, opts: &IntegrationOptions) -> Result<CoverageCurve> {
    check_formula_params(&q.stable)?;
    let (stable, ch) = (q.stable, q.channel);
    assemble(q, opts, "analytic-r-inf", |t_db| {
        let t = db_to_linear(t_db);
        let res = radial_integral(&stable, None, opts, |r| {
            if r == 0.0 {
                return Ok(0.0);
            }
            let s = ch.zeta() * t * r.powf(ch.delta());
            let b = xi_limit_b(s, r, &ch)?;
            let (psi, w) = laplace_and_rate(&stable, b);
            Ok(2.0 * PI * r * psi * w * (-s * ch.n0()).exp())
        })?;
        Ok((res, Vec::new()))
    })
}

/// Coverage of a homogeneous PPP of density `lambda` over the whole plane.
pub fn coverage_hppp(lambda: f64, ch: &ChannelModel, thresholds_db: &[f64]) -> Result<CoverageCurve> {
    coverage_hppp_with(lambda, ch, thresholds_db, &IntegrationOptions::default())
}

pub fn coverage_hppp_with(
    lambda: f64,
    ch: &ChannelModel,
    thresholds_db: &[f64],
    opts: &IntegrationOptions,
) -> Result<CoverageCurve> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("density lambda = {lambda} must be finite and > 0")));
    }
    let stable = StableParams::new(0.5, 0.0, lambda)?;
    let q = CoverageQuery::new(stable, *ch, Window::RadiusInfinite, thresholds_db.to_vec())?;
    let ch = *ch;
    let mut curve = assemble(&q, opts, "hppp", |t_db| {
        let t = db_to_linear(t_db);
        let res = radial_integral(&stable, None, opts, |r| {
            if r == 0.0 {
                return Ok(0.0);
            }
            let s = ch.zeta() * t * r.powf(ch.delta());
            let b = xi_limit_b(s, r, &ch)?;
            Ok(2.0 * PI * lambda * r * (-lambda * b - s * ch.n0()).exp())
        })?;
        Ok((res, Vec::new()))
    })?;
    for key in ["alpha", "sigma", "mu"] {
        curve.meta.params.remove(key);
    }
    curve.meta.params.insert("lambda".into(), lambda);
    Ok(curve)
}

/// Parts of the upper bound at one threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundParts {
    /// `max_r 2πμ C(r)`.
    pub peak: f64,
    /// Maximizer of `C(r)`.
    pub argmax: f64,
    /// `∫_0^∞ A(r) dr`, `+∞` when divergent.
    pub a_integral: f64,
    /// `peak · a_integral`, uncapped.
    pub bound: f64,
    pub divergent: bool,
}

/// The upper bound `max_r(2πμ C(r)) · ∫ A(r) dr` at one threshold, with
/// `A = e^(−kB^α)[kα/μ · B^(α−1) + 1]` and `C(r) = r e^(−ζTr^δN₀ − μB)`.
///
/// `∫ A dr` diverges for `α ≤ 1/2` (the integrand behaves as `r^(2α−2)` at
/// the origin) and for `σ = 0` (`A ≡ 1`); both are reported as divergent.
pub fn upper_bound_parts(stable: &StableParams, ch: &ChannelModel, t_db: f64) -> Result<BoundParts> {
    if stable.is_alpha_one() {
        return Err(Error::InvalidParameter("the upper bound is defined for alpha ≠ 1 only".into()));
    }
    let mu = stable.mu();
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!("the upper bound needs mu > 0, got {mu}")));
    }
    let t = db_to_linear(t_db);
    let d = ch.delta();
    // B(r) = r² B(1) at fixed T
    let b1 = xi_limit_b(ch.zeta() * t, 1.0, ch)?;
    let n0 = ch.n0();
    let log_c = |r: f64| r.ln() - ch.zeta() * t * r.powf(d) * n0 - mu * b1 * r * r;
    let r_hi = (60.0 / (mu * b1)).sqrt();
    let m = maximize(|r| if r > 0.0 { log_c(r) } else { f64::NEG_INFINITY }, 0.0, r_hi, 64, 1e-10)?;
    let peak = 2.0 * PI * mu * m.value.exp();

    let a = stable.alpha();
    let k = stable.laplace_coefficient();
    if k == 0.0 || a <= 0.5 {
        return Ok(BoundParts { peak, argmax: m.arg, a_integral: f64::INFINITY, bound: f64::INFINITY, divergent: true });
    }
    if k < 0.0 {
        return Err(Error::Integration("A(r) grows without bound for alpha > 1".into()));
    }
    // r = u^m with m = 1/(2α − 1) removes the r^(2α−2) singularity
    let expo = 1.0 / (2.0 * a - 1.0);
    let q = quadrature::try_integrate_to_infinity(
        |u| {
            if u == 0.0 {
                return Ok(expo * k * a / mu * b1.powf(a - 1.0));
            }
            let r = u.powf(expo);
            let b = b1 * r * r;
            let damp = (-k * b.powf(a)).exp();
            let jac = expo * u.powf(expo - 1.0);
            Ok(damp * (expo * k * a / mu * b1.powf(a - 1.0) + jac))
        },
        0.0,
        Tolerance::new(0.0, 1e-12),
    )?;
    Ok(BoundParts { peak, argmax: m.arg, a_integral: q.value, bound: peak * q.value, divergent: false })
}

/// Closed-form upper bound on the `R → ∞` coverage. `p_c` is capped at 1;
/// the uncapped bound is in the diagnostics (`raw`), `+∞` when divergent.
pub fn upper_bound_thm4(q: &CoverageQuery) -> Result<CoverageCurve> {
    if q.window != Window::RadiusInfinite {
        return Err(Error::InvalidParameter("the upper bound applies to the R → ∞ window".into()));
    }
    check_formula_params(&q.stable)?;
    let thresholds = q.sorted_thresholds();
    let parts: Vec<Result<BoundParts>> =
        thresholds.par_iter().map(|&t| upper_bound_parts(&q.stable, &q.channel, t)).collect();
    let mut points = Vec::new();
    let mut diagnostics = Vec::new();
    for (t_db, p) in thresholds.iter().zip(parts) {
        let p = p?;
        let mut flags = Vec::new();
        if p.divergent {
            flags.push("bound_divergent".into());
        }
        if p.bound > 1.0 {
            flags.push("capped".into());
        }
        points.push(CurvePoint { t_db: *t_db, p_c: p.bound.min(1.0) });
        diagnostics.push(PointDiagnostics {
            t_db: *t_db,
            raw: p.bound,
            error_estimate: 0.0,
            evaluations: 0,
            r_max: p.argmax,
            truncated_mass: 0.0,
            flags,
        });
    }
    let opts = IntegrationOptions::default();
    Ok(CoverageCurve { points, meta: CurveMeta {
            method: "upper-bound".into(),
            params: echo(q, &opts),
            counters: BTreeMap::new(),
            diagnostics,
        } })
}

/// Value of the `B`-domain integral `D = ∫_0^∞ A dB`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DValue {
    pub value: f64,
    pub divergent: bool,
}

/// `D = ∫_0^∞ e^(−kB^α)[kα/μ · B^(α−1) + 1] dB` for `α ∈ (0, 1)`.
///
/// The integrand depends on the channel and threshold only through `B`, so
/// neither appears here. With `B = (v/k)^(1/α)` the integral becomes
/// `∫_0^∞ e^(−v) [1/μ + k^(−1/α) v^(1/α − 1) / α] dv`.
pub fn d_integral(stable: &StableParams) -> Result<DValue> {
    let a = stable.alpha();
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameter(format!("D is defined for alpha in (0, 1), got {a}")));
    }
    let mu = stable.mu();
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!("D needs mu > 0, got {mu}")));
    }
    let k = stable.laplace_coefficient();
    if k == 0.0 {
        return Ok(DValue { value: f64::INFINITY, divergent: true });
    }
    let scale = k.powf(-1.0 / a) / a;
    let q = quadrature::try_integrate_to_infinity(
        |v| Ok((-v).exp() * (1.0 / mu + scale * v.powf(1.0 / a - 1.0))),
        0.0,
        Tolerance::new(0.0, 1e-12),
    )?;
    Ok(DValue { value: q.value, divergent: false })
}

/// `D = 1/μ + Γ(1 + 1/α) k^(−1/α)`.
pub fn d_closed_form(stable: &StableParams) -> Result<f64> {
    let a = stable.alpha();
    let k = stable.laplace_coefficient();
    Ok(1.0 / stable.mu() + gamma_complete(1.0 + 1.0 / a)? * k.powf(-1.0 / a))
}

/// `cos(πα/2)`, exposed for callers building their own expressions.
pub fn stable_cosine(alpha: f64) -> f64 {
    (FRAC_PI_2 * alpha).cos()
}
