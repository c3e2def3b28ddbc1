//! Fitting `S(α, 1, σ, μ)` and a Poisson intensity to grid-partitioned
//! density samples.
//!
//! The stable fit is a quantile estimator in the style of McCulloch with β
//! pinned at 1, followed by a Nelder–Mead refinement of the empirical
//! characteristic-function error. The quantile tables are built once by
//! simulation from the sampler in [`crate::stable`].

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use argmin::core::{CostFunction, Error as ArgminError, Executor, State};
use argmin::solver::neldermead::NelderMead;
use num_complex::Complex64;
use serde::Serialize;

use crate::deployment::{Bounds, Deployment};
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::stable::{char_fn, draw, StableParams, ALPHA_ONE_BAND};

/// Minimum number of samples for [`fit_stable`].
pub const MIN_FIT_SAMPLES: usize = 100;
/// Number of ω points in the characteristic-function diagnostics.
pub const ECF_POINTS: usize = 32;

/// Densities (stations per m²) on a regular grid of square cells.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityField {
    pub samples: Vec<f64>,
    pub cell_side: f64,
    pub grid_dims: (usize, usize),
}

/// Partitions the deployment region into square cells of side `cell_side`
/// anchored at its lower-left corner and returns one density per cell, empty
/// cells included. A disc region is gridded over its inscribed square.
/// Stations in the leftover strip past the last whole cell are ignored.
pub fn grid_density(dep: &Deployment, cell_side: f64) -> Result<DensityField> {
    if !(cell_side > 0.0) || !cell_side.is_finite() {
        return Err(Error::InvalidParameter(format!("cell side {cell_side} must be finite and > 0")));
    }
    let (x0, y0, w, h) = match dep.bounds() {
        Bounds::Rect { x0, y0, x1, y1 } => (x0, y0, x1 - x0, y1 - y0),
        Bounds::Disc { cx, cy, radius } => {
            let half = radius / std::f64::consts::SQRT_2;
            (cx - half, cy - half, 2.0 * half, 2.0 * half)
        }
    };
    let count = |extent: f64| (extent / cell_side + 1e-9).floor() as usize;
    let (rows, cols) = (count(h), count(w));
    if rows * cols < 4 {
        return Err(Error::InvalidParameter(format!(
            "region of {w} × {h} m holds {rows} × {cols} cells of side {cell_side}; need at least 4"
        )));
    }
    let mut counts = vec![0u64; rows * cols];
    for &(x, y) in dep.points() {
        let (u, v) = ((x - x0) / cell_side, (y - y0) / cell_side);
        if u < 0.0 || v < 0.0 {
            continue;
        }
        // a station on the far edge belongs to the last cell
        let col = if (u - cols as f64).abs() < 1e-9 { cols - 1 } else { u.floor() as usize };
        let row = if (v - rows as f64).abs() < 1e-9 { rows - 1 } else { v.floor() as usize };
        if row < rows && col < cols {
            counts[row * cols + col] += 1;
        }
    }
    let area = cell_side * cell_side;
    let samples = counts.into_iter().map(|c| c as f64 / area).collect();
    Ok(DensityField { samples, cell_side, grid_dims: (rows, cols) })
}

/// Sample-mean intensity.
pub fn fit_poisson(field: &DensityField) -> f64 {
    if field.samples.is_empty() {
        return 0.0;
    }
    field.samples.iter().sum::<f64>() / field.samples.len() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitDiagnostics {
    pub samples: usize,
    /// `(α, σ, μ)` from the quantile stage, before refinement.
    pub quantile_estimate: (f64, f64, f64),
    /// RMS distance to the empirical characteristic function at the
    /// quantile estimate and at the returned estimate.
    pub ecf_rms_quantile: f64,
    pub ecf_rms: f64,
    /// The ω grid, in the units of the samples' reciprocal.
    pub ecf_omegas: Vec<f64>,
    pub refinement_iterations: u64,
    /// Set when the samples carry no information about α.
    pub alpha_unidentifiable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub stable: StableParams,
    pub poisson_lambda: f64,
    pub diagnostics: FitDiagnostics,
}

/// Standardized quantiles of `S(α, 1, 1, 0)` on a grid of α.
struct QuantileTable {
    alpha: Vec<f64>,
    /// `(q95 − q05) / (q75 − q25)`.
    nu: Vec<f64>,
    iqr: Vec<f64>,
    /// Median in the shifted parameterization `median + tan(πα/2)`, which
    /// is continuous through α = 1.
    median0: Vec<f64>,
}

const TABLE_SEED: u64 = 0xfa11_7ab1e;
const TABLE_DRAWS: usize = 200_000;

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

impl QuantileTable {
    fn get() -> &'static QuantileTable {
        static TABLE: OnceLock<QuantileTable> = OnceLock::new();
        TABLE.get_or_init(QuantileTable::build)
    }

    fn build() -> Self {
        use rayon::prelude::*;
        let alpha: Vec<f64> = (2..=39).map(|i| i as f64 * 0.05).filter(|a| (a - 1.0).abs() > 1e-9).collect();
        let rows: Vec<(f64, f64, f64)> = alpha
            .par_iter()
            .enumerate()
            .map(|(i, &a)| {
                let p = StableParams::new(a, 1.0, 0.0).expect("table alpha is valid");
                let mut rng = stream(TABLE_SEED, i as u64);
                let mut z: Vec<f64> = (0..TABLE_DRAWS).map(|_| draw(&p, &mut rng)).collect();
                z.sort_by(f64::total_cmp);
                let q = |p| quantile(&z, p);
                let iqr = q(0.75) - q(0.25);
                ((q(0.95) - q(0.05)) / iqr, iqr, q(0.5) + (FRAC_PI_2 * a).tan())
            })
            .collect();
        let mut nu: Vec<f64> = rows.iter().map(|r| r.0).collect();
        // ν falls with α; enforce it against sampling noise
        for i in 1..nu.len() {
            nu[i] = nu[i].min(nu[i - 1] * (1.0 - 1e-9));
        }
        Self { alpha, nu, iqr: rows.iter().map(|r| r.1).collect(), median0: rows.iter().map(|r| r.2).collect() }
    }

    /// α for an observed ν, linear in `ln ν` and clamped to the table.
    fn alpha_for(&self, nu: f64) -> f64 {
        let ln = nu.ln();
        let last = self.nu.len() - 1;
        if ln >= self.nu[0].ln() {
            return self.alpha[0];
        }
        if ln <= self.nu[last].ln() {
            return self.alpha[last];
        }
        let i = self.nu.iter().position(|&v| v.ln() < ln).unwrap() - 1;
        let (l0, l1) = (self.nu[i].ln(), self.nu[i + 1].ln());
        self.alpha[i] + (ln - l0) / (l1 - l0) * (self.alpha[i + 1] - self.alpha[i])
    }

    fn interp(&self, col: &[f64], a: f64) -> f64 {
        let last = self.alpha.len() - 1;
        let i = match self.alpha.iter().position(|&x| x > a) {
            Some(0) => 0,
            Some(i) => i - 1,
            None => last - 1,
        };
        let t = (a - self.alpha[i]) / (self.alpha[i + 1] - self.alpha[i]);
        col[i] + t * (col[i + 1] - col[i])
    }
}

fn avoid_alpha_one(a: f64) -> f64 {
    if (a - 1.0).abs() < 1e-3 {
        if a < 1.0 {
            1.0 - 1e-3
        } else {
            1.0 + 1e-3
        }
    } else {
        a
    }
}

/// `(α, σ, μ)` of standardized data from its quantiles.
fn quantile_stage(sorted: &[f64]) -> (f64, f64, f64) {
    let t = QuantileTable::get();
    let q = |p| quantile(sorted, p);
    let nu = (q(0.95) - q(0.05)) / (q(0.75) - q(0.25));
    let alpha = avoid_alpha_one(t.alpha_for(nu));
    let sigma = (q(0.75) - q(0.25)) / t.interp(&t.iqr, alpha);
    let median_z = t.interp(&t.median0, alpha) - (FRAC_PI_2 * alpha).tan();
    (alpha, sigma, q(0.5) - sigma * median_z)
}

/// Largest move in α the refinement may make from the quantile estimate.
const REFINE_ALPHA_WINDOW: f64 = 0.3;

struct EcfProblem {
    omegas: Vec<f64>,
    empirical: Vec<Complex64>,
    alpha_start: f64,
}

impl EcfProblem {
    fn new(y: &[f64], omegas: Vec<f64>, alpha_start: f64) -> Self {
        let n = y.len() as f64;
        let empirical = omegas
            .iter()
            .map(|&w| {
                let (s, c) = y.iter().fold((0.0, 0.0), |(s, c), &v| {
                    let (sn, cs) = (w * v).sin_cos();
                    (s + sn, c + cs)
                });
                Complex64::new(c / n, s / n)
            })
            .collect();
        Self { omegas, empirical, alpha_start }
    }

    fn rms(&self, p: &StableParams) -> f64 {
        let sum: f64 = self.omegas.iter().zip(&self.empirical).map(|(&w, e)| (char_fn(p, w) - e).norm_sqr()).sum();
        (sum / self.omegas.len() as f64).sqrt()
    }
}

/// Optimizer coordinates `(α, ln σ, μ₀)` with the continuous location
/// `μ₀ = μ + σ tan(πα/2)`.
fn from_coords(x: &[f64]) -> Option<StableParams> {
    let (a, sigma) = (x[0], x[1].exp());
    if !(a > 0.1 && a <= 2.0) || (a - 1.0).abs() < ALPHA_ONE_BAND || !sigma.is_finite() {
        return None;
    }
    StableParams::new(a, sigma, x[2] - sigma * (FRAC_PI_2 * a).tan()).ok()
}

fn to_coords(p: &StableParams) -> Vec<f64> {
    vec![p.alpha(), p.sigma().ln(), p.mu() + p.sigma() * (FRAC_PI_2 * p.alpha()).tan()]
}

impl CostFunction for EcfProblem {
    type Param = Vec<f64>;
    type Output = f64;
    fn cost(&self, x: &Self::Param) -> std::result::Result<f64, ArgminError> {
        if (x[0] - self.alpha_start).abs() > REFINE_ALPHA_WINDOW {
            return Ok(1e6);
        }
        Ok(from_coords(x).map_or(1e6, |p| self.rms(&p)))
    }
}

/// Fits `S(α, 1, σ, μ)` to the field's samples.
pub fn fit_stable(field: &DensityField) -> Result<FitResult> {
    fit_stable_samples(&field.samples)
}

/// [`fit_stable`] on a bare sample.
pub fn fit_stable_samples(samples: &[f64]) -> Result<FitResult> {
    let n = samples.len();
    if n < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples { need: MIN_FIT_SAMPLES, got: n });
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("samples must be finite".into()));
    }
    let poisson_lambda = samples.iter().sum::<f64>() / n as f64;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[n - 1]);
    if lo == hi {
        // a point mass: any α fits, σ is zero
        let stable = StableParams::new(2.0, 0.0, lo)?;
        return Ok(FitResult {
            stable,
            poisson_lambda,
            diagnostics: FitDiagnostics {
                samples: n,
                quantile_estimate: (f64::NAN, 0.0, lo),
                ecf_rms_quantile: 0.0,
                ecf_rms: 0.0,
                ecf_omegas: Vec::new(),
                refinement_iterations: 0,
                alpha_unidentifiable: true,
            },
        });
    }
    let center = quantile(&sorted, 0.5);
    let spread = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    if !(spread > 0.0) {
        return Err(Error::DegenerateSpread(format!(
            "interquartile range is zero while samples span [{lo}, {hi}]"
        )));
    }
    // everything below runs on standardized data, so the fit is scale-equivariant
    let y: Vec<f64> = samples.iter().map(|v| (v - center) / spread).collect();
    let ys: Vec<f64> = sorted.iter().map(|v| (v - center) / spread).collect();
    let (qa, qs, qm) = quantile_stage(&ys);
    let start = StableParams::new(qa, qs, qm)?;

    let omegas: Vec<f64> = (1..=ECF_POINTS).map(|j| 0.25 * j as f64).collect();
    let problem = EcfProblem::new(&y, omegas.clone(), qa);
    let rms_start = problem.rms(&start);

    let x0 = to_coords(&start);
    let simplex = vec![
        x0.clone(),
        vec![avoid_alpha_one((x0[0] + 0.05).min(2.0)), x0[1], x0[2]],
        vec![x0[0], x0[1] + 0.1, x0[2]],
        vec![x0[0], x0[1], x0[2] + 0.1 * qs.max(1e-3)],
    ];
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-10)
        .map_err(|e| Error::Optimization(e.to_string()))?;
    let res = Executor::new(problem, solver)
        .configure(|s| s.max_iters(400))
        .run()
        .map_err(|e| Error::Optimization(e.to_string()))?;
    let problem = &res.problem.problem.as_ref().expect("executor returns its problem");
    let iterations = res.state().get_iter();
    let refined = res.state().get_best_param().and_then(|x| from_coords(x)).filter(|p| problem.rms(p) <= rms_start);
    let best = refined.unwrap_or(start);
    let rms = problem.rms(&best);

    let unscale = |p: &StableParams| (p.alpha(), p.sigma() * spread, center + p.mu() * spread);
    let (a, s, m) = unscale(&best);
    let q = unscale(&start);
    Ok(FitResult {
        stable: StableParams::new(a, s, m)?,
        poisson_lambda,
        diagnostics: FitDiagnostics {
            samples: n,
            quantile_estimate: q,
            ecf_rms_quantile: rms_start,
            ecf_rms: rms,
            ecf_omegas: omegas.iter().map(|w| w / spread).collect(),
            refinement_iterations: iterations,
            alpha_unidentifiable: false,
        },
    })
}
