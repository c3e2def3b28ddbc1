//! Totally skewed (β = 1) α-stable laws in the S1 parameterization, used as
//! the distribution of the base-station density.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::error::{Error, Result};

/// Half-width of the band around α = 1 where the α ≠ 1 formulas are refused.
pub const ALPHA_ONE_BAND: f64 = 1e-6;

/// Parameters of `S(α, β = 1, σ, μ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StableParams {
    alpha: f64,
    beta: f64,
    sigma: f64,
    mu: f64,
}

impl StableParams {
    /// Validated constructor; α must stay clear of 1.
    pub fn new(alpha: f64, sigma: f64, mu: f64) -> Result<Self> {
        Self::with_alpha_one(alpha, sigma, mu, false)
    }

    /// Like [`StableParams::new`], but accepts exactly `α = 1` when
    /// `allow_alpha_one` is set. The α = 1 formulas are reproduced verbatim
    /// and are not validated.
    pub fn with_alpha_one(alpha: f64, sigma: f64, mu: f64, allow_alpha_one: bool) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, 2]")));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma = {sigma} must be finite and ≥ 0")));
        }
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("mu = {mu} must be finite")));
        }
        if (alpha - 1.0).abs() < ALPHA_ONE_BAND {
            if alpha != 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "alpha = {alpha} is within {ALPHA_ONE_BAND:e} of 1"
                )));
            }
            if !allow_alpha_one {
                return Err(Error::AlphaOneDisabled);
            }
        }
        Ok(Self { alpha, beta: 1.0, sigma, mu })
    }

    /// Skewness other than 1 is rejected.
    pub fn with_beta(alpha: f64, beta: f64, sigma: f64, mu: f64) -> Result<Self> {
        if beta != 1.0 {
            return Err(Error::InvalidParameter(format!("beta = {beta}; only beta = 1 is supported")));
        }
        Self::new(alpha, sigma, mu)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn is_alpha_one(&self) -> bool {
        self.alpha == 1.0
    }

    /// `σ^α / cos(πα/2)`, the coefficient of `s^α` in the Laplace exponent.
    pub fn laplace_coefficient(&self) -> f64 {
        self.sigma.powf(self.alpha) / (FRAC_PI_2 * self.alpha).cos()
    }
}

/// Hurst parameter `H ∈ [0, 1)` and zoom factor `a > 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SelfSimParams {
    hurst: f64,
    zoom: f64,
}

impl SelfSimParams {
    pub fn new(hurst: f64, zoom: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&hurst) {
            return Err(Error::InvalidParameter(format!("hurst = {hurst} must lie in [0, 1)")));
        }
        if !(zoom > 1.0) || !zoom.is_finite() {
            return Err(Error::InvalidParameter(format!("zoom = {zoom} must be finite and > 1")));
        }
        Ok(Self { hurst, zoom })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }
    pub fn zoom(&self) -> f64 {
        self.zoom
    }

    /// `a^(H−2)`: ratio of the outer density to the inner one.
    pub fn density_factor(&self) -> f64 {
        self.zoom.powf(self.hurst - 2.0)
    }
}

/// A non-negative spatial density (BS per unit area).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct DensitySample(f64);

impl DensitySample {
    /// Clamps negative values to zero.
    pub fn clamped(value: f64) -> Self {
        Self(value.max(0.0))
    }
    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Characteristic function `E[exp(iωX)]`.
pub fn char_fn(params: &StableParams, omega: f64) -> Complex64 {
    if omega == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let a = params.alpha;
    let s = params.sigma;
    let sign = omega.signum();
    let w = omega.abs();
    let exponent = if params.is_alpha_one() {
        Complex64::new(-s * w, -s * w * 2.0 / PI * sign * w.ln())
    } else {
        let scale = s.powf(a) * w.powf(a);
        Complex64::new(-scale, scale * params.beta * sign * (FRAC_PI_2 * a).tan())
    };
    (exponent + Complex64::new(0.0, params.mu * omega)).exp()
}

/// Laplace transform `E[exp(−sλ)]`.
pub fn laplace(params: &StableParams, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("Laplace argument s = {s} must be ≥ 0")));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    if params.is_alpha_one() {
        return Ok((2.0 * params.sigma / PI * s * s.ln() - params.mu * s).exp());
    }
    Ok((-params.laplace_coefficient() * s.powf(params.alpha) - params.mu * s).exp())
}

/// Parameters of the outer-ring density `λ_S = λ · a^(H−2)`.
pub fn scale_outer(params: &StableParams, ss: &SelfSimParams) -> StableParams {
    let f = ss.density_factor();
    StableParams { sigma: params.sigma * f, mu: params.mu * f, ..*params }
}

/// Laplace transform of the outer-ring density written directly in terms of
/// the inner parameters and `(H, a)`.
pub fn laplace_outer(params: &StableParams, ss: &SelfSimParams, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("Laplace argument s = {s} must be ≥ 0")));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    let f = ss.density_factor();
    if params.is_alpha_one() {
        let log_a = ss.zoom.ln();
        let e = 2.0 * params.sigma * f / PI * s * (s.ln() + (ss.hurst - 2.0) * log_a) - s * f * params.mu;
        return Ok(e.exp());
    }
    let a = params.alpha;
    Ok((-params.laplace_coefficient() * f.powf(a) * s.powf(a) - s * f * params.mu).exp())
}

fn open_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return PI * (u - 0.5);
        }
    }
}

/// One variate by the Chambers–Mallows–Stuck construction (β = 1).
pub fn draw<R: Rng + ?Sized>(params: &StableParams, rng: &mut R) -> f64 {
    if params.sigma == 0.0 {
        return params.mu;
    }
    let a = params.alpha;
    let v = open_angle(rng);
    let w: f64 = Exp1.sample(rng);
    if params.is_alpha_one() {
        let half = FRAC_PI_2 + v;
        let x = 2.0 / PI * (half * v.tan() - (FRAC_PI_2 * w * v.cos() / half).ln());
        return params.sigma * x + 2.0 / PI * params.sigma * params.sigma.ln() + params.mu;
    }
    let t = (FRAC_PI_2 * a).tan();
    let shift = t.atan() / a;
    let scale = (1.0 + t * t).powf(0.5 / a);
    let x = scale * (a * (v + shift)).sin() / v.cos().powf(1.0 / a)
        * ((v - a * (v + shift)).cos() / w).powf((1.0 - a) / a);
    params.sigma * x + params.mu
}

/// `n` raw (unclamped) variates.
pub fn sample_variates<R: Rng + ?Sized>(params: &StableParams, rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| draw(params, rng)).collect()
}

/// Density draws with the number of negative variates that were clamped.
#[derive(Clone, Debug)]
pub struct DensityDraws {
    pub samples: Vec<DensitySample>,
    pub clamped: usize,
}

/// `n` density draws, each clamped to be non-negative.
pub fn sample<R: Rng + ?Sized>(params: &StableParams, rng: &mut R, n: usize) -> DensityDraws {
    let mut clamped = 0;
    let samples = (0..n)
        .map(|_| {
            let x = draw(params, rng);
            if x < 0.0 {
                clamped += 1;
            }
            DensitySample::clamped(x)
        })
        .collect();
    DensityDraws { samples, clamped }
}
