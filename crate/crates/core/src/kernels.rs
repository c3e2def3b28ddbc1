//! Interference kernels Θ, Λ and Ξ, the `R → ∞` kernel `B`, and
//! expectations over exponential power fading.
//!
//! With `k = s·g` the interference integral over the annulus `[b, c]` is
//! `2∫_b^c (1 − e^(−k v^(−δ))) v dv = Λ − Θ`, where integration by parts
//! turns the remainder into an incomplete gamma interval of order `1 − 2/δ`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{self, LaguerreRule, Tolerance};
use crate::special::gamma_interval;

/// Path loss and fading parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChannelModel {
    delta: f64,
    zeta: f64,
    n0: f64,
}

impl ChannelModel {
    pub fn new(delta: f64, zeta: f64, n0: f64) -> Result<Self> {
        if !(delta >= 2.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("delta = {delta} must be finite and ≥ 2")));
        }
        if !(zeta > 0.0) || !zeta.is_finite() {
            return Err(Error::InvalidParameter(format!("zeta = {zeta} must be finite and > 0")));
        }
        if !(n0 >= 0.0) || !n0.is_finite() {
            return Err(Error::InvalidParameter(format!("n0 = {n0} must be finite and ≥ 0")));
        }
        Ok(Self { delta, zeta, n0 })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn zeta(&self) -> f64 {
        self.zeta
    }
    pub fn n0(&self) -> f64 {
        self.n0
    }

    /// Same channel with a different noise power.
    pub fn with_noise(&self, n0: f64) -> Result<Self> {
        Self::new(self.delta, self.zeta, n0)
    }
}

const LAGUERRE_START: usize = 64;
const LAGUERRE_MAX: usize = 512;
const FADING_RTOL: f64 = 1e-10;

/// `E_g[f(g)]` for `g ~ Exponential(ζ)`.
///
/// Gauss–Laguerre on `u = ζg`, doubling the node count until two successive
/// rules agree to `1e-10`; adaptive Gauss–Kronrod if they never do.
pub fn expect_fading<F>(zeta: f64, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut n = LAGUERRE_START;
    let mut previous = LaguerreRule::get(n).apply(|u| f(u / zeta))?;
    while n < LAGUERRE_MAX {
        n *= 2;
        let current = LaguerreRule::get(n).apply(|u| f(u / zeta))?;
        if (current - previous).abs() <= FADING_RTOL * current.abs().max(f64::MIN_POSITIVE) {
            return Ok(current);
        }
        previous = current;
    }
    let q = quadrature::try_integrate_to_infinity(
        |u| Ok((-u).exp() * f(u / zeta)?),
        0.0,
        Tolerance::new(0.0, FADING_RTOL),
    )?;
    Ok(q.value)
}

fn check_annulus(b: f64, c: f64) -> Result<()> {
    if !(b > 0.0) {
        return Err(Error::Domain(format!("inner radius b = {b} must be > 0")));
    }
    if !(c >= b) {
        return Err(Error::Domain(format!("outer radius c = {c} must be ≥ b = {b}")));
    }
    Ok(())
}

/// `Θ(s, b, c) = (sg)^(2/δ) [Γ(1 − 2/δ, sg b^(−δ)) − Γ(1 − 2/δ, sg c^(−δ))]`
/// for one fading realization `g`.
pub fn theta(s: f64, b: f64, c: f64, g: f64, ch: &ChannelModel) -> Result<f64> {
    check_annulus(b, c)?;
    let k = s * g;
    if k == 0.0 || b == c {
        return Ok(0.0);
    }
    let d = ch.delta;
    let lo = k * c.powf(-d);
    let hi = k * b.powf(-d);
    Ok(-k.powf(2.0 / d) * gamma_interval(1.0 - 2.0 / d, lo, hi)?)
}

/// `Λ(s, b, c) = c²[1 − e^(−sg c^(−δ))] − b²[1 − e^(−sg b^(−δ))]`.
pub fn lambda_fn(s: f64, b: f64, c: f64, g: f64, ch: &ChannelModel) -> Result<f64> {
    check_annulus(b, c)?;
    let k = s * g;
    if k == 0.0 || b == c {
        return Ok(0.0);
    }
    let d = ch.delta;
    Ok(-c * c * (-k * c.powf(-d)).exp_m1() + b * b * (-k * b.powf(-d)).exp_m1())
}

/// `Λ − Θ` for `k = s·g`, with a two-term expansion when `k b^(−δ)` is tiny
/// and the gamma form would lose digits to cancellation.
fn annulus_integral(k: f64, b: f64, c: f64, ch: &ChannelModel) -> Result<f64> {
    if k == 0.0 || b == c {
        return Ok(0.0);
    }
    let d = ch.delta;
    if k * b.powf(-d) < 1e-6 {
        let first = if d == 2.0 {
            2.0 * (c / b).ln()
        } else {
            2.0 * (b.powf(2.0 - d) - c.powf(2.0 - d)) / (d - 2.0)
        };
        let second = (b.powf(2.0 - 2.0 * d) - c.powf(2.0 - 2.0 * d)) / (2.0 * d - 2.0);
        return Ok(k * first - k * k * second);
    }
    let lam = -c * c * (-k * c.powf(-d)).exp_m1() + b * b * (-k * b.powf(-d)).exp_m1();
    let gam = k.powf(2.0 / d) * gamma_interval(1.0 - 2.0 / d, k * c.powf(-d), k * b.powf(-d))?;
    Ok(lam + gam)
}

/// Mean fading attenuation `E_g[1 − e^(−t g)] = t / (ζ + t)` for
/// `g ~ Exponential(ζ)`.
fn mean_attenuation(t: f64, zeta: f64) -> f64 {
    t / (zeta + t)
}

const RADIAL_TOL: Tolerance = Tolerance { abs: 0.0, rel: 1e-12, max_intervals: 4000 };

/// `Ξ(s, b, c) = π E_g[Λ − Θ]`, the mean interference exponent of the
/// annulus `[b, c]` per unit density.
///
/// The fading expectation is taken inside the radial integral, where it is
/// exact, leaving `2π ∫_b^c s v / (ζ v^δ + s) dv` on a log-radius grid.
pub fn xi(s: f64, b: f64, c: f64, ch: &ChannelModel) -> Result<f64> {
    check_annulus(b, c)?;
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("xi argument s = {s} must be ≥ 0")));
    }
    if s == 0.0 || b == c {
        return Ok(0.0);
    }
    let d = ch.delta;
    let q = quadrature::try_integrate(
        |y| {
            let v = y.exp();
            Ok(v * v * mean_attenuation(s * v.powf(-d), ch.zeta))
        },
        b.ln(),
        c.ln(),
        RADIAL_TOL,
    )?;
    Ok((2.0 * PI * q.value).max(0.0))
}

/// `Ξ` evaluated literally: `Λ − Θ` through incomplete gamma functions for
/// each fading gain, averaged by Gauss–Laguerre quadrature.
pub fn xi_by_fading_quadrature(s: f64, b: f64, c: f64, ch: &ChannelModel) -> Result<f64> {
    check_annulus(b, c)?;
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("xi argument s = {s} must be ≥ 0")));
    }
    if s == 0.0 || b == c {
        return Ok(0.0);
    }
    let e = expect_fading(ch.zeta, |g| annulus_integral(s * g, b, c, ch))?;
    Ok((PI * e).max(0.0))
}

/// `B(r) = lim_{R→∞} Ξ(s, r, R) + πr²` with `s = ζTr^δ`.
///
/// Equal to `πr² [1 + 2∫_1^∞ T w / (w^δ + T) dw]`, which is how it is
/// computed. Requires `δ > 2`; at `δ = 2` the far field diverges.
pub fn xi_limit_b(s: f64, r: f64, ch: &ChannelModel) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("distance r = {r} must be > 0")));
    }
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("xi limit argument s = {s} must be ≥ 0")));
    }
    let d = ch.delta;
    if d <= 2.0 {
        return Err(Error::Domain("the R → ∞ kernel diverges for delta = 2".into()));
    }
    let area = PI * r * r;
    if s == 0.0 {
        return Ok(area);
    }
    Ok(area * (1.0 + far_field(s * r.powf(-d) / ch.zeta, d)?))
}

/// `2∫_1^∞ t w / (w^δ + t) dw`.
fn far_field(t: f64, d: f64) -> Result<f64> {
    let q = quadrature::try_integrate_to_infinity(
        |y| {
            // t w² / (w^δ + t) with w = e^y, arranged to avoid overflow
            Ok(t * ((2.0 - d) * y).exp() / (1.0 + t * (-d * y).exp()))
        },
        0.0,
        RADIAL_TOL,
    )?;
    Ok(2.0 * q.value)
}
