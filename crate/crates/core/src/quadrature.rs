//! Numerical integration and scalar maximization.
//!
//! * adaptive Gauss–Kronrod (10/21 points) on finite intervals, with a
//!   rational map for semi-infinite ranges;
//! * Gauss–Laguerre rules for expectations over an exponential law, built
//!   once per size by the Golub–Welsch eigenvalue method;
//! * golden-section maximization bracketed by a coarse scan.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

// Kronrod abscissae; odd indices are the 10-point Gauss abscissae.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_652_708_917_270,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Stopping rule for the adaptive integrator.
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel, max_intervals: 4000 }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-12, 1e-10)
    }
}

/// Value and error estimate of an integral.
#[derive(Clone, Copy, Debug, Default)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod_segment<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(center - dx)? + f(center + dx)?;
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    if !value.is_finite() {
        return Err(Error::Integration(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    Ok(Segment { a, b, value, error })
}

/// Adaptive Gauss–Kronrod integration of a fallible integrand over `[a, b]`.
pub fn try_integrate<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Quadrature>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(Quadrature::default());
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Integration(format!("infinite limits [{a}, {b}]")));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut segments = vec![kronrod_segment(&mut f, lo, hi)?];
    let mut evaluations = 21;
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= tol.abs.max(tol.rel * value.abs()) {
            return Ok(Quadrature { value: sign * value, error, evaluations });
        }
        if segments.len() >= tol.max_intervals {
            return Err(Error::Integration(format!(
                "no convergence after {} subintervals (estimate {value:.6e} ± {error:.2e})",
                segments.len()
            )));
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            return Err(Error::Integration("interval underflow".into()));
        }
        segments.push(kronrod_segment(&mut f, seg.a, mid)?);
        segments.push(kronrod_segment(&mut f, mid, seg.b)?);
        evaluations += 42;
    }
}

/// Adaptive integration of an infallible integrand.
pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Quadrature>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(|x| Ok(f(x)), a, b, tol)
}

/// Integral over `[a, ∞)` through the map `x = a + t / (1 − t)`.
pub fn try_integrate_to_infinity<F>(mut f: F, a: f64, tol: Tolerance) -> Result<Quadrature>
where
    F: FnMut(f64) -> Result<f64>,
{
    try_integrate(
        |t| {
            if t >= 1.0 {
                return Ok(0.0);
            }
            let u = 1.0 - t;
            let x = a + t / u;
            let v = f(x)?;
            if v == 0.0 {
                Ok(0.0)
            } else {
                Ok(v / (u * u))
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Gauss–Laguerre rule for `∫₀^∞ f(x) e^(−x) dx`.
#[derive(Debug)]
pub struct LaguerreRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LaguerreRule {
    fn build(n: usize) -> Self {
        let mut jacobi = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            jacobi[(i, i)] = (2 * i + 1) as f64;
            if i + 1 < n {
                jacobi[(i, i + 1)] = (i + 1) as f64;
                jacobi[(i + 1, i)] = (i + 1) as f64;
            }
        }
        let eig = SymmetricEigen::new(jacobi);
        let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        nodes.sort_by(f64::total_cmp);
        // Eigenvector components lose all relative accuracy in the far tail,
        // so weights come from w = x / ((n + 1)² L_{n+1}(x)²) instead.
        let weights = nodes
            .iter_mut()
            .map(|x| {
                for _ in 0..3 {
                    let (ln, ln1, _) = laguerre_scaled(n, *x);
                    let deriv = n as f64 * (ln - ln1) / *x;
                    if deriv != 0.0 {
                        *x -= ln / deriv;
                    }
                }
                let (_, _, (next, scale)) = laguerre_scaled(n, *x);
                let log_w = x.ln() - 2.0 * ((n + 1) as f64).ln() - 2.0 * (next.abs().ln() + scale);
                log_w.exp()
            })
            .collect();
        Self { nodes, weights }
    }

    /// Shared rule with `n` nodes, built on first use.
    pub fn get(n: usize) -> Arc<LaguerreRule> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<LaguerreRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry(n)
            .or_insert_with(|| Arc::new(LaguerreRule::build(n)))
            .clone()
    }

    pub fn apply<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            if *w == 0.0 {
                continue;
            }
            sum += w * f(*x)?;
        }
        Ok(sum)
    }
}

/// `L_n(x)` and `L_{n−1}(x)` sharing one scale factor, plus `L_{n+1}(x)` as a
/// mantissa with its natural-log scale.
fn laguerre_scaled(n: usize, x: f64) -> (f64, f64, (f64, f64)) {
    let mut prev = 1.0;
    let mut cur = 1.0 - x;
    let mut log_scale = 0.0;
    let mut at_n = (cur, prev);
    for k in 1..=n {
        if k == n {
            at_n = (cur, prev);
        }
        let next = ((2 * k + 1) as f64 - x) * cur / (k + 1) as f64 - k as f64 * prev / (k + 1) as f64;
        prev = cur;
        cur = next;
        if cur.abs() > 1e100 {
            prev *= 1e-100;
            cur *= 1e-100;
            log_scale += 100.0 * std::f64::consts::LN_10;
        }
    }
    (at_n.0, at_n.1, (cur, log_scale))
}

/// Location and value of a maximum.
#[derive(Clone, Copy, Debug)]
pub struct Maximum {
    pub arg: f64,
    pub value: f64,
}

/// Maximizes `f` on `[lo, hi]`: a uniform scan of `scan` points picks the
/// bracket, golden-section search refines it to `xtol`.
pub fn maximize<F>(mut f: F, lo: f64, hi: f64, scan: usize, xtol: f64) -> Result<Maximum>
where
    F: FnMut(f64) -> f64,
{
    if !(hi > lo) || scan < 3 {
        return Err(Error::Optimization(format!("bad bracket [{lo}, {hi}]")));
    }
    let step = (hi - lo) / (scan - 1) as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..scan {
        let v = f(lo + step * i as f64);
        if v.is_nan() {
            return Err(Error::Optimization(format!("NaN objective at {}", lo + step * i as f64)));
        }
        if v > best.1 {
            best = (i, v);
        }
    }
    let mut a = lo + step * best.0.saturating_sub(1) as f64;
    let mut b = (lo + step * (best.0 + 1) as f64).min(hi);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..500 {
        if (b - a).abs() <= xtol * (1.0 + c.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let (arg, value) = if fc > fd { (c, fc) } else { (d, fd) };
    if best.1 > value {
        let arg = lo + step * best.0 as f64;
        return Ok(Maximum { arg, value: best.1 });
    }
    Ok(Maximum { arg, value })
}
