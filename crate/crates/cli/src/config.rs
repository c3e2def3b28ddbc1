//! Run configuration: built-in defaults, an optional TOML file, then flags.

use std::path::Path;

use serde::Deserialize;
use stablecov_core::analytic::default_threshold_grid;

/// Keys accepted in the configuration file. Every key is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub alpha: Option<f64>,
    pub sigma: Option<f64>,
    pub mu: Option<f64>,
    pub delta: Option<f64>,
    pub zeta: Option<f64>,
    pub n0: Option<f64>,
    pub hurst: Option<f64>,
    pub zoom: Option<f64>,
    pub radius_r: Option<f64>,
    pub lambda: Option<f64>,
    pub thresholds_db: Option<Vec<f64>>,
    pub realizations: Option<usize>,
    pub drops: Option<usize>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("config {}: {}", path.display(), e.message()))
    }
}

/// Model parameters after merging.
#[derive(Clone, Debug)]
pub struct Model {
    pub alpha: f64,
    pub sigma: f64,
    pub mu: f64,
    pub delta: f64,
    pub zeta: f64,
    pub n0: f64,
    pub hurst: f64,
    pub zoom: f64,
    pub radius_r: f64,
}

impl Default for Model {
    fn default() -> Self {
        Self { alpha: 0.6, sigma: 0.25, mu: 0.25, delta: 4.0, zeta: 1.0, n0: 1.0, hurst: 0.9, zoom: 2.0, radius_r: 40.0 }
    }
}

impl Model {
    /// Applies `file` then `flags`; later sources win.
    pub fn merge(file: &FileConfig, flags: &FileConfig) -> Self {
        let mut m = Self::default();
        for src in [file, flags] {
            let set = |dst: &mut f64, v: Option<f64>| {
                if let Some(v) = v {
                    *dst = v;
                }
            };
            set(&mut m.alpha, src.alpha);
            set(&mut m.sigma, src.sigma);
            set(&mut m.mu, src.mu);
            set(&mut m.delta, src.delta);
            set(&mut m.zeta, src.zeta);
            set(&mut m.n0, src.n0);
            set(&mut m.hurst, src.hurst);
            set(&mut m.zoom, src.zoom);
            set(&mut m.radius_r, src.radius_r);
        }
        m
    }
}

pub fn pick<T: Clone>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Thresholds from flag, file, or the default 13-point grid, checked to be
/// non-empty and sorted.
pub fn thresholds(flag: Option<Vec<f64>>, file: Option<Vec<f64>>) -> Result<Vec<f64>, String> {
    let t = pick(flag, file, default_threshold_grid());
    if t.is_empty() {
        return Err("threshold grid is empty".into());
    }
    if t.iter().any(|v| !v.is_finite()) {
        return Err("threshold grid contains a non-finite value".into());
    }
    if t.windows(2).any(|w| w[1] <= w[0]) {
        return Err("threshold grid must be strictly increasing".into());
    }
    Ok(t)
}

/// Parses `-10,0,10`; an empty string gives an empty list.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().map_err(|_| format!("`{p}` is not a number")))
        .collect()
}
