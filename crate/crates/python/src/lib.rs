//! Python bindings for the coverage toolkit.
//!
//! ```python
//! import stablecov
//! p = stablecov.StableParams(0.6, 0.25, 0.25)
//! stablecov.coverage("analytic-thm2", p, thresholds_db=[-10, 0, 10])
//! ```

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use stablecov_core::analytic::{
    self, default_threshold_grid, CoverageQuery, GeometryWindow, IntegrationOptions, Window,
};
use stablecov_core::kernels::ChannelModel;
use stablecov_core::montecarlo::{simulate_coverage, SimConfig};
use stablecov_core::rng::stream;
use stablecov_core::stable::{self, SelfSimParams};
use stablecov_core::{fitting, selfsim, Error};

fn py_err(e: Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

/// Totally skewed α-stable law `S(α, 1, σ, μ)`.
#[pyclass(name = "StableParams", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyStableParams {
    inner: stable::StableParams,
}

#[pymethods]
impl PyStableParams {
    #[new]
    #[pyo3(signature = (alpha, sigma, mu, allow_alpha_one=false))]
    fn new(alpha: f64, sigma: f64, mu: f64, allow_alpha_one: bool) -> PyResult<Self> {
        let inner = stable::StableParams::with_alpha_one(alpha, sigma, mu, allow_alpha_one).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }
    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta()
    }
    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.sigma()
    }
    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu()
    }

    /// `E[exp(−sλ)]`.
    fn laplace(&self, s: f64) -> PyResult<f64> {
        stable::laplace(&self.inner, s).map_err(py_err)
    }

    /// Characteristic function as `(re, im)`.
    fn char_fn(&self, omega: f64) -> (f64, f64) {
        let c = stable::char_fn(&self.inner, omega);
        (c.re, c.im)
    }

    /// `n` raw variates from stream 0 of `seed`.
    #[pyo3(signature = (n, seed=0))]
    fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        stable::sample_variates(&self.inner, &mut stream(seed, 0), n)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!("StableParams(alpha={}, sigma={}, mu={})", p.alpha(), p.sigma(), p.mu())
    }
}

/// Coverage curve `[(t_db, p_c), …]` for one of `analytic-thm2`,
/// `analytic-a-inf`, `analytic-r-inf`, `hppp`, `upper-bound`, `simulate`.
#[pyfunction]
#[pyo3(signature = (mode, params, thresholds_db=None, delta=4.0, zeta=1.0, n0=1.0, hurst=0.9, zoom=2.0,
                    radius_r=40.0, lam=None, r_min=0.0, realizations=15000, seed=0))]
#[allow(clippy::too_many_arguments)]
fn coverage(
    py: Python<'_>,
    mode: &str,
    params: &PyStableParams,
    thresholds_db: Option<Vec<f64>>,
    delta: f64,
    zeta: f64,
    n0: f64,
    hurst: f64,
    zoom: f64,
    radius_r: f64,
    lam: Option<f64>,
    r_min: f64,
    realizations: usize,
    seed: u64,
) -> PyResult<Vec<(f64, f64)>> {
    let t = thresholds_db.unwrap_or_else(default_threshold_grid);
    let p = params.inner;
    let ch = ChannelModel::new(delta, zeta, n0).map_err(py_err)?;
    let opts = IntegrationOptions { r_min, ..IntegrationOptions::default() };
    let finite = || -> PyResult<GeometryWindow> {
        let ss = SelfSimParams::new(hurst, zoom).map_err(py_err)?;
        GeometryWindow::new(radius_r, ss).map_err(py_err)
    };
    let query = |w: Window| CoverageQuery::new(p, ch, w, t.clone()).map_err(py_err);
    let curve = match mode {
        "analytic-thm2" => {
            let q = query(Window::Finite(finite()?))?;
            py.detach(|| analytic::coverage_thm2_with(&q, &opts))
        }
        "analytic-a-inf" => {
            let q = query(Window::ZoomInfinite { inner_radius: radius_r })?;
            py.detach(|| analytic::coverage_a_inf_with(&q, &opts))
        }
        "analytic-r-inf" => {
            let q = query(Window::RadiusInfinite)?;
            py.detach(|| analytic::coverage_r_inf_with(&q, &opts))
        }
        "upper-bound" => {
            let q = query(Window::RadiusInfinite)?;
            py.detach(|| analytic::upper_bound_thm4(&q))
        }
        "hppp" => py.detach(|| analytic::coverage_hppp_with(lam.unwrap_or(p.mu()), &ch, &t, &opts)),
        "simulate" => {
            let mut cfg = SimConfig::new(p, finite()?, ch, seed);
            cfg.realizations = realizations;
            py.detach(|| simulate_coverage(&cfg, &t))
        }
        other => return Err(PyValueError::new_err(format!("unknown mode `{other}`"))),
    }
    .map_err(py_err)?;
    Ok(curve.points.iter().map(|c| (c.t_db, c.p_c)).collect())
}

/// Result of a stable fit.
#[pyclass(name = "FitResult", frozen, get_all)]
struct PyFitResult {
    alpha: f64,
    beta: f64,
    sigma: f64,
    mu: f64,
    poisson_lambda: f64,
    ecf_rms: f64,
    alpha_unidentifiable: bool,
}

#[pymethods]
impl PyFitResult {
    fn params(&self) -> PyResult<PyStableParams> {
        PyStableParams::new(self.alpha, self.sigma, self.mu, false)
    }

    fn __repr__(&self) -> String {
        format!(
            "FitResult(alpha={}, sigma={}, mu={}, poisson_lambda={})",
            self.alpha, self.sigma, self.mu, self.poisson_lambda
        )
    }
}

/// Fits `S(α, 1, σ, μ)` to density samples.
#[pyfunction]
fn fit_stable(py: Python<'_>, samples: Vec<f64>) -> PyResult<PyFitResult> {
    let r = py.detach(|| fitting::fit_stable_samples(&samples)).map_err(py_err)?;
    Ok(PyFitResult {
        alpha: r.stable.alpha(),
        beta: r.stable.beta(),
        sigma: r.stable.sigma(),
        mu: r.stable.mu(),
        poisson_lambda: r.poisson_lambda,
        ecf_rms: r.diagnostics.ecf_rms,
        alpha_unidentifiable: r.diagnostics.alpha_unidentifiable,
    })
}

#[pyclass(name = "HurstEstimate", frozen, get_all)]
struct PyHurstEstimate {
    h: f64,
    raw_h: f64,
    method: String,
    r2: f64,
    points: Vec<(f64, f64)>,
    low_confidence: bool,
}

#[pymethods]
impl PyHurstEstimate {
    fn __repr__(&self) -> String {
        format!("HurstEstimate(h={}, method={}, r2={})", self.h, self.method, self.r2)
    }
}

/// Hurst exponent of a series by `"rs"` or `"vt"`.
#[pyfunction]
#[pyo3(signature = (series, method="rs"))]
fn hurst(py: Python<'_>, series: Vec<f64>, method: &str) -> PyResult<PyHurstEstimate> {
    let m: selfsim::HurstMethod = method.parse().map_err(py_err)?;
    let e = py.detach(|| selfsim::hurst(m, &series)).map_err(py_err)?;
    Ok(PyHurstEstimate {
        h: e.h,
        raw_h: e.raw_h,
        method: format!("{:?}", e.method),
        r2: e.r2,
        points: e.points,
        low_confidence: e.low_confidence,
    })
}

/// Unit-variance fractional Gaussian noise.
#[pyfunction]
#[pyo3(signature = (n, hurst, seed=0))]
fn fgn(n: usize, hurst: f64, seed: u64) -> PyResult<Vec<f64>> {
    selfsim::fgn(n, hurst, &mut stream(seed, 0)).map_err(py_err)
}

#[pymodule]
fn stablecov(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStableParams>()?;
    m.add_class::<PyFitResult>()?;
    m.add_class::<PyHurstEstimate>()?;
    m.add_function(wrap_pyfunction!(coverage, m)?)?;
    m.add_function(wrap_pyfunction!(fit_stable, m)?)?;
    m.add_function(wrap_pyfunction!(hurst, m)?)?;
    m.add_function(wrap_pyfunction!(fgn, m)?)?;
    Ok(())
}
