//! Checks against independent closed forms and simulation oracles.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use stablecov_core::analytic::{
    coverage_hppp, coverage_r_inf, coverage_thm2, d_integral, default_threshold_grid, upper_bound_thm4,
    CoverageQuery, GeometryWindow, Window,
};
use stablecov_core::deployment::{Bounds, Deployment};
use stablecov_core::fitting::{fit_poisson, fit_stable_samples, grid_density};
use stablecov_core::kernels::ChannelModel;
use stablecov_core::montecarlo::{empirical_coverage_at, sample_deployment, simulate_coverage, EmpiricalOptions, SimConfig};
use stablecov_core::rng::stream;
use stablecov_core::selfsim::{fgn, hurst_rs, hurst_vt, radial_counts};
use stablecov_core::stable::{sample_variates, SelfSimParams, StableParams};

fn defaults() -> (StableParams, ChannelModel, GeometryWindow) {
    (
        StableParams::new(0.6, 0.25, 0.25).unwrap(),
        ChannelModel::new(4.0, 1.0, 1.0).unwrap(),
        GeometryWindow::new(40.0, SelfSimParams::new(0.9, 2.0).unwrap()).unwrap(),
    )
}

fn hppp_points<R: Rng>(lambda: f64, side: f64, rng: &mut R) -> Vec<(f64, f64)> {
    let n = Poisson::new(lambda * side * side).unwrap().sample(rng) as usize;
    (0..n).map(|_| (side * rng.random::<f64>(), side * rng.random::<f64>())).collect()
}

#[test]
fn fixed_density_limit_equals_homogeneous_model() {
    let ch = ChannelModel::new(4.0, 1.0, 1.0).unwrap();
    let grid = default_threshold_grid();
    let fixed = StableParams::new(0.6, 0.0, 0.25).unwrap();
    let limit = coverage_r_inf(&CoverageQuery::new(fixed, ch, Window::RadiusInfinite, grid.clone()).unwrap()).unwrap();
    let hppp = coverage_hppp(0.25, &ch, &grid).unwrap();
    for (a, b) in limit.values().iter().zip(hppp.values()) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
}

#[test]
fn bound_dominates_and_tightens() {
    let (stable, ch, _) = defaults();
    let grid = default_threshold_grid();
    let q = CoverageQuery::new(stable, ch, Window::RadiusInfinite, grid.clone()).unwrap();
    let exact = coverage_r_inf(&q).unwrap();
    let bound = upper_bound_thm4(&q).unwrap();
    for (e, d) in exact.meta.diagnostics.iter().zip(&bound.meta.diagnostics) {
        assert!(d.raw >= e.raw, "T = {}: bound {} < exact {}", e.t_db, d.raw, e.raw);
    }
    let gap = |t: f64| {
        let i = grid.iter().position(|&g| g == t).unwrap();
        (bound.meta.diagnostics[i].raw - exact.meta.diagnostics[i].raw) / exact.meta.diagnostics[i].raw
    };
    assert!(gap(20.0) < gap(10.0) && gap(10.0) < gap(0.0));
}

#[test]
fn d_falls_with_sigma_in_finite_differences() {
    for a in [0.3, 0.6, 0.9] {
        for s in [0.1, 1.0, 10.0] {
            let h = 1e-4 * s;
            let d = |sigma: f64| d_integral(&StableParams::new(a, sigma, 0.25).unwrap()).unwrap().value;
            let slope = (d(s + h) - d(s - h)) / (2.0 * h);
            assert!(slope < 0.0, "alpha {a}, sigma {s}: slope {slope}");
        }
    }
}

#[test]
fn simulation_agrees_with_analytic_at_defaults() {
    let (stable, ch, win) = defaults();
    let t = [-10.0, 0.0, 10.0];
    let exact = coverage_thm2(&CoverageQuery::new(stable, ch, Window::Finite(win), t.to_vec()).unwrap()).unwrap();
    let cfg = SimConfig::new(stable, win, ch, 2024);
    let sim = simulate_coverage(&cfg, &t).unwrap();
    let n = cfg.realizations as f64;
    for (p, q) in exact.values().iter().zip(sim.values()) {
        let tol = 3.0 * (p * (1.0 - p) / n).sqrt() + 0.005;
        assert!((p - q).abs() <= tol, "analytic {p} vs simulated {q}");
    }
}

#[test]
fn mixed_poisson_counts_are_overdispersed() {
    let (stable, ch, win) = defaults();
    let cfg = SimConfig::new(stable, GeometryWindow::new(2.0, win.selfsim()).unwrap(), ch, 5);
    // the heaviest density draws exceed the point budget; dropping them
    // only understates the variance
    let counts: Vec<f64> = (0..2000)
        .filter_map(|i| match sample_deployment(&cfg, &mut stream(5, i)) {
            Ok(dep) => Some(dep.points().iter().filter(|(x, y)| x.hypot(*y) < 2.0).count() as f64),
            Err(e) => {
                assert!(e.is_numerical());
                None
            }
        })
        .collect();
    assert!(counts.len() > 1900);
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(var > 1.5 * mean, "mean {mean}, variance {var}");
}

#[test]
fn annulus_counts_match_ring_areas() {
    let (lambda, w, rings, side) = (0.5, 1.0, 16, 40.0);
    let reps = 1000;
    let mut sum = vec![0.0; rings];
    let mut sum2 = vec![0.0; rings];
    for i in 0..reps {
        let mut rng = stream(77, i);
        let dep = Deployment::new(hppp_points(lambda, side, &mut rng), Bounds::rect(0.0, 0.0, side, side).unwrap()).unwrap();
        let s = radial_counts(&dep, (20.0, 20.0), w, rings).unwrap();
        assert!(!s.truncated);
        for (k, &v) in s.values.iter().enumerate() {
            sum[k] += v as f64;
            sum2[k] += (v * v) as f64;
        }
    }
    for k in 0..rings {
        let mean = sum[k] / reps as f64;
        let se = ((sum2[k] / reps as f64 - mean * mean) / reps as f64).sqrt();
        let want = lambda * PI * w * w * (2 * k + 1) as f64;
        assert!((mean - want).abs() <= 3.0 * se + 1e-12, "ring {k}: {mean} vs {want} (se {se})");
    }
}

#[test]
fn grid_density_mean_is_unbiased() {
    let (lambda, side) = (0.3, 20.0);
    let reps = 1000;
    let means: Vec<f64> = (0..reps)
        .map(|i| {
            let mut rng = stream(31, i);
            let dep = Deployment::new(hppp_points(lambda, side, &mut rng), Bounds::rect(0.0, 0.0, side, side).unwrap()).unwrap();
            fit_poisson(&grid_density(&dep, 2.0).unwrap())
        })
        .collect();
    let m = means.iter().sum::<f64>() / reps as f64;
    let se = (lambda / (side * side) / reps as f64).sqrt();
    assert!((m - lambda).abs() <= 3.0 * se, "{m} vs {lambda}");
}

#[test]
fn poisson_fit_on_sparse_field() {
    let (lambda, side) = (3e-6, 20_000.0);
    let mut rng = stream(8, 0);
    let dep = Deployment::new(hppp_points(lambda, side, &mut rng), Bounds::rect(0.0, 0.0, side, side).unwrap()).unwrap();
    let est = fit_poisson(&grid_density(&dep, 1000.0).unwrap());
    let se = (lambda / (side * side)).sqrt();
    assert!((est - lambda).abs() <= 3.0 * se, "{est} vs {lambda}");
}

fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn fitted_law_reproduces_the_sample() {
    let p = StableParams::new(0.6, 0.25, 0.25).unwrap();
    let n = 10_000;
    let mut pass = 0;
    for seed in 0..20 {
        let x = sample_variates(&p, &mut stream(seed, 0), n);
        let fit = fit_stable_samples(&x).unwrap().stable;
        let refit = sample_variates(&fit, &mut stream(seed, 1), n);
        let other = sample_variates(&p, &mut stream(seed, 2), n);
        if ks_distance(&x, &refit) <= 2.0 * ks_distance(&x, &other) {
            pass += 1;
        }
    }
    assert!(pass >= 18, "{pass}/20 trials within twice the self-distance");
}

#[test]
fn hurst_on_white_noise_and_poisson_counts() {
    let mut rng = stream(12, 0);
    let gauss = fgn(4096, 0.5, &mut rng).unwrap();
    let pois = Poisson::new(5.0).unwrap();
    let counts: Vec<f64> = (0..4096).map(|_| pois.sample(&mut rng)).collect();
    for x in [&gauss, &counts] {
        assert!((hurst_rs(x).unwrap().h - 0.5).abs() <= 0.1);
        assert!((hurst_vt(x).unwrap().h - 0.5).abs() <= 0.1);
    }
}

#[test]
fn two_stations_split_coverage_at_the_midpoint() {
    let dep = Deployment::from_points(vec![(0.0, 0.0), (2.0, 0.0)]).unwrap();
    let ch = ChannelModel::new(4.0, 1.0, 0.0).unwrap();
    let opts = EmpiricalOptions { drops: 100_000, seed: 4, margin: 1.0 };
    let c = empirical_coverage_at(&dep, &ch, (1.0, 0.0), &[0.0], &opts).unwrap();
    assert!((c.values()[0] - 0.5).abs() < 0.01);
}
