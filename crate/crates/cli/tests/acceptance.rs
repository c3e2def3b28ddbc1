//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::Rng;
use stablecov_core::analytic::{
    coverage_a_inf, coverage_hppp, coverage_r_inf, coverage_thm2, coverage_thm2_with, d_integral,
    default_threshold_grid, pdf_nearest, upper_bound_thm4, CoverageQuery, GeometryWindow, IntegrationOptions, Window,
};
use stablecov_core::kernels::{xi_limit_b, ChannelModel};
use stablecov_core::montecarlo::{simulate_coverage, SimConfig};
use stablecov_core::quadrature::{try_integrate_to_infinity, Tolerance};
use stablecov_core::rng::stream;
use stablecov_core::selfsim::{fgn, hurst_rs, hurst_vt};
use stablecov_core::fitting::fit_stable_samples;
use stablecov_core::stable::{laplace, sample_variates, SelfSimParams, StableParams};

type Verdict = (bool, String);

const T3: [f64; 3] = [-10.0, 0.0, 10.0];
/// Published coverage at −10/0/10 dB per column `(a, H)`.
const TABLE: [((f64, f64), [f64; 3]); 5] = [
    ((2.0, 0.9), [0.8015, 0.4437, 0.1355]),
    ((20.0, 0.9), [0.8019, 0.4441, 0.1357]),
    ((200.0, 0.9), [0.8020, 0.4443, 0.1357]),
    ((2.0, 0.1), [0.8016, 0.4439, 0.1356]),
    ((2.0, 0.5), [0.8016, 0.4438, 0.1355]),
];
const TABLE_HPPP: [f64; 3] = [0.7531, 0.3580, 0.1153];

fn defaults() -> (StableParams, ChannelModel) {
    (StableParams::new(0.6, 0.25, 0.25).unwrap(), ChannelModel::new(4.0, 1.0, 1.0).unwrap())
}

fn window(r: f64, a: f64, h: f64) -> GeometryWindow {
    GeometryWindow::new(r, SelfSimParams::new(h, a).unwrap()).unwrap()
}

fn fmt(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join("/")
}

fn thm2(stable: StableParams, ch: ChannelModel, win: GeometryWindow, t: &[f64]) -> Vec<f64> {
    coverage_thm2(&CoverageQuery::new(stable, ch, Window::Finite(win), t.to_vec()).unwrap()).unwrap().values()
}

fn c1_table_analytic() -> Verdict {
    let start = Instant::now();
    let (stable, ch) = defaults();
    let mut ok = true;
    let mut parts = Vec::new();
    for ((a, h), want) in TABLE {
        let got = thm2(stable, ch, window(40.0, a, h), &T3);
        let worst = got.iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
        ok &= worst <= 0.005;
        parts.push(format!("a={a},H={h}: {} (max dev {worst:.4})", fmt(&got)));
    }
    let hppp = coverage_hppp(0.25, &ch, &T3).unwrap().values();
    let worst = hppp.iter().zip(TABLE_HPPP).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
    ok &= worst <= 0.005;
    parts.push(format!("hppp: {} (max dev {worst:.4})", fmt(&hppp)));
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    (ok, format!("{}; {secs:.2} s", parts.join("; ")))
}

fn c2_table_simulation() -> Verdict {
    let start = Instant::now();
    let (stable, ch) = defaults();
    let cfg = SimConfig::new(stable, window(40.0, 2.0, 0.9), ch, 1);
    let got = simulate_coverage(&cfg, &T3).unwrap().values();
    let want = TABLE[0].1;
    let worst = got.iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    (worst <= 0.02 && secs < 300.0, format!("{} realizations: {} vs {} (max dev {worst:.4}); {secs:.1} s", cfg.realizations, fmt(&got), fmt(&want)))
}

fn c3_hppp_oracle() -> Verdict {
    let fixed = StableParams::new(0.6, 0.0, 0.25).unwrap();
    let quiet = ChannelModel::new(4.0, 1.0, 0.0).unwrap();
    let at_one = coverage_r_inf(&CoverageQuery::new(fixed, quiet, Window::RadiusInfinite, vec![0.0]).unwrap()).unwrap().values()[0];
    let closed = 1.0 / (1.0 + PI / 4.0);
    let dev1 = (at_one - closed).abs();
    let (_, ch) = defaults();
    let grid = default_threshold_grid();
    let limit = coverage_r_inf(&CoverageQuery::new(fixed, ch, Window::RadiusInfinite, grid.clone()).unwrap()).unwrap();
    let hppp = coverage_hppp(0.25, &ch, &grid).unwrap();
    let dev2 = limit.values().iter().zip(hppp.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    (dev1 <= 1e-3 && dev2 <= 1e-8, format!("T=1: {at_one:.6} vs {closed:.6} (dev {dev1:.1e}); grid max dev {dev2:.1e}"))
}

fn c4_limit_chain() -> Verdict {
    let (stable, ch) = defaults();
    let r = 1e3;
    let full = thm2(stable, ch, window(r, 1e3, 0.9), &T3);
    let zoom = coverage_a_inf(&CoverageQuery::new(stable, ch, Window::ZoomInfinite { inner_radius: r }, T3.to_vec()).unwrap())
        .unwrap()
        .values();
    let plane = coverage_r_inf(&CoverageQuery::new(stable, ch, Window::RadiusInfinite, T3.to_vec()).unwrap()).unwrap().values();
    let mut worst = 0.0f64;
    for i in 0..3 {
        worst = worst.max((full[i] - zoom[i]).abs()).max((zoom[i] - plane[i]).abs()).max((full[i] - plane[i]).abs());
    }
    (worst <= 1e-3, format!("a=R=1e3: {}; a→∞: {}; R→∞: {} (max dev {worst:.1e})", fmt(&full), fmt(&zoom), fmt(&plane)))
}

fn c5_bound() -> Verdict {
    let (stable, ch) = defaults();
    let grid = default_threshold_grid();
    let q = CoverageQuery::new(stable, ch, Window::RadiusInfinite, grid.clone()).unwrap();
    let exact = coverage_r_inf(&q).unwrap();
    let bound = upper_bound_thm4(&q).unwrap();
    let raw = |c: &stablecov_core::analytic::CoverageCurve, i: usize| c.meta.diagnostics[i].raw;
    let dominates = (0..grid.len()).all(|i| raw(&bound, i) >= raw(&exact, i));
    let gap = |t: f64| {
        let i = grid.iter().position(|&g| g == t).unwrap();
        (raw(&bound, i) - raw(&exact, i)) / raw(&exact, i)
    };
    let (g0, g20) = (gap(0.0), gap(20.0));
    let mut kernel_ok = 0;
    for t_db in [-10.0, -2.5, 5.0, 12.5, 20.0] {
        for r in [0.01, 0.1, 1.0, 10.0, 100.0] {
            let s = ch.zeta() * 10f64.powf(t_db / 10.0) * f64::powf(r, ch.delta());
            if xi_limit_b(s, r, &ch).unwrap() > PI * r * r {
                kernel_ok += 1;
            }
        }
    }
    (
        dominates && g20 < g0 && kernel_ok == 25,
        format!("dominates on 13 thresholds: {dominates}; relative gap 0 dB {g0:.5}, 20 dB {g20:.5}; B > πr² at {kernel_ok}/25"),
    )
}

fn c6_monotone_d() -> Verdict {
    let d = |a: f64, s: f64| d_integral(&StableParams::new(a, s, 0.25).unwrap()).unwrap().value;
    let sigmas = [0.025, 0.25, 2.5, 25.0];
    let by_sigma = [0.3, 0.6, 0.9].iter().all(|&a| sigmas.windows(2).all(|w| d(a, w[1]) < d(a, w[0])));
    let by_alpha = [0.4, 0.6, 0.8].windows(2).all(|w| d(w[1], 25.0) < d(w[0], 25.0));
    (by_sigma && by_alpha, format!("decreasing in sigma: {by_sigma}; decreasing in alpha at sigma=25: {by_alpha}"))
}

fn c7_distribution() -> Verdict {
    let mut params = vec![defaults().0];
    let mut rng = stream(70, 0);
    for _ in 0..5 {
        let a = rng.random_range(0.3..0.95);
        params.push(StableParams::new(a, rng.random_range(0.05..2.0), rng.random_range(0.05..2.0)).unwrap());
    }
    let mut worst_mass = 0.0f64;
    for p in &params {
        let q = try_integrate_to_infinity(|r| pdf_nearest(r, p), 0.0, Tolerance::new(1e-13, 1e-10)).unwrap();
        worst_mass = worst_mass.max((q.value - 1.0).abs());
    }
    let p = defaults().0;
    let n = 1_000_000;
    let x = sample_variates(&p, &mut stream(71, 0), n);
    let mut worst_z = 0.0f64;
    for s in [0.5, 1.0, 2.0] {
        let v: Vec<f64> = x.iter().map(|x| (-s * x).exp()).collect();
        let m = v.iter().sum::<f64>() / n as f64;
        let se = (v.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (n as f64 - 1.0) / n as f64).sqrt();
        worst_z = worst_z.max((m - laplace(&p, s).unwrap()).abs() / se);
    }
    let g = sample_variates(&StableParams::new(2.0, 1.0, 0.0).unwrap(), &mut stream(72, 0), n);
    let mean = g.iter().sum::<f64>() / n as f64;
    let m2 = g.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let m3 = g.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n as f64;
    let m4 = g.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n as f64;
    let (skew, kurt) = (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0);
    (
        worst_mass <= 1e-6 && worst_z <= 3.0 && skew.abs() < 0.01 && kurt.abs() < 0.05,
        format!("pdf mass max dev {worst_mass:.1e} over 6 laws; sampler vs transform max {worst_z:.2} SE; alpha=2 skew {skew:.4}, excess kurtosis {kurt:.4}"),
    )
}

fn c8_hurst() -> Verdict {
    let n = 4096;
    let noise: Vec<f64> = fgn(n, 0.5, &mut stream(80, 0)).unwrap();
    let (rs0, vt0) = (hurst_rs(&noise).unwrap().h, hurst_vt(&noise).unwrap().h);
    // counts driven by H = 0.9 noise, averaged over 16 series as for origins
    let reps = 16;
    let (mut rs, mut vt) = (0.0, 0.0);
    for i in 0..reps {
        let z = fgn(n, 0.9, &mut stream(81, i)).unwrap();
        let counts: Vec<f64> = z.iter().map(|v| (1000.0 + 100.0 * v).round().max(0.0)).collect();
        rs += hurst_rs(&counts).unwrap().h / reps as f64;
        vt += hurst_vt(&counts).unwrap().h / reps as f64;
    }
    let ok = (rs0 - 0.5).abs() <= 0.1 && (vt0 - 0.5).abs() <= 0.1 && (rs - 0.9).abs() <= 0.05 && (vt - 0.9).abs() <= 0.05;
    (ok, format!("iid n={n}: R/S {rs0:.3}, V-T {vt0:.3}; H=0.9 counts (mean of {reps}): R/S {rs:.3}, V-T {vt:.3}"))
}

fn c9_fitting() -> Verdict {
    let p = defaults().0;
    let mut pass = 0;
    for seed in 0..20 {
        let x = sample_variates(&p, &mut stream(90, seed), 10_000);
        let f = fit_stable_samples(&x).unwrap().stable;
        if (f.alpha() - 0.6).abs() <= 0.1 && (f.sigma() / 0.25 - 1.0).abs() <= 0.2 && (f.mu() / 0.25 - 1.0).abs() <= 0.2 {
            pass += 1;
        }
    }
    (pass >= 18, format!("{pass}/20 trials within alpha ±0.1, sigma and mu ±20%"))
}

fn run_cli(dir: &Path, args: &[&str], out: &str) -> Vec<u8> {
    let path = dir.join(out);
    let status = Command::new(env!("CARGO_BIN_EXE_stablecov"))
        .args(args)
        .arg("--out")
        .arg(&path)
        .status()
        .expect("binary runs");
    assert!(status.success(), "stablecov {args:?} failed");
    std::fs::read(path).unwrap()
}

fn c10_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let deployment = d.join("dep.csv");
    let dep = deployment.to_str().unwrap();
    let mut checks = Vec::new();
    let mut all = true;
    let mut compare = |name: &str, args: &[&str]| {
        let a = run_cli(d, &[args, &["--threads", "8"]].concat(), &format!("{name}-a"));
        let b = run_cli(d, &[args, &["--threads", "8"]].concat(), &format!("{name}-b"));
        let c = run_cli(d, &[args, &["--threads", "1"]].concat(), &format!("{name}-c"));
        let same = a == b && a == c;
        all &= same;
        checks.push(format!("{name} {}", if same { "identical" } else { "DIFFERS" }));
    };
    compare("gen", &["gen", "--seed", "5", "--radius-r", "60"]);
    std::fs::copy(d.join("gen-a"), &deployment).unwrap();
    compare("simulate", &["coverage", "--mode", "simulate", "--realizations", "3000", "--seed", "9"]);
    compare("thm2", &["coverage", "--mode", "analytic-thm2"]);
    compare("empirical", &["empirical", dep, "--drops", "300", "--seed", "3", "--thresholds", "-10,0,10"]);
    compare("hurst", &["hurst", dep, "--ring-width", "1", "--n-rings", "32", "--origins", "4", "--seed", "2"]);
    compare("fit", &["fit", dep, "--cell-side", "4"]);
    (all, format!("re-runs with --threads 8 and 1: {}", checks.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("published coverage, analytic", c1_table_analytic),
        ("published coverage, Monte Carlo", c2_table_simulation),
        ("homogeneous closed form", c3_hppp_oracle),
        ("limit consistency chain", c4_limit_chain),
        ("upper bound", c5_bound),
        ("monotonicity of D", c6_monotone_d),
        ("distribution core", c7_distribution),
        ("self-similarity", c8_hurst),
        ("fitting", c9_fitting),
        ("determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (ok, detail) = f();
        if !ok {
            failed += 1;
        }
        println!("criterion {:>2} {}: {name}: {detail}", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    // reference only: the homogeneous column is reproduced when serving
    // distances below 0.1 are excluded from the radial integral
    let (stable, ch) = defaults();
    let opts = IntegrationOptions { r_min: 0.1, ..IntegrationOptions::default() };
    let hppp = stablecov_core::analytic::coverage_hppp_with(0.25, &ch, &T3, &opts).unwrap().values();
    let q = CoverageQuery::new(stable, ch, Window::Finite(window(40.0, 2.0, 0.9)), T3.to_vec()).unwrap();
    let st = coverage_thm2_with(&q, &opts).unwrap().values();
    println!("note: with r >= 0.1 the homogeneous model gives {} and the stable model {}", fmt(&hppp), fmt(&st));
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
