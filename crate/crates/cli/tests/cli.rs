use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use stablecov_core::analytic::{coverage_thm2, CoverageQuery, GeometryWindow, Window};
use stablecov_core::kernels::ChannelModel;
use stablecov_core::stable::{SelfSimParams, StableParams};

fn stablecov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stablecov")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// `(meta json, rows)` of a coverage CSV.
fn parse_curve(text: &str) -> (serde_json::Value, Vec<(f64, f64)>) {
    let mut lines = text.lines();
    let meta = lines.next().unwrap().strip_prefix("# meta: ").expect("meta header");
    assert_eq!(lines.next(), Some("t_db,p_c"));
    let rows = lines
        .map(|l| {
            let (t, p) = l.split_once(',').unwrap();
            (t.parse().unwrap(), p.parse().unwrap())
        })
        .collect();
    (serde_json::from_str(meta).unwrap(), rows)
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn analytic_output_matches_the_library() {
    let o = stablecov(&["coverage", "--mode", "analytic-thm2", "--thresholds", "-10,0,10"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (meta, rows) = parse_curve(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(meta["mode"], "analytic-thm2");
    assert_eq!(meta["meta"]["params"]["radius_r"], 40.0);
    let q = CoverageQuery::new(
        StableParams::new(0.6, 0.25, 0.25).unwrap(),
        ChannelModel::new(4.0, 1.0, 1.0).unwrap(),
        Window::Finite(GeometryWindow::new(40.0, SelfSimParams::new(0.9, 2.0).unwrap()).unwrap()),
        vec![-10.0, 0.0, 10.0],
    )
    .unwrap();
    let want = coverage_thm2(&q).unwrap().values();
    let got: Vec<f64> = rows.iter().map(|r| r.1).collect();
    assert_eq!(got, want, "CSV values must round-trip exactly");
}

#[test]
fn homogeneous_column_with_inner_exclusion() {
    let o = stablecov(&["coverage", "--mode", "hppp", "--lambda", "0.25", "--r-min", "0.1", "--thresholds", "-10,0,10"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (_, rows) = parse_curve(&String::from_utf8(o.stdout).unwrap());
    for ((_, p), want) in rows.iter().zip([0.7531, 0.3580, 0.1153]) {
        assert!((p - want).abs() < 0.005, "{p} vs {want}");
    }
}

#[test]
fn every_mode_runs() {
    for mode in ["analytic-thm2", "analytic-a-inf", "analytic-r-inf", "hppp", "upper-bound", "simulate"] {
        let o = stablecov(&["coverage", "--mode", mode, "--realizations", "500", "--thresholds", "0,10"]);
        assert_eq!(code(&o), 0, "{mode}: {}", stderr(&o));
        let (meta, rows) = parse_curve(&String::from_utf8(o.stdout).unwrap());
        assert_eq!(meta["mode"], mode);
        assert_eq!(rows.len(), 2);
        assert!(rows[1].1 <= rows[0].1);
    }
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let header_only = write(dir.path(), "h.csv", "x_m,y_m\n");
    let h = header_only.to_str().unwrap();
    let bad_key = write(dir.path(), "c.toml", "alpha = 0.6\nbogus = 1\n");
    let cases: Vec<Vec<&str>> = vec![
        vec!["coverage", "--mode", "hppp", "--thresholds", ""],
        vec!["coverage", "--mode", "hppp", "--thresholds", "10,0"],
        vec!["coverage", "--mode", "nonsense"],
        vec!["coverage", "--mode", "analytic-thm2", "--alpha", "1"],
        vec!["coverage", "--mode", "analytic-thm2", "--config", bad_key.to_str().unwrap()],
        vec!["fit", h, "--cell-side", "1"],
        vec!["empirical", h],
        vec!["hurst", h, "--ring-width", "1", "--n-rings", "32", "--method", "wavelet"],
        vec!["gen", "--out", "/nonexistent-dir/x.csv"],
    ];
    for args in cases {
        let o = stablecov(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
        let err = stderr(&o);
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with("stablecov: error["), "{err}");
    }
}

#[test]
fn short_ring_series_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let dep = write(dir.path(), "d.csv", "x_m,y_m\n0,0\n10,10\n");
    let o = stablecov(&["hurst", dep.to_str().unwrap(), "--ring-width", "1", "--n-rings", "15"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn numerical_failures_exit_with_three() {
    let o = stablecov(&["gen", "--radius-r", "1e5"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).starts_with("stablecov: error[numerical]"));
}

#[test]
fn alpha_one_is_opt_in() {
    let o = stablecov(&["coverage", "--mode", "hppp", "--alpha", "1", "--thresholds", "0"]);
    assert_eq!(code(&o), 0, "the homogeneous model ignores alpha");
    let o = stablecov(&["gen", "--alpha", "1"]);
    assert_eq!(code(&o), 2);
    let o = stablecov(&["gen", "--alpha", "1", "--allow-alpha-one", "--radius-r", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "alpha = 0.7\nsigma = 0.5\nradius_r = 30.0\n");
    let o = stablecov(&["coverage", "--mode", "analytic-thm2", "--config", cfg.to_str().unwrap(), "--alpha", "0.8", "--thresholds", "0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (meta, _) = parse_curve(&String::from_utf8(o.stdout).unwrap());
    let params = &meta["meta"]["params"];
    assert_eq!(params["alpha"], 0.8);
    assert_eq!(params["sigma"], 0.5);
    assert_eq!(params["radius_r"], 30.0);
}

#[test]
fn output_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_stablecov"))
        .args(["coverage", "--mode", "hppp", "--thresholds", "0", "--out", "curve.csv"])
        .env("STABLECOV_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("curve.csv").exists());
}

#[test]
fn fit_report_follows_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let dep = dir.path().join("dep.csv");
    let o = stablecov(&["gen", "--seed", "4", "--radius-r", "60", "--out", dep.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = stablecov(&["fit", dep.to_str().unwrap(), "--cell-side", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../schema/fit_report.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&report).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
    assert_eq!(report["stable"]["beta"], 1.0);
}

#[test]
fn empirical_oracles() {
    let dir = tempfile::tempdir().unwrap();
    let one = write(dir.path(), "one.csv", "x_m,y_m\n3.0,4.0\n");
    let o = stablecov(&["empirical", one.to_str().unwrap(), "--drops", "1000", "--thresholds", "-10,0,10,20"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (meta, rows) = parse_curve(&String::from_utf8(o.stdout).unwrap());
    assert!(rows.iter().all(|r| r.1 == 1.0));
    assert_eq!(meta["meta"]["params"]["n0"], 0.0);

    let two = write(dir.path(), "two.csv", "x_m,y_m\n0,0\n2,0\n");
    let o = stablecov(&["empirical", two.to_str().unwrap(), "--user-x", "1", "--user-y", "0", "--thresholds", "0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (_, rows) = parse_curve(&String::from_utf8(o.stdout).unwrap());
    assert!((rows[0].1 - 0.5).abs() < 0.01, "{}", rows[0].1);
}

#[test]
fn hurst_report_lists_every_origin() {
    let dir = tempfile::tempdir().unwrap();
    let dep = dir.path().join("dep.csv");
    stablecov(&["gen", "--seed", "8", "--sigma", "0", "--mu", "0.5", "--radius-r", "40", "--out", dep.to_str().unwrap()]);
    let o = stablecov(&["hurst", dep.to_str().unwrap(), "--ring-width", "1", "--n-rings", "32", "--origins", "5", "--method", "vt"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["method"], "VT");
    assert_eq!(r["series"], "Annulus");
    let origins = r["origins"].as_array().unwrap();
    assert_eq!(origins.len(), 5);
    for o in origins {
        let h = o["h"].as_f64().unwrap();
        assert!(h > 0.0 && h < 1.0);
        assert!(!o["points"].as_array().unwrap().is_empty());
    }
    assert!(r["std"].as_f64().unwrap() >= 0.0);
}

#[test]
fn geographic_input_is_projected() {
    let dir = tempfile::tempdir().unwrap();
    let mut body = String::from("lon,lat\n");
    // additive-recurrence points: irregular counts per cell
    for k in 1..=2000 {
        let (u, v) = ((k as f64 * 0.754_877_666).fract(), (k as f64 * 0.569_840_291).fract());
        body.push_str(&format!("{},{}\n", 120.0 + 0.02 * u * u, 30.0 + 0.02 * v));
    }
    let geo = write(dir.path(), "geo.csv", &body);
    let o = stablecov(&["fit", geo.to_str().unwrap(), "--cell-side", "150", "--geo"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = stablecov(&["fit", geo.to_str().unwrap(), "--cell-side", "150"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn gen_is_reproducible_and_counts_fixed_density() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = stablecov(&["gen", "--seed", "1", "--sigma", "0", "--mu", "0.5", "--radius-r", "30", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    // σ = 0: Poisson count with mean λπR² + λa^(H−2)π((aR)² − R²)
    let n = text.lines().count() - 1;
    let f = 2f64.powf(0.9 - 2.0);
    let mean = 0.5 * std::f64::consts::PI * (900.0 + f * (3600.0 - 900.0));
    assert!((n as f64 - mean).abs() < 4.0 * mean.sqrt(), "{n} vs {mean}");
}
