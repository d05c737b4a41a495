//! Acceptance criteria 1-7. Each test prints one `PASS`/`FAIL` line; run with
//! `cargo test -p gqp-lab --test acceptance -- --nocapture` to see them.
//!
//! Wall-clock budgets are checked only in optimized builds.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use gqp_lab::cli::{run_sweep, EmitFlags, RunConfig, SweepConfig};
use gqp_lab::potential::{evaluate_point, sample_points, PhysicalUnits};
use gqp_lab::spectral::{
    channel_operator, count_bound_states, cross_check_2d, discretize_1d, eigen_lowest, variational_ground_bound,
    Boundary, FlatSystem, MeridianDomain, PotentialSelector, SpectralProblem,
};
use gqp_lab::surface::{normal_laplacian_projection, SurfaceChart, SurfaceKind};
use gqp_lab::topo::{analyze_topology, Resolution};

fn verdict(id: u32, title: &str, started: Instant, budget_s: u64, checks: &[(String, bool)]) {
    let elapsed = started.elapsed();
    let in_time = cfg!(debug_assertions) || elapsed <= Duration::from_secs(budget_s);
    let ok = in_time && checks.iter().all(|(_, ok)| *ok);
    println!(
        "criterion {id} [{}] {title} ({:.2} s, budget {budget_s} s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    for (what, ok) in checks {
        println!("    {} {what}", if *ok { "ok  " } else { "FAIL" });
    }
    assert!(ok, "criterion {id} failed");
}

fn close(x: f64, want: f64, tol: f64) -> bool {
    (x - want).abs() <= tol
}

fn units() -> PhysicalUnits {
    PhysicalUnits::default()
}

#[test]
fn criterion_1_identity_suite() {
    let started = Instant::now();
    let u = units();
    let charts = [
        SurfaceChart::sphere(1.0).unwrap(),
        SurfaceChart::catenoid(1.0).unwrap(),
        SurfaceChart::torus(2.0, 1.0).unwrap(),
        SurfaceChart::bilayer_neck(1.0, 2.0).unwrap(),
    ];
    let mut checks = Vec::new();
    for chart in &charts {
        let mut worst = [0.0f64; 5];
        for (i, (pu, pv)) in sample_points(chart, 1000, 5.0 * chart.length_scale(), 2024).into_iter().enumerate() {
            let (curv, normal, sigma) = evaluate_point(chart, pu, pv, &u).unwrap();
            let (h, k) = (curv.mean, curv.gauss);
            let scale = curv.kappa1.powi(2) + curv.kappa2.powi(2);
            let n_lap_n = normal_laplacian_projection(chart, pu, pv).unwrap();
            let rel = |a: f64, b: f64, s: f64| (a - b).abs() / a.abs().max(b.abs()).max(s).max(f64::MIN_POSITIVE);
            let kin = u.hbar * u.hbar / (8.0 * u.mass);
            let errs = [
                rel(normal.grad_n_sq, 4.0 * h * h - 2.0 * k, scale),
                rel(normal.div_n, -2.0 * h, scale.sqrt()),
                rel(n_lap_n, -normal.grad_n_sq, scale),
                rel(n_lap_n + normal.div_n.powi(2), 2.0 * k, scale),
                rel(
                    sigma.v_dacosta,
                    -kin * (2.0 * normal.grad_n_sq - normal.div_n.powi(2)),
                    kin * scale,
                ),
            ];
            for (w, e) in worst.iter_mut().zip(errs) {
                assert!(e.is_finite(), "{} sample {i}", chart.name());
                *w = w.max(e);
            }
        }
        let max = worst.iter().copied().fold(0.0, f64::max);
        checks.push((format!("{}: worst relative error {max:.2e} over 1000 points", chart.name()), max < 1e-10));
    }
    verdict(1, "identity suite", started, 1, &checks);
}

#[test]
fn criterion_2_gauss_bonnet() {
    let started = Instant::now();
    let res = Resolution::new(512, 512);
    let (sphere, _) = analyze_topology(&SurfaceChart::sphere(1.0).unwrap(), res, None, &units()).unwrap();
    let (torus, _) = analyze_topology(&SurfaceChart::torus(2.0, 1.0).unwrap(), res, None, &units()).unwrap();
    let checks = vec![
        (
            format!("sphere total curvature {:.15} vs 4 pi", sphere.total_curvature),
            close(sphere.total_curvature, 4.0 * PI, 1e-8),
        ),
        (
            format!("torus total curvature {:.3e} vs 0", torus.total_curvature),
            close(torus.total_curvature, 0.0, 1e-8),
        ),
    ];
    verdict(2, "Gauss-Bonnet at 512x512", started, 5, &checks);
}

#[test]
fn criterion_3_degrees() {
    let started = Instant::now();
    let res = Resolution::new(512, 512);
    let (cat, _) = analyze_topology(&SurfaceChart::catenoid(1.0).unwrap(), res, Some(20.0), &units()).unwrap();
    let (neck, _) = analyze_topology(&SurfaceChart::bilayer_neck(1.0, 2.0).unwrap(), res, Some(20.0), &units()).unwrap();
    let (torus, samples) = analyze_topology(&SurfaceChart::torus(2.0, 1.0).unwrap(), res, None, &units()).unwrap();
    let abs_k = samples.integrate_abs_gauss().unwrap();
    let checks = vec![
        (
            format!("catenoid |Q| = {} (residual {:.2e})", cat.degrees.signed_degree.abs(), cat.degrees.signed_residual),
            cat.degrees.signed_degree.abs() == 1 && cat.degrees.signed_residual < 1e-6,
        ),
        (
            format!("bilayer-neck |Q| = {} (residual {:.2e})", neck.degrees.signed_degree.abs(), neck.degrees.signed_residual),
            neck.degrees.signed_degree.abs() == 1 && neck.degrees.signed_residual < 1e-3,
        ),
        (
            format!("torus signed degree {:.3e}", torus.degrees.signed_from_curvature),
            torus.degrees.signed_degree == 0 && close(torus.degrees.signed_from_curvature, 0.0, 1e-6),
        ),
        (
            format!("torus absolute degree {}, |K| integral {abs_k:.12} vs 8 pi", torus.degrees.absolute_degree),
            torus.degrees.absolute_degree == 2 && close(abs_k, 8.0 * PI, 1e-6),
        ),
    ];
    verdict(3, "Gauss-map degrees", started, 10, &checks);
}

#[test]
fn criterion_4_bogomolnyi_and_estimators() {
    let started = Instant::now();
    let t = 20.0;
    let (cat, _) =
        analyze_topology(&SurfaceChart::catenoid(1.0).unwrap(), Resolution::new(64, 512), Some(t), &units()).unwrap();
    let (torus, _) =
        analyze_topology(&SurfaceChart::torus(2.0, 1.0).unwrap(), Resolution::new(256, 256), None, &units()).unwrap();
    let willmore = 4.0 * PI * PI / 3f64.sqrt();

    let mut cfg = RunConfig::new(SurfaceKind::Torus).with_param("R", 2.0).with_param("r", 1.0);
    cfg.grid = Resolution::new(64, 64);
    cfg.emit = EmitFlags { json: false, csv: false, plot_data: false };
    cfg.sweep = Some(SweepConfig { parameter: "R".into(), from: 1.2, to: 1.8, steps: 25 });
    let sweep = run_sweep(&cfg).unwrap().report.unwrap().sweep.unwrap();
    let minimizer = sweep.n_paper_minimizer.unwrap_or(f64::NAN);

    let b = &cat.bogomolnyi;
    let c = &cat.counts;
    let checks = vec![
        (
            format!("catenoid Dirichlet energy {:.12} vs 8 pi tanh T", b.dirichlet_energy),
            close(b.dirichlet_energy, 8.0 * PI * t.tanh(), 1e-6) && b.dirichlet_energy >= 4.0 * PI,
        ),
        (
            format!("catenoid N_sigma_lower {:.8} vs 8 (bound 4)", c.n_sigma_lower),
            close(c.n_sigma_lower, 8.0, 1e-4) && c.n_sigma_lower >= 4.0,
        ),
        (
            format!("catenoid N_dacosta {:.8} vs 4 (bound 4)", c.n_dacosta),
            close(c.n_dacosta, 4.0, 1e-4) && c.n_dacosta >= 4.0 - 1e-4,
        ),
        (
            format!("torus Willmore energy {:.12} vs 4 pi^2/sqrt 3", torus.willmore_energy),
            close(torus.willmore_energy, willmore, 1e-6),
        ),
        (
            format!("torus N_paper {:.6} >= 8", torus.counts.n_paper),
            close(torus.counts.n_paper, 8.0 / PI * willmore, 1e-6) && torus.counts.n_paper >= 8.0,
        ),
        (
            format!("torus N_paper minimized at R/r = {minimizer:.5} vs sqrt 2"),
            sweep.flagged_rows == 0 && close(minimizer, 2f64.sqrt(), 0.02),
        ),
    ];
    verdict(4, "Bogomolnyi bound and state estimators", started, 10, &checks);
}

fn sphere_levels() -> Vec<f64> {
    let problem = SpectralProblem::new(SurfaceChart::sphere(1.0).unwrap(), PotentialSelector::None);
    let mut levels = Vec::new();
    for ell in 0..4u32 {
        let (op, _) = channel_operator(&problem, ell, 1024).unwrap();
        for e in eigen_lowest(&op.matrix, 4 - ell as usize).unwrap() {
            levels.extend(std::iter::repeat_n(e, SpectralProblem::degeneracy(ell)));
        }
    }
    levels.sort_by(f64::total_cmp);
    levels.truncate(16);
    levels
}

#[test]
fn criterion_5_spectral_validation() {
    let started = Instant::now();
    let mut checks = Vec::new();

    let levels = sphere_levels();
    let mut want = Vec::new();
    for j in 0..4u32 {
        want.extend(std::iter::repeat_n(f64::from(j * (j + 1)), 2 * j as usize + 1));
    }
    let worst = levels
        .iter()
        .zip(&want)
        .map(|(e, w)| if *w == 0.0 { e.abs() } else { (e - w).abs() / w })
        .fold(0.0, f64::max);
    checks.push((
        format!("unit sphere levels {{0,2,6,12}} x {{1,3,5,7}}: worst error {worst:.2e}"),
        levels.len() == 16 && worst < 1e-3,
    ));

    let free = FlatSystem {
        kinetic: 1.0,
        domain: MeridianDomain { lo: -10.0, hi: 10.0, left: Boundary::Dirichlet, right: Boundary::Dirichlet },
        potential: std::sync::Arc::new(|_| 0.0),
    };
    let exact = (PI / 20.0).powi(2);
    let err = |n| eigen_lowest(&discretize_1d(&free, n).unwrap().matrix, 1).unwrap()[0] - exact;
    let order = (err(256) / err(512)).log2();
    checks.push((format!("free box observed order {order:.4}"), order >= 1.9));

    let torus = SpectralProblem::new(SurfaceChart::torus(2.0, 1.0).unwrap(), PotentialSelector::Dacosta);
    let cross = cross_check_2d(&torus, 8, Resolution::new(48, 48)).unwrap();
    checks.push((
        format!(
            "torus 1D vs 2D: max deviation {:.2e}, allowed {:.2e}",
            cross.max_deviation, cross.max_allowed
        ),
        cross.agree,
    ));
    verdict(5, "spectral validation", started, 60, &checks);
}

#[test]
fn criterion_6_catenoid_bound_states() {
    let started = Instant::now();
    let problem = SpectralProblem::new(SurfaceChart::catenoid(1.0).unwrap(), PotentialSelector::Dacosta)
        .with_truncation(20.0)
        .with_points(1024);
    let spec = count_bound_states(&problem).unwrap();
    let bound = variational_ground_bound(&problem).unwrap();
    let level = |n: usize, t: f64| {
        spec.convergence
            .levels
            .iter()
            .find(|l| l.points == n && l.truncation == Some(t))
            .map(|l| l.bound_count)
    };
    let base = level(1024, 20.0);
    let fine = level(2048, 40.0);
    let e0 = spec.ground_energy.unwrap_or(f64::NAN);
    let paper_min = 4;
    let agrees = spec.bound_count >= paper_min;
    println!(
        "    eigencount {} vs semiclassical estimate >= {paper_min}: agreement {}",
        spec.bound_count,
        if agrees { "yes" } else { "no" }
    );
    let checks = vec![
        (format!("eigensolver ground energy {e0:.8} < 0"), e0 < 0.0),
        (
            format!("Gaussian variational bound {:.8} < 0 (width {:.4})", bound.energy, bound.width),
            bound.energy < 0.0 && e0 <= bound.energy,
        ),
        (format!("bound count at (N,T) {base:?} and (2N,2T) {fine:?}"), base.is_some() && base == fine),
    ];
    verdict(6, "catenoid bound states", started, 60, &checks);
}

fn analyze_json(out: &Path, workers: usize) -> String {
    let status = Command::new(env!("CARGO_BIN_EXE_gqp-lab"))
        .args(["--workers", &workers.to_string(), "analyze", "--surface", "catenoid", "--c", "1", "--T", "20"])
        .arg("--out")
        .arg(out)
        .args(["--emit", "json"])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    std::fs::read_to_string(out.join("report.json"))
        .unwrap()
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn criterion_7_determinism() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<(usize, String)> = [1, 1, 8, 8].into_iter().map(|w| (w, analyze_json(dir.path(), w))).collect();
    let reference = &runs[0].1;
    let checks = runs
        .iter()
        .enumerate()
        .map(|(i, (w, text))| (format!("run {i} with {w} worker(s) matches run 0"), text == reference))
        .collect::<Vec<_>>();
    verdict(7, "deterministic analyze reports", started, 30, &checks);
}
