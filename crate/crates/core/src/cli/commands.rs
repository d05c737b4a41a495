use std::path::PathBuf;

use rayon::prelude::*;

use super::config::RunConfig;
use super::output::{write_atomic, write_fields_csv, write_fields_plot, write_spectrum_csv, write_sweep_csv};
use super::report::{
    eigencount_comparison, estimator_comparisons, CommandKind, FieldSummary, RunReport, SweepRow,
    SweepSummary, Verdict,
};
use crate::spectral::{count_bound_states, variational_ground_bound, PotentialSelector};
use crate::surface::{MeridianEnd, SurfaceChart, SurfaceKind};
use crate::topo::{analyze_topology, build_grid, topo_report, GridSamples};
use crate::{Error, Result};

/// What a command produced and how the process should exit.
#[derive(Debug, Default)]
pub struct Outcome {
    pub exit_code: i32,
    pub diagnostics: Vec<String>,
    pub written: Vec<PathBuf>,
    pub report: Option<RunReport>,
}

impl Outcome {
    fn flag(&mut self, code: i32, message: impl Into<String>) {
        self.exit_code = self.exit_code.max(code);
        self.diagnostics.push(message.into());
    }
}

fn evaluate(cfg: &RunConfig) -> Result<(SurfaceChart, GridSamples)> {
    let chart = cfg.chart()?;
    let t = cfg.effective_truncation(&chart);
    let samples = build_grid(&chart, cfg.grid, t)?.evaluate(&cfg.units)?;
    Ok((chart, samples))
}

/// Topology with recoverable failures (indeterminate degrees, invariant violations)
/// recorded in the outcome instead of aborting the run.
fn attach_topology(cfg: &RunConfig, samples: &GridSamples, report: &mut RunReport, outcome: &mut Outcome) -> Result<()> {
    match topo_report(samples) {
        Ok(topo) => {
            if !topo.degrees.clean {
                outcome.flag(
                    2,
                    format!(
                        "Gauss-map degrees not converged (residuals {:e}, {:e}); increase T or the grid",
                        topo.degrees.signed_residual, topo.degrees.absolute_residual
                    ),
                );
            }
            for c in estimator_comparisons(cfg.surface.kind, &topo) {
                if c.verdict == Verdict::Fail {
                    outcome.flag(3, format!("{} = {} violates the bound {}", c.quantity, c.computed, c.paper_value));
                }
                report.paper_comparison.push(c);
            }
            report.topology = Some(topo);
            Ok(())
        }
        Err(e) if e.exit_code() >= 2 => {
            outcome.flag(e.exit_code(), e.to_string());
            Ok(())
        }
        Err(e) => Err(e),
    }
}

fn finish(cfg: &RunConfig, mut report: RunReport, mut outcome: Outcome, samples: Option<&GridSamples>) -> Result<Outcome> {
    report.status.exit_code = outcome.exit_code;
    report.status.diagnostics = outcome.diagnostics.clone();
    let dir = &cfg.out;
    if cfg.emit.json {
        let path = dir.join("report.json");
        write_atomic(&path, &report.to_json()?)?;
        outcome.written.push(path);
    }
    if let Some(samples) = samples {
        if cfg.emit.csv {
            outcome.written.push(write_fields_csv(dir, samples)?);
        }
        if cfg.emit.plot_data {
            outcome.written.push(write_fields_plot(dir, samples)?);
        }
    }
    if cfg.emit.csv {
        if let Some(spec) = &report.spectrum {
            outcome.written.extend(write_spectrum_csv(dir, &spec.channels)?);
        }
        if let Some(sweep) = &report.sweep {
            outcome.written.push(write_sweep_csv(dir, sweep)?);
        }
    }
    outcome.report = Some(report);
    Ok(outcome)
}

pub fn run_analyze(cfg: &RunConfig) -> Result<Outcome> {
    let (_, samples) = evaluate(cfg)?;
    let mut report = RunReport::new(CommandKind::Analyze, cfg.clone());
    report.fields = Some(FieldSummary::from_samples(&samples));
    let mut outcome = Outcome::default();
    attach_topology(cfg, &samples, &mut report, &mut outcome)?;
    finish(cfg, report, outcome, Some(&samples))
}

pub fn run_spectrum(cfg: &RunConfig) -> Result<Outcome> {
    let (chart, samples) = evaluate(cfg)?;
    let mut report = RunReport::new(CommandKind::Spectrum, cfg.clone());
    report.fields = Some(FieldSummary::from_samples(&samples));
    let mut outcome = Outcome::default();
    attach_topology(cfg, &samples, &mut report, &mut outcome)?;
    report.paper_comparison.retain(|c| c.quantity == "absolute_degree");

    let problem = cfg.spectral_problem(&chart);
    let spec = count_bound_states(&problem)?;
    if !spec.converged {
        outcome.flag(
            2,
            format!(
                "bound count not converged: {}..{} over the (N, T) refinements",
                spec.bound_count_range[0], spec.bound_count_range[1]
            ),
        );
    }
    if spec.ell_cap_reached {
        outcome.flag(2, format!("channels still binding at lmax = {}", cfg.spectral.lmax));
    }
    let open = chart.meridian_ends() == (MeridianEnd::Open, MeridianEnd::Open);
    if open && cfg.spectral.potential != PotentialSelector::None {
        let bound = variational_ground_bound(&problem)?;
        let e0 = spec.convergence.richardson_ground.or(spec.ground_energy);
        if let Some(e0) = e0 {
            let slack = 1e-6 * bound.energy.abs().max(cfg.units.kinetic_scale() / chart.length_scale().powi(2));
            if e0 > bound.energy + slack {
                outcome.flag(3, format!("ground energy {e0} lies above the variational bound {}", bound.energy));
            }
        }
        report.variational = Some(bound);
    }
    if let Some(c) = eigencount_comparison(cfg.surface.kind, &spec) {
        report.paper_comparison.push(c);
    }
    report.spectrum = Some(spec);
    finish(cfg, report, outcome, None)
}

fn parabolic_vertex(p: [(f64, f64); 3]) -> Option<f64> {
    let [(x0, y0), (x1, y1), (x2, y2)] = p;
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    (den != 0.0).then(|| x1 - 0.5 * num / den)
}

fn sweep_row(cfg: &RunConfig, parameter: &str, value: f64) -> (SweepRow, Option<Error>) {
    let mut row = SweepRow {
        value,
        flagged: true,
        reason: None,
        signed_degree: None,
        absolute_degree: None,
        total_curvature: None,
        willmore_energy: None,
        dirichlet_energy: None,
        n_paper: None,
        n_sigma_lower: None,
        n_dacosta: None,
    };
    let mut cfg = cfg.clone();
    cfg.surface.params.insert(parameter.to_owned(), value);
    let chart = match cfg.chart() {
        Ok(c) => c,
        Err(e) => {
            row.reason = Some(e.to_string());
            return (row, None);
        }
    };
    match analyze_topology(&chart, cfg.grid, cfg.effective_truncation(&chart), &cfg.units) {
        Ok((topo, _)) => {
            row.flagged = false;
            row.signed_degree = Some(topo.degrees.signed_degree);
            row.absolute_degree = Some(topo.degrees.absolute_degree);
            row.total_curvature = Some(topo.total_curvature);
            row.willmore_energy = Some(topo.willmore_energy);
            row.dirichlet_energy = Some(topo.bogomolnyi.dirichlet_energy);
            row.n_paper = Some(topo.counts.n_paper);
            row.n_sigma_lower = Some(topo.counts.n_sigma_lower);
            row.n_dacosta = Some(topo.counts.n_dacosta);
            (row, None)
        }
        Err(e) => {
            row.reason = Some(e.to_string());
            let fatal = (e.exit_code() == 3).then_some(e);
            (row, fatal)
        }
    }
}

pub fn run_sweep(cfg: &RunConfig) -> Result<Outcome> {
    let sweep = cfg
        .sweep
        .clone()
        .ok_or_else(|| Error::Config("sweep needs --param, --from, --to and --steps".into()))?;
    let names = cfg.surface.kind.parameter_names();
    if !names.contains(&sweep.parameter.as_str()) {
        return Err(Error::Config(format!(
            "surface {} has no parameter '{}' (expected one of {:?})",
            cfg.surface.kind.name(),
            sweep.parameter,
            names
        )));
    }
    if sweep.steps < 2 || !sweep.from.is_finite() || !sweep.to.is_finite() {
        return Err(Error::Config("sweep needs finite --from/--to and at least 2 steps".into()));
    }
    let values: Vec<f64> = (0..sweep.steps)
        .map(|i| sweep.from + (sweep.to - sweep.from) * i as f64 / (sweep.steps - 1) as f64)
        .collect();
    let results: Vec<(SweepRow, Option<Error>)> = values
        .par_iter()
        .map(|&v| sweep_row(cfg, &sweep.parameter, v))
        .collect();
    let mut outcome = Outcome::default();
    let mut rows = Vec::with_capacity(results.len());
    for (row, fatal) in results {
        if let Some(e) = fatal {
            outcome.flag(3, format!("{} = {}: {e}", sweep.parameter, row.value));
        }
        rows.push(row);
    }
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| !r.flagged).collect();
    let degrees_constant = ok
        .windows(2)
        .all(|w| (w[0].signed_degree, w[0].absolute_degree) == (w[1].signed_degree, w[1].absolute_degree));
    if !degrees_constant {
        outcome.flag(3, "Gauss-map degrees change across the sweep");
    }
    let flagged_rows = rows.len() - ok.len();
    if flagged_rows > 0 {
        outcome.diagnostics.push(format!("{flagged_rows} row(s) flagged"));
    }
    let n_paper_minimizer = (|| {
        let best = (0..rows.len())
            .filter(|&i| !rows[i].flagged)
            .min_by(|&a, &b| rows[a].n_paper.unwrap().total_cmp(&rows[b].n_paper.unwrap()))?;
        if best == 0 || best + 1 >= rows.len() || rows[best - 1].flagged || rows[best + 1].flagged {
            return None;
        }
        let p = |i: usize| (rows[i].value, rows[i].n_paper.unwrap());
        parabolic_vertex([p(best - 1), p(best), p(best + 1)])
    })();
    let mut report = RunReport::new(CommandKind::Sweep, cfg.clone());
    report.sweep = Some(SweepSummary {
        parameter: sweep.parameter.clone(),
        rows,
        flagged_rows,
        degrees_constant,
        n_paper_minimizer,
    });
    finish(cfg, report, outcome, None)
}

pub fn surfaces_table() -> String {
    let mut out = String::from("surface        parameters  chi  compact\n");
    for kind in SurfaceKind::BUILT_IN {
        let chi = kind.euler_characteristic().map_or("-".to_owned(), |c| c.to_string());
        let compact = matches!(kind, SurfaceKind::Sphere | SurfaceKind::Torus);
        out.push_str(&format!(
            "{:<14} {:<11} {:<4} {}\n",
            kind.name(),
            kind.parameter_names().join(","),
            chi,
            if compact { "yes" } else { "no" }
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parabola_vertex() {
        let f = |x: f64| 3.0 * (x - 1.3).powi(2) + 2.0;
        let v = parabolic_vertex([(1.0, f(1.0)), (1.2, f(1.2)), (1.5, f(1.5))]).unwrap();
        assert_abs_diff_eq!(v, 1.3, epsilon = 1e-12);
    }
}
