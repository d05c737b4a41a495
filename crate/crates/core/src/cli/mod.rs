//! The `gqp-lab` command line: `analyze`, `spectrum`, `sweep` and `surfaces`.

mod commands;
pub mod config;
pub mod output;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use commands::{run_analyze, run_spectrum, run_sweep, surfaces_table, Outcome};
pub use config::{EmitFlags, RunConfig, SpectralConfig, SurfaceConfig, SweepConfig};
pub use report::{CommandKind, PaperComparison, RunReport, SweepRow, SweepSummary, Verdict};

use crate::spectral::PotentialSelector;
use crate::surface::SurfaceKind;
use crate::topo::Resolution;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "gqp-lab", version, about = "Geometric quantum potential on surfaces: invariants, estimators and bound states")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curvature fields, Gauss-map degrees, Bogomolnyi check and state estimators.
    Analyze(RunArgs),
    /// Bound states of the surface Hamiltonian.
    Spectrum(RunArgs),
    /// Invariants and estimators over a range of one surface parameter.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Parameter to vary (e.g. R for the torus).
        #[arg(long)]
        param: Option<String>,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// List the built-in surfaces and their parameters.
    Surfaces,
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    #[arg(long)]
    pub surface: Option<SurfaceKind>,
    /// Catenoid throat radius.
    #[arg(long = "c")]
    pub c: Option<f64>,
    /// Torus major radius.
    #[arg(long = "R")]
    pub major: Option<f64>,
    /// Torus minor radius.
    #[arg(long = "r")]
    pub minor: Option<f64>,
    /// Bilayer neck radius.
    #[arg(long = "Rb")]
    pub neck: Option<f64>,
    /// Bilayer half-separation.
    #[arg(long = "h")]
    pub half_separation: Option<f64>,
    /// Sphere radius.
    #[arg(long = "a")]
    pub radius: Option<f64>,
    /// Meridian half-width for open surfaces.
    #[arg(long = "T")]
    pub truncation: Option<f64>,
    /// Quadrature grid, `NUxNV`.
    #[arg(long)]
    pub grid: Option<Resolution>,
    #[arg(long)]
    pub lmax: Option<u32>,
    /// Meridian points for the spectral solver.
    #[arg(long = "N")]
    pub points: Option<usize>,
    #[arg(long)]
    pub potential: Option<PotentialSelector>,
    #[arg(long)]
    pub hbar: Option<f64>,
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated outputs: json, csv, plot-data.
    #[arg(long)]
    pub emit: Option<EmitFlags>,
}

impl RunArgs {
    /// Applies the flags on top of `base` (or a fresh config when there is none).
    pub fn merge(&self, base: Option<RunConfig>) -> Result<RunConfig> {
        let mut cfg = match (base, self.surface) {
            (Some(mut cfg), Some(kind)) => {
                if cfg.surface.kind != kind {
                    cfg.surface.kind = kind;
                    cfg.surface.params.clear();
                }
                cfg
            }
            (Some(cfg), None) => cfg,
            (None, Some(kind)) => RunConfig::new(kind),
            (None, None) => return Err(Error::Config("no surface given: use --surface or a config file".into())),
        };
        let params = [
            ("c", self.c),
            ("R", self.major),
            ("r", self.minor),
            ("Rb", self.neck),
            ("h", self.half_separation),
            ("a", self.radius),
        ];
        for (name, value) in params {
            if let Some(v) = value {
                cfg.surface.params.insert(name.to_owned(), v);
            }
        }
        if let Some(t) = self.truncation {
            cfg.truncation = Some(t);
        }
        if let Some(g) = self.grid {
            cfg.grid = g;
        }
        if let Some(l) = self.lmax {
            cfg.spectral.lmax = l;
        }
        if let Some(n) = self.points {
            cfg.spectral.points = n;
        }
        if let Some(p) = self.potential {
            cfg.spectral.potential = p;
        }
        if self.hbar.is_some() || self.mass.is_some() {
            cfg.units = crate::potential::PhysicalUnits::new(
                self.hbar.unwrap_or(cfg.units.hbar),
                self.mass.unwrap_or(cfg.units.mass),
            )?;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        if let Some(e) = self.emit {
            cfg.emit = e;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn sweep_config(
    cfg: &mut RunConfig,
    param: &Option<String>,
    from: Option<f64>,
    to: Option<f64>,
    steps: Option<usize>,
) -> Result<()> {
    let mut sweep = cfg.sweep.clone().unwrap_or(SweepConfig {
        parameter: String::new(),
        from: f64::NAN,
        to: f64::NAN,
        steps: 0,
    });
    if let Some(p) = param {
        sweep.parameter = p.clone();
    }
    if let Some(x) = from {
        sweep.from = x;
    }
    if let Some(x) = to {
        sweep.to = x;
    }
    if let Some(s) = steps {
        sweep.steps = s;
    }
    cfg.sweep = Some(sweep);
    Ok(())
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let base = cli.config.as_deref().map(RunConfig::load).transpose()?;
    match &cli.command {
        Command::Analyze(args) => run_analyze(&args.merge(base)?),
        Command::Spectrum(args) => run_spectrum(&args.merge(base)?),
        Command::Sweep {
            run,
            param,
            from,
            to,
            steps,
        } => {
            let mut cfg = run.merge(base)?;
            sweep_config(&mut cfg, param, *from, *to, *steps)?;
            run_sweep(&cfg)
        }
        Command::Surfaces => {
            print!("{}", surfaces_table());
            Ok(Outcome::default())
        }
    }
}

/// Parses `args`, runs the command and maps the result to a process exit code:
/// 0 ok, 1 bad input, 2 non-converged or indeterminate, 3 invariant violation.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: could not configure {n} workers: {e}");
            return ExitCode::from(1);
        }
    }
    match execute(&cli) {
        Ok(outcome) => {
            for line in &outcome.diagnostics {
                eprintln!("{line}");
            }
            for path in &outcome.written {
                println!("wrote {}", path.display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
