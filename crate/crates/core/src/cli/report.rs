//! The versioned run report and its JSON encoding.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use super::config::RunConfig;
use crate::spectral::{SpectralResult, VariationalBound};
use crate::surface::SurfaceKind;
use crate::topo::{GridSamples, TopoReport};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Analyze,
    Spectrum,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

/// Extremes of the pointwise fields over the quadrature grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSummary {
    pub nodes: usize,
    pub v_dacosta: Range,
    pub v_paper8: Range,
    pub gauss: Range,
    pub mean: Range,
}

impl FieldSummary {
    pub fn from_samples(samples: &GridSamples) -> Self {
        let r = |f: fn(&crate::topo::NodeFields) -> f64| {
            let (min, max) = samples.min_max(f);
            Range { min, max }
        };
        Self {
            nodes: samples.nodes.len(),
            v_dacosta: r(|n| n.v_dacosta),
            v_paper8: r(|n| n.v_paper8),
            gauss: r(|n| n.gauss),
            mean: r(|n| n.mean),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    AtLeast,
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    /// An asserted relation does not hold.
    Fail,
    /// A heuristic estimate and an exact computation disagree; informational.
    Diverges,
}

/// One of the published per-geometry figures next to the computed value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaperComparison {
    pub claim: String,
    pub quantity: String,
    pub paper_value: f64,
    pub computed: f64,
    pub relation: Relation,
    pub tolerance: f64,
    /// Whether a failure is an error (estimators) or only reported (eigencounts).
    pub asserted: bool,
    pub agrees: bool,
    pub verdict: Verdict,
}

impl PaperComparison {
    pub fn new(claim: &str, quantity: &str, paper_value: f64, computed: f64, relation: Relation, tolerance: f64, asserted: bool) -> Self {
        let agrees = match relation {
            Relation::AtLeast => computed >= paper_value - tolerance,
            Relation::Equal => (computed - paper_value).abs() <= tolerance,
        };
        let verdict = match (agrees, asserted) {
            (true, _) => Verdict::Pass,
            (false, true) => Verdict::Fail,
            (false, false) => Verdict::Diverges,
        };
        Self {
            claim: claim.to_owned(),
            quantity: quantity.to_owned(),
            paper_value,
            computed,
            relation,
            tolerance,
            asserted,
            agrees,
            verdict,
        }
    }
}

/// The published lower bound on localized states for the three worked geometries.
pub fn paper_state_bound(kind: SurfaceKind) -> Option<f64> {
    match kind {
        SurfaceKind::Catenoid | SurfaceKind::BilayerNeck => Some(4.0),
        SurfaceKind::Torus => Some(8.0),
        _ => None,
    }
}

pub fn estimator_comparisons(kind: SurfaceKind, topo: &TopoReport) -> Vec<PaperComparison> {
    let Some(bound) = paper_state_bound(kind) else {
        return Vec::new();
    };
    let sweeps = if kind == SurfaceKind::Torus { 2.0 } else { 1.0 };
    let claim = "minimal number of topologically stable states";
    let tol = 1e-6;
    vec![
        PaperComparison::new(
            "normals sweep the sphere",
            "absolute_degree",
            sweeps,
            topo.degrees.absolute_degree as f64,
            Relation::Equal,
            0.0,
            true,
        ),
        PaperComparison::new(claim, "n_paper", bound, topo.counts.n_paper, Relation::AtLeast, tol, true),
        PaperComparison::new(claim, "n_sigma_lower", bound, topo.counts.n_sigma_lower, Relation::AtLeast, tol, true),
        PaperComparison::new(claim, "n_dacosta", bound, topo.counts.n_dacosta, Relation::AtLeast, tol, false),
    ]
}

pub fn eigencount_comparison(kind: SurfaceKind, spectrum: &SpectralResult) -> Option<PaperComparison> {
    paper_state_bound(kind).map(|bound| {
        PaperComparison::new(
            "minimal number of topologically stable states",
            "bound_count",
            bound,
            spectrum.bound_count as f64,
            Relation::AtLeast,
            0.0,
            false,
        )
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRow {
    pub value: f64,
    pub flagged: bool,
    pub reason: Option<String>,
    pub signed_degree: Option<i64>,
    pub absolute_degree: Option<i64>,
    pub total_curvature: Option<f64>,
    pub willmore_energy: Option<f64>,
    pub dirichlet_energy: Option<f64>,
    pub n_paper: Option<f64>,
    pub n_sigma_lower: Option<f64>,
    pub n_dacosta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSummary {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
    pub flagged_rows: usize,
    pub degrees_constant: bool,
    /// Parabolic estimate of the parameter value minimizing `n_paper`.
    pub n_paper_minimizer: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunStatus {
    pub exit_code: i32,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub timestamp: String,
    pub command: CommandKind,
    pub config: RunConfig,
    pub units: String,
    pub fields: Option<FieldSummary>,
    pub topology: Option<TopoReport>,
    pub spectrum: Option<SpectralResult>,
    pub variational: Option<VariationalBound>,
    pub sweep: Option<SweepSummary>,
    pub paper_comparison: Vec<PaperComparison>,
    pub status: RunStatus,
}

impl RunReport {
    pub fn new(command: CommandKind, config: RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME").to_owned(),
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            command,
            units: config.units.describe(),
            config,
            fields: None,
            topology: None,
            spectrum: None,
            variational: None,
            sweep: None,
            paper_comparison: Vec::new(),
            status: RunStatus {
                exit_code: 0,
                diagnostics: Vec::new(),
            },
        }
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        to_json_bytes(self)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let report: Self = serde_json::from_slice(bytes).map_err(|e| Error::Config(format!("report: {e}")))?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "report schema version {} is not supported (expected {SCHEMA_VERSION})",
                report.schema_version
            )));
        }
        Ok(report)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&bytes)
    }
}

/// Pretty JSON that writes every float with 17 significant digits.
struct SeventeenDigits(PrettyFormatter<'static>);

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SeventeenDigits(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Config(format!("serializing report: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

/// `{:.16e}`: 17 significant digits, exact round trip.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}
