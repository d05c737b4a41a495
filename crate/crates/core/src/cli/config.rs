//! Run configuration: a TOML file mirroring the command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::potential::PhysicalUnits;
use crate::spectral::{PotentialSelector, SpectralProblem};
use crate::surface::{SurfaceChart, SurfaceKind};
use crate::topo::Resolution;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub kind: SurfaceKind,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    /// Nominal meridian grid points `N`.
    pub points: usize,
    /// Highest angular momentum swept.
    pub lmax: u32,
    pub potential: PotentialSelector,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            points: 1024,
            lmax: 64,
            potential: PotentialSelector::Dacosta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitFlags {
    pub json: bool,
    pub csv: bool,
    /// Whitespace-separated `fields.dat` with blank lines between meridian blocks.
    #[serde(rename = "plot-data")]
    pub plot_data: bool,
}

impl Default for EmitFlags {
    fn default() -> Self {
        Self {
            json: true,
            csv: true,
            plot_data: false,
        }
    }
}

impl std::str::FromStr for EmitFlags {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut flags = Self {
            json: false,
            csv: false,
            plot_data: false,
        };
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            match item {
                "json" => flags.json = true,
                "csv" => flags.csv = true,
                "plot-data" | "plot" => flags.plot_data = true,
                other => return Err(format!("unknown emit target '{other}' (expected json, csv, plot-data)")),
            }
        }
        Ok(flags)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub units: PhysicalUnits,
    #[serde(default, with = "resolution_text")]
    pub grid: Resolution,
    /// Half-width of the meridian window for open surfaces; defaults to 20 length scales.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<f64>,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub emit: EmitFlags,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

fn default_out() -> PathBuf {
    PathBuf::from("gqp-out")
}

mod resolution_text {
    use super::Resolution;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Resolution, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Resolution, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl RunConfig {
    pub fn new(kind: SurfaceKind) -> Self {
        Self {
            surface: SurfaceConfig {
                kind,
                params: BTreeMap::new(),
            },
            units: PhysicalUnits::default(),
            grid: Resolution::default(),
            truncation: None,
            spectral: SpectralConfig::default(),
            out: default_out(),
            emit: EmitFlags::default(),
            sweep: None,
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.surface.params.insert(name.to_owned(), value);
        self
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Rejects parameters the surface does not take.
    pub fn validate(&self) -> Result<()> {
        let names = self.surface.kind.parameter_names();
        if let Some(extra) = self.surface.params.keys().find(|k| !names.contains(&k.as_str())) {
            return Err(Error::Config(format!(
                "surface {} does not take parameter '{extra}' (expected {:?})",
                self.surface.kind.name(),
                names
            )));
        }
        if let Some(t) = self.truncation {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidTruncation(t));
            }
        }
        Ok(())
    }

    pub fn chart(&self) -> Result<SurfaceChart> {
        self.validate()?;
        Ok(SurfaceChart::from_params(self.surface.kind, |name| {
            self.surface.params.get(name).copied()
        })?)
    }

    /// Explicit truncation, or 20 length scales for open surfaces.
    pub fn effective_truncation(&self, chart: &SurfaceChart) -> Option<f64> {
        if chart.is_compact() {
            None
        } else {
            Some(self.truncation.unwrap_or(20.0 * chart.length_scale()))
        }
    }

    pub fn spectral_problem(&self, chart: &SurfaceChart) -> SpectralProblem {
        let mut p = SpectralProblem::new(chart.clone(), self.spectral.potential)
            .with_units(self.units)
            .with_points(self.spectral.points)
            .with_ell_range(1, self.spectral.lmax);
        p.truncation = self.effective_truncation(chart);
        p
    }
}
