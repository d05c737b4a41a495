//! Bound states of the surface Hamiltonian `-(hbar^2/2m) Delta_S + V`.
//!
//! Axisymmetric surfaces separate into angular-momentum channels. Each channel is a
//! 1D problem along the meridian, solved on a uniform arclength grid; a sparse 2D
//! discretization of the full operator serves as an independent cross-check.

mod cross2d;
mod discrete;
mod eigen;
mod meridian;
mod solver;
mod sparse;
mod variational;

use serde::{Deserialize, Serialize};

pub use cross2d::{assemble_2d, cross_check_2d, CrossCheck2d, Operator2d};
pub use discrete::{discretize_1d, discretize_weighted, DiscreteOperator, MIN_WELL_POINTS};
pub use eigen::{eigen_below, eigen_lowest, CyclicTridiagonal, MeridianMatrix, SymTridiagonal};
pub use meridian::{
    reduce_axisymmetric, AxisymmetricReduction, ArclengthMap, Boundary, FlatSystem, MeridianDomain,
    MeridianGrid, MeridianSample, WeightedSystem,
};
pub use solver::{
    channel_operator, count_bound_states, ChannelSpectrum, ConvergenceMeta, RefinementLevel,
    SpectralResult,
};
pub use sparse::{lowest_eigenpairs, CsrMatrix, EigenBlock};
pub use variational::{gaussian_rayleigh_quotient, variational_ground_bound, VariationalBound};

use crate::potential::PhysicalUnits;
use crate::surface::SurfaceChart;

/// Which potential enters the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialSelector {
    /// `-(hbar^2/8m)(kappa1 - kappa2)^2`.
    Dacosta,
    /// `-(hbar^2/2m)[(grad n)^2 + (div n)^2]`.
    Paper8,
    None,
}

impl PotentialSelector {
    pub fn name(self) -> &'static str {
        match self {
            Self::Dacosta => "dacosta",
            Self::Paper8 => "paper8",
            Self::None => "none",
        }
    }
}

impl std::str::FromStr for PotentialSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dacosta" => Ok(Self::Dacosta),
            "paper8" => Ok(Self::Paper8),
            "none" => Ok(Self::None),
            other => Err(format!("unknown potential '{other}' (expected dacosta, paper8 or none)")),
        }
    }
}

/// How a channel is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Discretization {
    /// Flat form after `chi = sqrt(rho) f` when the meridian has no pole, weighted otherwise.
    Auto,
    Liouville,
    Weighted,
}

/// An axisymmetric bound-state problem.
#[derive(Debug, Clone)]
pub struct SpectralProblem {
    pub chart: SurfaceChart,
    pub potential: PotentialSelector,
    pub units: PhysicalUnits,
    /// Arclength half-width of the meridian window; ignored for compact surfaces.
    pub truncation: Option<f64>,
    /// Nominal meridian grid points.
    pub points: usize,
    /// Highest angular momentum swept.
    pub ell_max: u32,
    /// Channels always swept, even when empty.
    pub ell_min: u32,
    /// Eigenvalues kept per channel in addition to the bound ones.
    pub levels: usize,
    pub discretization: Discretization,
}

impl SpectralProblem {
    pub fn new(chart: SurfaceChart, potential: PotentialSelector) -> Self {
        Self {
            chart,
            potential,
            units: PhysicalUnits::default(),
            truncation: None,
            points: 1024,
            ell_max: 64,
            ell_min: 1,
            levels: 8,
            discretization: Discretization::Auto,
        }
    }

    pub fn with_truncation(mut self, t: f64) -> Self {
        self.truncation = Some(t);
        self
    }

    /// `T = 20` length scales for open surfaces.
    pub fn with_default_truncation(mut self) -> Self {
        if !self.chart.is_compact() && self.truncation.is_none() {
            self.truncation = Some(20.0 * self.chart.length_scale());
        }
        self
    }

    pub fn with_points(mut self, n: usize) -> Self {
        self.points = n;
        self
    }

    pub fn with_units(mut self, units: PhysicalUnits) -> Self {
        self.units = units;
        self
    }

    pub fn with_ell_range(mut self, min: u32, max: u32) -> Self {
        self.ell_min = min;
        self.ell_max = max;
        self
    }

    pub fn with_discretization(mut self, d: Discretization) -> Self {
        self.discretization = d;
        self
    }

    /// Degeneracy of channel `ell` on a surface of revolution: `e^{+-i l phi}`.
    pub fn degeneracy(ell: u32) -> usize {
        if ell == 0 {
            1
        } else {
            2
        }
    }
}
