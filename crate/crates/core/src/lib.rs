#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

//! Geometric quantum potential laboratory.
//!
//! Computes the curvature-induced potential of a particle confined to a surface,
//! rewrites it in terms of the unit normal field, integrates the resulting
//! sigma-model densities into Gauss-map degrees and Bogomolnyi-type bounds, and
//! solves the surface Schrodinger problem to count bound states.

pub mod cli;
pub mod error;
pub mod potential;
pub mod quadrature;
pub mod spectral;
pub mod surface;
pub mod topo;

pub use error::{Error, Result};
