//! One-dimensional quadrature rules and a compensated accumulator.

use std::f64::consts::TAU;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureRule {
    PeriodicTrapezoid,
    CompositeSimpson,
    GaussLegendre,
}

/// Nodes and weights of a 1D rule on a fixed interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1d {
    pub rule: QuadratureRule,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    /// `n` equispaced nodes on `[lo, lo + 2 pi)`, equal weights.
    pub fn periodic_trapezoid(n: usize, lo: f64) -> Self {
        let h = TAU / n as f64;
        Self {
            rule: QuadratureRule::PeriodicTrapezoid,
            nodes: (0..n).map(|i| lo + i as f64 * h).collect(),
            weights: vec![h; n],
        }
    }

    /// Gauss-Legendre with `n` interior nodes on `[a, b]`, ascending.
    pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Self {
        let n = NonZeroUsize::new(n).expect("at least one node");
        let rule = GaussLegendre::new(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut pairs: Vec<(f64, f64)> = rule
            .nodes()
            .zip(rule.weights())
            .map(|(&x, &w)| (mid + half * x, half * w))
            .collect();
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        let (nodes, weights) = pairs.into_iter().unzip();
        Self {
            rule: QuadratureRule::GaussLegendre,
            nodes,
            weights,
        }
    }

    /// Composite Simpson on `[a, b]`. An odd interval count is bumped to the next even one.
    pub fn composite_simpson(intervals: usize, a: f64, b: f64) -> Self {
        let m = intervals + intervals % 2;
        let h = (b - a) / m as f64;
        let nodes = (0..=m).map(|i| a + i as f64 * h).collect();
        let weights = (0..=m)
            .map(|i| {
                let c = if i == 0 || i == m {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                c * h / 3.0
            })
            .collect();
        Self {
            rule: QuadratureRule::CompositeSimpson,
            nodes,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let mut acc = NeumaierSum::default();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(x));
        }
        acc.total()
    }
}

/// Neumaier's improved Kahan summation. Sequential, so the result depends only on
/// the order of the terms.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}
