use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights for ∫₀¹ F(g) dg ≈ Σ w_j F(g_j).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSet {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureSet {
    /// Validates ascending interior nodes, positive weights and Σw = 1.
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::Shape(format!(
                "{} nodes and {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.iter().any(|g| !(*g > 0.0 && *g < 1.0)) || nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(
                "quadrature nodes must be ascending and inside (0, 1)".into(),
            ));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::Domain("quadrature weights must be positive".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "quadrature weights sum to {sum}, not 1"
            )));
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// First-kind Gauss–Chebyshev rule mapped onto g ∈ (0, 1).
///
/// Abscissae x_j = cos((2j−1)π/2n) become g_j = (x_j + 1)/2 and the
/// Chebyshev weight is folded back in, w_j ∝ (π/2n)·√(1 − x_j²). The raw
/// weights sum to (π/2n)/sin(π/2n) rather than 1 (0.65 % high at n = 8), so
/// they are rescaled to integrate constants exactly.
pub fn gauss_chebyshev(n: usize) -> Result<QuadratureSet> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "Gauss-Chebyshev rule needs n >= 2, got {n}"
        )));
    }
    let nf = n as f64;
    let mut pairs: Vec<(f64, f64)> = (1..=n)
        .map(|j| {
            let theta = (2 * j - 1) as f64 * PI / (2.0 * nf);
            let x = theta.cos();
            ((x + 1.0) / 2.0, PI / (2.0 * nf) * theta.sin())
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let nodes = pairs.iter().map(|p| p.0).collect();
    let weights = pairs.iter().map(|p| p.1 / total).collect();
    QuadratureSet::new(nodes, weights)
}
