//! Quadrature grids on the unit interval.
//!
//! Weights are normalized so that `Σ w_i f(x_i) ≈ ∫₀¹ f(x) dx`, i.e. the
//! discrete form of `(1/L)∫₀ᴸ f(z) dz`.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    GaussLegendre,
    Midpoint,
    /// User supplied nodes and weights.
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    rule: QuadratureRule,
}

/// Builds an `n_points` grid on `(0, 1)` with the requested rule.
pub fn make_grid(n_points: usize, rule: QuadratureRule) -> Result<SpatialGrid> {
    if n_points < 2 {
        return Err(invalid(format!("grid needs at least 2 points, got {n_points}")));
    }
    let (nodes, weights) = match rule {
        QuadratureRule::Midpoint => {
            let h = 1.0 / n_points as f64;
            let nodes = (0..n_points).map(|i| (i as f64 + 0.5) * h).collect();
            (nodes, vec![h; n_points])
        }
        QuadratureRule::GaussLegendre => {
            let (t, w) = gauss_legendre(n_points);
            let nodes = t.iter().map(|&t| 0.5 * (1.0 + t)).collect();
            let mut weights: Vec<f64> = w.iter().map(|&w| 0.5 * w).collect();
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            (nodes, weights)
        }
        QuadratureRule::Custom => {
            return Err(invalid("custom grids are built with SpatialGrid::custom"));
        }
    };
    Ok(SpatialGrid { nodes, weights, rule })
}

impl SpatialGrid {
    /// Wraps explicit nodes and weights. Nodes must be strictly increasing in
    /// `(0, 1)`, weights positive with unit sum.
    pub fn custom(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != weights.len() {
            return Err(invalid("custom grid needs at least 2 nodes and one weight per node"));
        }
        if nodes.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            return Err(invalid("grid nodes must lie in (0, 1)"));
        }
        if nodes.windows(2).any(|p| p[1] <= p[0]) {
            return Err(invalid("grid nodes must be strictly increasing"));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(invalid("grid weights must be positive"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("grid weights sum to {total}, expected 1")));
        }
        Ok(Self { nodes, weights, rule: QuadratureRule::Custom })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    /// `Σ w_i f(x_i)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// True when node `i` mirrors node `n-1-i` about `x = 1/2` with equal weight.
    pub fn is_symmetric(&self) -> bool {
        let n = self.len();
        (0..n / 2).all(|i| {
            let j = n - 1 - i;
            (self.nodes[i] + self.nodes[j] - 1.0).abs() <= 1e-14
                && (self.weights[i] - self.weights[j]).abs() <= 1e-14 * self.weights[i].max(1e-300)
        })
    }

    pub(crate) fn require_symmetric(&self) -> Result<()> {
        if self.is_symmetric() {
            Ok(())
        } else {
            Err(Error::UnsupportedGrid("grid is not symmetric about x = 0.5".into()))
        }
    }
}

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
///
/// Newton iteration on `P_n` from Tricomi's initial guess; nodes are computed
/// for one half and mirrored, so the rule is exactly symmetric.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for k in 0..n.div_ceil(2) {
        // k-th largest root
        let theta = PI * (4.0 * k as f64 + 3.0) / (4.0 * nf + 2.0);
        let mut t = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, t);
            dp = d;
            let step = p / d;
            t -= step;
            if step.abs() <= 1e-16 * t.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, t);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        nodes[n - 1 - k] = t;
        nodes[k] = -t;
        weights[n - 1 - k] = w;
        weights[k] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}
