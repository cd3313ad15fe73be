//! Gauss-Legendre colatitude nodes crossed with equispaced longitudes.
//!
//! With at least `L+1` colatitude nodes and `2L+1` longitudes the grid
//! integrates every product of two band-limited (degree <= L) spin profiles
//! exactly: the phi sum kills cross-m terms and the theta integrand is a
//! polynomial of degree at most 2L in cos(theta).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadratureGrid {
    /// Colatitudes of the rings, strictly inside (0, pi).
    pub theta_nodes: Vec<f64>,
    /// Gauss-Legendre weights in cos(theta); positive, summing to 2.
    pub theta_weights: Vec<f64>,
    /// Number of equispaced longitudes `phi_k = 2 pi k / n_phi`.
    pub n_phi: usize,
    /// Band limit the grid is exact for.
    pub band_limit: u32,
}

impl QuadratureGrid {
    #[inline]
    pub fn n_theta(&self) -> usize {
        self.theta_nodes.len()
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.theta_nodes.len() * self.n_phi
    }

    #[inline]
    pub fn phi(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n_phi as f64
    }

    /// Solid-angle weight of node (ring i, longitude k); independent of k.
    #[inline]
    pub fn node_weight(&self, i: usize) -> f64 {
        self.theta_weights[i] * 2.0 * PI / self.n_phi as f64
    }

    pub fn total_weight(&self) -> f64 {
        let w: f64 = self.theta_weights.iter().sum();
        w * 2.0 * PI
    }

    /// Quadrature of a scalar function given per-node.
    pub fn integrate<F: Fn(usize, usize) -> f64>(&self, f: F) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n_theta() {
            let mut ring = 0.0;
            for k in 0..self.n_phi {
                ring += f(i, k);
            }
            acc += ring * self.node_weight(i);
        }
        acc
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' via the three-term recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        // middle node is exactly zero
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Grid exact for band limit `l_max` (forced to at least 1).
pub fn build_quadrature(l_max: u32) -> QuadratureGrid {
    let l = l_max.max(1);
    let n_theta = (l + 1) as usize;
    let n_phi = (2 * l + 1) as usize;
    let (x, w) = gauss_legendre(n_theta);
    // descending in cos(theta) = ascending in theta
    let mut theta_nodes: Vec<f64> = x.iter().rev().map(|&c| c.acos()).collect();
    let theta_weights: Vec<f64> = w.iter().rev().copied().collect();
    // acos never returns an exact pole for GL nodes (they are interior), but
    // keep the invariant explicit
    for t in &mut theta_nodes {
        debug_assert!(*t > 0.0 && *t < PI);
    }
    QuadratureGrid {
        theta_nodes,
        theta_weights,
        n_phi,
        band_limit: l,
    }
}

impl QuadratureGrid {
    /// Grid compatibility check used by the transforms.
    pub fn require_band_limit(&self, l: u32) -> Result<()> {
        if l > self.band_limit {
            return Err(Error::BandLimitExceeded(format!(
                "grid is exact to l = {}, requested l = {}",
                self.band_limit, l
            )));
        }
        Ok(())
    }
}
