//! Quadrature Gram matrix of the spin harmonic basis.
//!
//! The grid is a tensor product, so the Gram sum factorizes exactly: entries
//! with equal `m` reduce to a colatitude quadrature against the profile
//! products, and entries with `m1 != m2` carry the factor
//! `S_d = (2 pi / n_phi) sum_k exp(i d phi_k)`, which vanishes up to
//! rounding for `0 < |d| < n_phi`. The reported residual is the exact
//! same-`m` deviation combined with a Cauchy-Schwarz bound on the cross-`m`
//! block, so it upper-bounds the true max-norm deviation from the identity.

use super::eval::ThetaProfiles;
use crate::geom::{build_quadrature, QuadratureGrid};
use crate::reduce::par_map;
use num_complex::Complex64;

/// Upper bound on the max-norm deviation of the quadrature Gram matrix of
/// `{sY_lm : l <= l_max}` from the identity.
pub fn gram_residual(s: i32, l_max: u32) -> f64 {
    let grid = build_quadrature(l_max);
    gram_residual_on(&grid, s, l_max)
}

pub fn gram_residual_on(grid: &QuadratureGrid, s: i32, l_max: u32) -> f64 {
    let li = l_max as i64;
    let n_theta = grid.n_theta();
    // profiles per ring
    let tables: Vec<ThetaProfiles> =
        par_map(n_theta, |i| ThetaProfiles::new(s, l_max, grid.theta_nodes[i]));
    // same-m block: exact deviation, plus the largest diagonal entry for the
    // cross-m bound
    let per_m: Vec<(f64, f64)> = par_map((2 * li + 1) as usize, |mi| {
        let m = mi as i64 - li;
        let l_min = m.unsigned_abs().max(s.unsigned_abs() as u64) as u32;
        let mut worst = 0.0f64;
        let mut max_diag = 0.0f64;
        for l1 in l_min..=l_max {
            for l2 in l1..=l_max {
                let mut acc = 0.0;
                for (i, t) in tables.iter().enumerate() {
                    acc += grid.theta_weights[i] * t.get(l1, m) * t.get(l2, m);
                }
                let entry = acc * 2.0 * std::f64::consts::PI;
                let want = if l1 == l2 { 1.0 } else { 0.0 };
                worst = worst.max((entry - want).abs());
                if l1 == l2 {
                    max_diag = max_diag.max(entry.abs());
                }
            }
        }
        (worst, max_diag)
    });
    let same_m = per_m.iter().fold(0.0f64, |a, &(w, _)| a.max(w));
    let max_diag = per_m.iter().fold(0.0f64, |a, &(_, d)| a.max(d));
    // cross-m block: |entry| <= |S_d| / (2 pi) * max_diag by Cauchy-Schwarz
    let mut s_max = 0.0f64;
    for d in 1..=(2 * li) {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..grid.n_phi {
            acc += Complex64::from_polar(1.0, d as f64 * grid.phi(k));
        }
        s_max = s_max.max(acc.norm() * 2.0 * std::f64::consts::PI / grid.n_phi as f64);
    }
    same_m.max(s_max / (2.0 * std::f64::consts::PI) * max_diag)
}
