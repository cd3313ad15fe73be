//! Forward and inverse transforms between coefficients and grid samples.
//!
//! Both directions separate the longitude sums (a plain DFT per ring) from
//! the colatitude contraction against the theta profiles, giving O(L^3)
//! work. Samples always represent the standard-chart trivialization `f_I`.

use super::eval::ThetaProfiles;
use super::SpinCoefficients;
use crate::error::{Error, Result};
use crate::geom::QuadratureGrid;
use crate::reduce::par_map;
use num_complex::Complex64;

/// Samples of a spin-`s` field on a quadrature grid, ring-major
/// (`samples[ring * n_phi + k]`).
#[derive(Debug, Clone)]
pub struct GridField {
    pub s: i32,
    pub grid: QuadratureGrid,
    pub samples: Vec<Complex64>,
}

impl GridField {
    pub fn zeros(s: i32, grid: QuadratureGrid) -> Self {
        let n = grid.n_nodes();
        GridField {
            s,
            grid,
            samples: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    #[inline]
    pub fn get(&self, ring: usize, k: usize) -> Complex64 {
        self.samples[ring * self.grid.n_phi + k]
    }

    /// Quadrature L2 norm squared.
    pub fn norm_sq(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.grid.n_theta() {
            let mut ring = 0.0;
            for k in 0..self.grid.n_phi {
                ring += self.get(i, k).norm_sqr();
            }
            acc += ring * self.grid.node_weight(i);
        }
        acc
    }

    /// Quadrature inner product `<self, other>`.
    pub fn inner(&self, other: &GridField) -> Complex64 {
        assert_eq!(self.grid.n_nodes(), other.grid.n_nodes());
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.grid.n_theta() {
            let mut ring = Complex64::new(0.0, 0.0);
            for k in 0..self.grid.n_phi {
                ring += self.get(i, k) * other.get(i, k).conj();
            }
            acc += ring * self.grid.node_weight(i);
        }
        acc
    }
}

/// Synthesize grid samples from coefficients. The grid must be exact at the
/// coefficients' band limit.
pub fn synthesis(coeffs: &SpinCoefficients, grid: &QuadratureGrid) -> Result<GridField> {
    grid.require_band_limit(coeffs.l_max())?;
    let s = coeffs.spin();
    let l_max = coeffs.l_max();
    let n_phi = grid.n_phi;
    let rings: Vec<Vec<Complex64>> = par_map(grid.n_theta(), |i| {
        let theta = grid.theta_nodes[i];
        let profiles = ThetaProfiles::new(s, l_max, theta);
        // contract over l for every m
        let li = l_max as i64;
        let mut ring_m = vec![Complex64::new(0.0, 0.0); (2 * li + 1) as usize];
        for (mi, m) in (-li..=li).enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in profiles.l_min(m)..=l_max {
                acc += coeffs.get(l, m) * profiles.get(l, m);
            }
            ring_m[mi] = acc;
        }
        // DFT onto the ring
        let mut out = vec![Complex64::new(0.0, 0.0); n_phi];
        for (k, o) in out.iter_mut().enumerate() {
            let phi = grid.phi(k);
            let mut acc = Complex64::new(0.0, 0.0);
            for (mi, m) in (-li..=li).enumerate() {
                acc += ring_m[mi] * Complex64::from_polar(1.0, m as f64 * phi);
            }
            *o = acc;
        }
        out
    });
    let mut samples = Vec::with_capacity(grid.n_theta() * n_phi);
    for ring in rings {
        samples.extend(ring);
    }
    Ok(GridField {
        s,
        grid: grid.clone(),
        samples,
    })
}

/// Forward transform: quadrature inner products against the basis, up to the
/// grid band limit.
pub fn analysis(field: &GridField) -> SpinCoefficients {
    let s = field.s;
    let l_max = field.grid.band_limit;
    let li = l_max as i64;
    let n_phi = field.grid.n_phi;
    let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
    // per-ring longitude DFT then the theta contraction
    let ring_contrib: Vec<Vec<Complex64>> = par_map(field.grid.n_theta(), |i| {
        let theta = field.grid.theta_nodes[i];
        let w = field.grid.theta_weights[i];
        let mut f_m = vec![Complex64::new(0.0, 0.0); (2 * li + 1) as usize];
        for (mi, m) in (-li..=li).enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n_phi {
                let phi = field.grid.phi(k);
                acc += field.get(i, k) * Complex64::from_polar(1.0, -(m as f64) * phi);
            }
            f_m[mi] = acc * dphi;
        }
        let profiles = ThetaProfiles::new(s, l_max, theta);
        let mut out = vec![Complex64::new(0.0, 0.0); coeff_len(s, l_max)];
        let mut idx = 0;
        for l in s.unsigned_abs()..=l_max {
            for m in -(l as i64)..=(l as i64) {
                out[idx] = f_m[(m + li) as usize] * (profiles.get(l, m) * w);
                idx += 1;
            }
        }
        out
    });
    let mut coeffs = SpinCoefficients::zeros(s, l_max).expect("grid implies valid band");
    let mut idx = 0;
    for l in s.unsigned_abs()..=l_max {
        for m in -(l as i64)..=(l as i64) {
            let mut acc = Complex64::new(0.0, 0.0);
            for ring in &ring_contrib {
                acc += ring[idx];
            }
            coeffs.set(l, m, acc);
            idx += 1;
        }
    }
    coeffs
}

fn coeff_len(s: i32, l_max: u32) -> usize {
    (l_max as usize + 1).pow(2) - (s.unsigned_abs() as usize).pow(2)
}

/// Forward transform restricted to `l <= target_l`, with an aliasing check:
/// if more than 1e-6 of the captured energy sits in the shells above
/// `target_l`, the field was probably not band-limited and the call fails.
pub fn analysis_checked(field: &GridField, target_l: u32) -> Result<SpinCoefficients> {
    let full = analysis(field);
    if target_l > full.l_max() {
        return Err(Error::BandLimitExceeded(format!(
            "target band limit {target_l} exceeds grid exactness {}",
            full.l_max()
        )));
    }
    let total = full.norm_sq();
    let mut tail = 0.0;
    for l in (target_l + 1)..=full.l_max() {
        tail += full.shell_energy(l);
    }
    if total > 0.0 && tail / total > 1e-6 {
        return Err(Error::BandLimitExceeded(format!(
            "energy fraction {:.3e} above shell {target_l}",
            tail / total
        )));
    }
    let mut out = SpinCoefficients::zeros(full.spin(), target_l)?;
    for l in out.l_min()..=target_l {
        for m in -(l as i64)..=(l as i64) {
            out.set(l, m, full.get(l, m));
        }
    }
    Ok(out)
}
