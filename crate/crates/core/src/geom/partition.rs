//! Iso-latitude equal-area-style partitions.
//!
//! The sphere is cut into `ceil(2 pi / tau)` colatitude bands of equal height
//! (`tau = b a^j` is the target cell diameter, so the height is at most
//! `tau / 2`), each band is split into congruent longitude cells narrow
//! enough that height + width stays below `tau`. The two bands touching the
//! poles are kept as single spherical caps. Areas and diameters are closed
//! form, which is what makes the admissibility constants auditable.

use super::{geodesic_distance, Rotation, SpherePoint};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

/// Chart assignment for a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChartTag {
    /// Standard chart (sphere minus z poles).
    Identity,
    /// Fixed 90-degree rotation about the x axis, for cells whose closure
    /// touches a z pole.
    PolarX,
}

impl ChartTag {
    pub fn rotation(&self) -> Rotation {
        match self {
            ChartTag::Identity => Rotation::IDENTITY,
            ChartTag::PolarX => Rotation::about_x(FRAC_PI_2),
        }
    }
}

/// One colatitude band of congruent cells.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Band {
    pub theta_lo: f64,
    pub theta_hi: f64,
    /// Number of equal longitude cells; 1 for the polar caps.
    pub n_cells: usize,
    /// Exact spherical area of each cell.
    pub cell_area: f64,
    /// Exact diameter of each cell.
    pub diameter: f64,
    /// True for the two cap bands.
    pub polar: bool,
}

impl Band {
    #[inline]
    pub fn delta_phi(&self) -> f64 {
        2.0 * PI / self.n_cells as f64
    }

    #[inline]
    pub fn theta_mid(&self) -> f64 {
        0.5 * (self.theta_lo + self.theta_hi)
    }

    pub fn chart(&self) -> ChartTag {
        if self.polar {
            ChartTag::PolarX
        } else {
            ChartTag::Identity
        }
    }
}

/// Materialized cell view.
#[derive(Debug, Clone)]
pub struct Cell {
    pub center: SpherePoint,
    pub area: f64,
    pub diameter: f64,
    pub chart: ChartTag,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Partition {
    pub j: i32,
    pub a: f64,
    pub b: f64,
    /// Scale diameter bound `tau = b a^j`.
    pub tau: f64,
    pub bands: Vec<Band>,
}

/// Diameter of the closed spherical rectangle
/// `[theta_lo, theta_hi] x [0, dphi]`, `dphi <= pi`.
///
/// The maximum distance is attained at corner pairs or, when the band crosses
/// the equator, between opposite edge points on the equator.
fn rect_diameter(theta_lo: f64, theta_hi: f64, dphi: f64) -> f64 {
    let p = |t: f64, f: f64| SpherePoint::from_angles(t, f);
    let mut d: f64 = 0.0;
    let c = [
        (theta_lo, 0.0),
        (theta_lo, dphi),
        (theta_hi, 0.0),
        (theta_hi, dphi),
    ];
    for i in 0..4 {
        for k in (i + 1)..4 {
            let (t1, f1) = c[i];
            let (t2, f2) = c[k];
            d = d.max(geodesic_distance(&p(t1, f1), &p(t2, f2)));
        }
    }
    if theta_lo < FRAC_PI_2 && theta_hi > FRAC_PI_2 {
        d = d.max(geodesic_distance(&p(FRAC_PI_2, 0.0), &p(FRAC_PI_2, dphi)));
    }
    d
}

/// Iso-latitude partition at scale `j` for dilation base `a` and
/// discretization parameter `b`; every cell has diameter at most `b a^j`.
pub fn build_partition(j: i32, a: f64, b: f64) -> Result<Partition> {
    assert!(a > 1.0, "dilation base must exceed 1");
    assert!(b > 0.0 && b < 1.0, "b must lie in (0,1)");
    let tau = b * a.powi(j);
    if tau > PI {
        return Err(Error::ScaleTooCoarse { tau });
    }
    // band height <= tau/2; at least 4 bands so the caps stay genuine caps
    let n_bands = ((2.0 * PI / tau).ceil() as usize).max(4);
    let dtheta = PI / n_bands as f64;
    let mut bands = Vec::with_capacity(n_bands);
    for i in 0..n_bands {
        let lo = i as f64 * dtheta;
        let hi = if i + 1 == n_bands {
            PI
        } else {
            (i + 1) as f64 * dtheta
        };
        let polar = i == 0 || i + 1 == n_bands;
        if polar {
            // single cap cell; diameter is the full cap width
            let area = 2.0 * PI * if i == 0 { 1.0 - hi.cos() } else { 1.0 + lo.cos() };
            let diameter = if i == 0 { 2.0 * hi } else { 2.0 * (PI - lo) };
            bands.push(Band {
                theta_lo: lo,
                theta_hi: hi,
                n_cells: 1,
                cell_area: area,
                diameter,
                polar: true,
            });
        } else {
            // widest latitude of the band
            let sin_star = if lo < FRAC_PI_2 && hi > FRAC_PI_2 {
                1.0
            } else {
                lo.sin().max(hi.sin())
            };
            let n_cells = ((4.0 * PI * sin_star / tau).ceil() as usize).max(1);
            let dphi = 2.0 * PI / n_cells as f64;
            let area = dphi * (lo.cos() - hi.cos());
            let diameter = rect_diameter(lo, hi, dphi);
            bands.push(Band {
                theta_lo: lo,
                theta_hi: hi,
                n_cells,
                cell_area: area,
                diameter,
                polar: false,
            });
        }
    }
    Ok(Partition { j, a, b, tau, bands })
}

impl Partition {
    pub fn n_cells(&self) -> usize {
        self.bands.iter().map(|b| b.n_cells).sum()
    }

    pub fn total_area(&self) -> f64 {
        self.bands
            .iter()
            .map(|b| b.cell_area * b.n_cells as f64)
            .sum()
    }

    pub fn max_diameter(&self) -> f64 {
        self.bands.iter().fold(0.0f64, |m, b| m.max(b.diameter))
    }

    pub fn min_cell_area(&self) -> f64 {
        self.bands
            .iter()
            .fold(f64::INFINITY, |m, b| m.min(b.cell_area))
    }

    /// Center of cell `k` within band `band`: band-midpoint colatitude and
    /// cell-midpoint longitude.
    pub fn cell_center(&self, band: usize, k: usize) -> SpherePoint {
        let b = &self.bands[band];
        let phi = (k as f64 + 0.5) * b.delta_phi();
        SpherePoint::from_angles(b.theta_mid(), phi)
    }

    /// Flattened cell list, band-major.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.bands.iter().enumerate().flat_map(move |(bi, band)| {
            (0..band.n_cells).map(move |k| Cell {
                center: self.cell_center(bi, k),
                area: band.cell_area,
                diameter: band.diameter,
                chart: band.chart(),
            })
        })
    }
}

/// Admissibility constants of this construction: the scale cutoff
/// `delta0 = pi/2` and the area constant `c0` such that every cell of every
/// partition with `tau < delta0` has area at least `c0 tau^2`.
///
/// `c0` is measured once over a geometric sweep of scales and cached; the
/// per-partition invariant is re-asserted in tests rather than assumed.
pub fn admissibility_constants() -> (f64, f64) {
    static CONSTS: OnceLock<(f64, f64)> = OnceLock::new();
    *CONSTS.get_or_init(|| {
        let delta0 = FRAC_PI_2;
        let mut c0 = f64::INFINITY;
        let mut tau = delta0 * 0.999;
        while tau > 1e-3 {
            // only tau matters for the geometry; realize it as b * a^j
            let part = if tau < 1.0 {
                build_partition(0, 1.5, tau).expect("tau <= pi")
            } else {
                build_partition(1, tau / 0.5, 0.5).expect("tau <= pi")
            };
            let ratio = part.min_cell_area() / (part.tau * part.tau);
            c0 = c0.min(ratio);
            tau *= 0.618;
        }
        // small safety margin against scales between sweep samples
        (0.98 * c0, delta0)
    })
}
