//! Chart-aware evaluation and the shell projection kernel.

use super::eval::ThetaProfiles;
use super::wigner::WignerD;
use crate::error::{Error, Result};
use crate::geom::{Rotation, SpherePoint};
use num_complex::Complex64;

const POLE_TOL: f64 = 1e-12;

/// Values of `sY_{lm,R}(x)` for all `m` on one shell: the chart-`R`
/// trivialization, obtained by rotating the basis and evaluating through the
/// standard chart at `R^{-1} x`.
pub fn shell_values_chart(
    s: i32,
    l: u32,
    x: &SpherePoint,
    chart: &Rotation,
) -> Result<Vec<Complex64>> {
    let q = chart.inverse().apply(*x);
    if q.near_pole(POLE_TOL) {
        return Err(Error::PoleInChart);
    }
    let (theta, phi) = (q.theta(), q.phi());
    let profiles = ThetaProfiles::new(s, l, theta);
    let li = l as i64;
    let base: Vec<Complex64> = (-li..=li)
        .map(|mp| Complex64::from_polar(1.0, mp as f64 * phi) * profiles.get(l, mp))
        .collect();
    if chart.matrix() == Rotation::IDENTITY.matrix() {
        return Ok(base);
    }
    let d = WignerD::new(l, chart);
    let mut out = vec![Complex64::new(0.0, 0.0); base.len()];
    for (mi, m) in (-li..=li).enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (mpi, mp) in (-li..=li).enumerate() {
            acc += d.get(mp, m) * base[mpi];
        }
        out[mi] = acc;
    }
    Ok(out)
}

/// Single chart-`R` basis value `sY_{lm,R}(x)`.
pub fn eval_sylm_chart(
    s: i32,
    l: u32,
    m: i64,
    x: &SpherePoint,
    chart: &Rotation,
) -> Result<Complex64> {
    super::eval::check_indices(s, l, m)?;
    let vals = shell_values_chart(s, l, x, chart)?;
    Ok(vals[(m + l as i64) as usize])
}

/// Projection kernel of shell `l`:
/// `K^{ls}_{R1,R2}(x, y) = sum_m sY_{lm,R1}(x) conj(sY_{lm,R2}(y))`.
pub fn projection_kernel(
    s: i32,
    l: u32,
    x: &SpherePoint,
    y: &SpherePoint,
    r1: &Rotation,
    r2: &Rotation,
) -> Result<Complex64> {
    if (l as i64) < s.unsigned_abs() as i64 {
        return Err(Error::UndefinedHarmonic { s, l });
    }
    let u = shell_values_chart(s, l, x, r1)?;
    let v = shell_values_chart(s, l, y, r2)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, b) in u.iter().zip(&v) {
        acc += a * b.conj();
    }
    Ok(acc)
}
