//! Needlet kernels and real-space localization probes.

use super::filter::NeedletFilter;
use crate::error::{Error, Result};
use crate::geom::{geodesic_distance, Rotation, SpherePoint};
use crate::harmonics::eval::ThetaProfiles;
use crate::harmonics::{eigenvalue, kernel::shell_values_chart};
use num_complex::Complex64;

/// Needlet kernel `K_t(x, y) = sum_{l >= |s|} f(t^2 lambda_ls) K^{ls}(x, y)`,
/// through charts `r1` (in `x`) and `r2` (in `y`). The truncation at `l_max`
/// must cover the filter support.
pub fn needlet_kernel(
    filter: &NeedletFilter,
    t: f64,
    s: i32,
    x: &SpherePoint,
    y: &SpherePoint,
    r1: &Rotation,
    r2: &Rotation,
    l_max: u32,
) -> Result<Complex64> {
    let (_, hi) = filter.support();
    if eigenvalue(s, l_max + 1)? * t * t < hi {
        return Err(Error::BandLimitExceeded(format!(
            "filter support at t = {t} extends beyond l = {l_max}"
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for l in s.unsigned_abs()..=l_max {
        let w = filter.eval(t * t * eigenvalue(s, l)?);
        if w == 0.0 {
            continue;
        }
        let u = shell_values_chart(s, l, x, r1)?;
        let v = shell_values_chart(s, l, y, r2)?;
        let mut k = Complex64::new(0.0, 0.0);
        for (a, b) in u.iter().zip(&v) {
            k += a * b.conj();
        }
        acc += k * w;
    }
    Ok(acc)
}

/// Fast standard-chart kernel along a ring: evaluates `K_t(x, y_i)` for `x`
/// and all `y_i` sharing colatitudes, reusing the theta profiles.
fn kernel_identity_chart(
    filter: &NeedletFilter,
    t: f64,
    s: i32,
    x: &SpherePoint,
    ys: &[SpherePoint],
    l_max: u32,
) -> Vec<Complex64> {
    let mut shells = Vec::new();
    for l in s.unsigned_abs()..=l_max {
        let w = filter.eval(t * t * eigenvalue(s, l).expect("l >= |s|"));
        if w > 0.0 {
            shells.push((l, w));
        }
    }
    let px = ThetaProfiles::new(s, l_max, x.theta());
    let phix = x.phi();
    ys.iter()
        .map(|y| {
            let py = ThetaProfiles::new(s, l_max, y.theta());
            let dphi = phix - y.phi();
            let mut acc = Complex64::new(0.0, 0.0);
            for &(l, w) in &shells {
                let mut k = Complex64::new(0.0, 0.0);
                for m in -(l as i64)..=(l as i64) {
                    k += Complex64::from_polar(px.get(l, m) * py.get(l, m), m as f64 * dphi);
                }
                acc += k * w;
            }
            acc
        })
        .collect()
}

/// One row of the decay table.
#[derive(Debug, Clone, Copy)]
pub struct DecayRow {
    pub distance: f64,
    pub d_over_t: f64,
    pub abs_kernel: f64,
}

/// Far zone of the decay fit, in units of `d/t`: past the main lobe and
/// leading sidelobes of the kernel.
pub const FAR_ZONE: (f64, f64) = (10.0, 50.0);

#[derive(Debug, Clone)]
pub struct LocalizationReport {
    pub t: f64,
    /// `|K_t(x, x)|`.
    pub amplitude: f64,
    pub rows: Vec<DecayRow>,
    /// Decay exponent over the far zone: the kernel oscillates, so the fit
    /// runs through the binned local maxima of `|K|` (the envelope) in
    /// log-log coordinates.
    pub far_slope: f64,
}

/// Diagonal kernel value `K_t(x, x) = sum_l f(t^2 lambda) (2l+1)/4pi`,
/// independent of the point.
pub fn kernel_amplitude(filter: &NeedletFilter, t: f64, s: i32) -> f64 {
    let (_, hi) = filter.support();
    let s_abs = s.unsigned_abs();
    let lam_hi = hi / (t * t);
    let l_hi = ((lam_hi + (s_abs as f64) * (s_abs as f64 + 1.0)).sqrt() + 2.0) as u32;
    let mut acc = 0.0;
    for l in s_abs..=l_hi {
        acc += filter.eval(t * t * eigenvalue(s, l).expect("l >= |s|"))
            * (2.0 * l as f64 + 1.0)
            / (4.0 * std::f64::consts::PI);
    }
    acc
}

/// Samples `|K_t|` along a geodesic from `x` (log-spaced out to 50 needlet
/// widths or the antipode, whichever is closer) and fits the far-zone decay
/// envelope.
pub fn localization_probe(
    filter: &NeedletFilter,
    t: f64,
    s: i32,
    x: &SpherePoint,
    n_samples: usize,
    l_max: u32,
) -> Result<LocalizationReport> {
    let (_, hi) = filter.support();
    if eigenvalue(s, l_max + 1)? * t * t < hi {
        return Err(Error::BandLimitExceeded(format!(
            "filter support at t = {t} extends beyond l = {l_max}"
        )));
    }
    assert!(n_samples >= 32);
    // walk along the great circle through x in the southward direction
    let v = x.vector();
    let cz = v[2];
    let tau = [cz * v[0], cz * v[1], cz * v[2] - 1.0];
    let tn = (tau[0] * tau[0] + tau[1] * tau[1] + tau[2] * tau[2]).sqrt();
    if tn < 1e-12 {
        return Err(Error::PoleInChart);
    }
    let tau = [tau[0] / tn, tau[1] / tn, tau[2] / tn];
    let x_lo = 0.2f64;
    let x_hi = (FAR_ZONE.1 * 1.05).min(3.0 / t);
    let ys: Vec<SpherePoint> = (0..n_samples)
        .map(|i| {
            let d = t * x_lo * (x_hi / x_lo).powf(i as f64 / (n_samples - 1) as f64);
            let (sd, cd) = d.sin_cos();
            SpherePoint::new(
                cd * v[0] + sd * tau[0],
                cd * v[1] + sd * tau[1],
                cd * v[2] + sd * tau[2],
            )
            .expect("unit by construction")
        })
        .collect();
    let amplitude = kernel_identity_chart(filter, t, s, x, &[*x], l_max)[0].norm();
    let values = kernel_identity_chart(filter, t, s, x, &ys, l_max);
    let rows: Vec<DecayRow> = ys
        .iter()
        .zip(&values)
        .map(|(y, v)| {
            let d = geodesic_distance(x, y);
            DecayRow {
                distance: d,
                d_over_t: d / t,
                abs_kernel: v.norm(),
            }
        })
        .collect();
    Ok(LocalizationReport {
        t,
        amplitude,
        far_slope: envelope_slope(&rows, amplitude),
        rows,
    })
}

/// Log-log slope through binned envelope maxima over the far zone.
fn envelope_slope(rows: &[DecayRow], amplitude: f64) -> f64 {
    const N_BINS: usize = 10;
    let (lo, hi) = FAR_ZONE;
    let floor = amplitude * 1e-12;
    let mut env = vec![0.0f64; N_BINS];
    let mut pos = vec![0.0f64; N_BINS];
    for r in rows {
        if r.d_over_t < lo || r.d_over_t > hi || r.abs_kernel <= floor {
            continue;
        }
        let b = (((r.d_over_t / lo).ln() / (hi / lo).ln()) * N_BINS as f64).floor() as usize;
        let b = b.min(N_BINS - 1);
        if r.abs_kernel > env[b] {
            env[b] = r.abs_kernel;
            pos[b] = r.d_over_t;
        }
    }
    let pts: Vec<(f64, f64)> = pos
        .iter()
        .zip(&env)
        .filter(|(_, &v)| v > 0.0)
        .map(|(&x, &v)| (x.ln(), v.ln()))
        .collect();
    if pts.len() < 3 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
