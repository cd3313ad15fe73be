//! Monte Carlo experiments: the central-limit trend of the scale statistic,
//! wavelet-coefficient uncorrelation across points, and the calibration of
//! the standardized test.

use super::normal::ks_distance_normal;
use super::{gamma_hat_moments, s_statistic};
use crate::error::Result;
use crate::fields::{sample_field_replicate, sampled_shell_energies, PowerSpectrum};
use crate::geom::SpherePoint;
use crate::harmonics::eval::ThetaProfiles;
use crate::harmonics::eigenvalue;
use crate::needlet::NeedletFilter;
use crate::reduce::par_map;
use num_complex::Complex64;

/// Shells with nonzero filter weight at scale `j`, with their `f` values.
fn active_shells(spec: &PowerSpectrum, filter: &NeedletFilter, j: i32) -> Vec<(u32, f64)> {
    let t2 = filter.a().powi(2 * j);
    (spec.l_min()..=spec.l_max)
        .filter_map(|l| {
            let w = filter.eval(t2 * eigenvalue(spec.s, l).expect("l >= |s|"));
            (w > 0.0).then_some((l, w))
        })
        .collect()
}

/// Per-replicate spectral statistics for several scales at once, drawn with
/// the keyed coefficient streams. `spectrum_scale` multiplies the sampling
/// spectrum (the model moments are taken at scale 1), which is how the
/// mis-specified alternative is generated.
fn gamma_hat_samples(
    spec: &PowerSpectrum,
    filter: &NeedletFilter,
    j_list: &[i32],
    n_reps: usize,
    seed: u64,
    spectrum_scale: f64,
) -> Vec<Vec<f64>> {
    let per_scale: Vec<Vec<(u32, f64)>> = j_list
        .iter()
        .map(|&j| active_shells(spec, filter, j))
        .collect();
    let mut union: Vec<u32> = per_scale.iter().flatten().map(|&(l, _)| l).collect();
    union.sort_unstable();
    union.dedup();
    // per replicate: shell energies on the union, then the weighted sums
    let rows: Vec<Vec<f64>> = par_map(n_reps, |rep| {
        let energies = sampled_shell_energies(spec, seed, rep as u64, &union, spectrum_scale);
        per_scale
            .iter()
            .map(|shells| {
                let mut acc = 0.0;
                for &(l, w) in shells {
                    let idx = union.binary_search(&l).expect("shell in union");
                    acc += w * w * energies[idx];
                }
                acc
            })
            .collect()
    });
    // transpose to per-scale sample vectors
    let mut out = vec![Vec::with_capacity(n_reps); j_list.len()];
    for row in rows {
        for (k, v) in row.into_iter().enumerate() {
            out[k].push(v);
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct CltScale {
    pub j: i32,
    pub n_shells: usize,
    /// Number of independent Gaussian squares entering the statistic.
    pub dof: usize,
    pub ks: f64,
    /// Standardized statistic samples.
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CltReport {
    pub scales: Vec<CltScale>,
}

/// Simulates the spectral statistic on each scale, standardizes with the
/// closed-form moments, and reports the Kolmogorov-Smirnov distance to
/// N(0,1). More negative scales cover more shells and must drift toward
/// Gaussianity.
pub fn clt_experiment(
    spec: &PowerSpectrum,
    filter: &NeedletFilter,
    j_list: &[i32],
    n_reps: usize,
    seed: u64,
) -> CltReport {
    assert!(n_reps >= 100);
    let samples = gamma_hat_samples(spec, filter, j_list, n_reps, seed, 1.0);
    let scales = j_list
        .iter()
        .zip(samples)
        .map(|(&j, raw)| {
            let (mean, var) = gamma_hat_moments(spec, filter, j);
            let sd = var.sqrt();
            let mut std: Vec<f64> = raw.iter().map(|g| (g - mean) / sd).collect();
            let ks = ks_distance_normal(&mut std);
            let shells = active_shells(spec, filter, j);
            let dof = shells.iter().map(|&(l, _)| 2 * l as usize + 1).sum();
            CltScale {
                j,
                n_shells: shells.len(),
                dof,
                ks,
                samples: std,
            }
        })
        .collect();
    CltReport { scales }
}

#[derive(Debug, Clone)]
pub struct CorrelationRow {
    pub j: i32,
    pub pair: usize,
    pub distance: f64,
    pub d_over_t: f64,
    /// Modulus of the empirical complex correlation of the wavelet
    /// coefficients at the two points.
    pub corr: f64,
    /// Approximate standard error `(1 - corr^2) / sqrt(n)`.
    pub se: f64,
}

/// Empirical correlation of wavelet coefficients at point pairs across
/// scales. Coefficients are computed through the standard chart; the
/// correlation modulus is chart independent.
pub fn uncorrelation_experiment(
    spec: &PowerSpectrum,
    filter: &NeedletFilter,
    j_list: &[i32],
    pairs: &[(SpherePoint, SpherePoint)],
    n_reps: usize,
    seed: u64,
) -> Result<Vec<CorrelationRow>> {
    assert!(n_reps >= 16);
    let mut rows = Vec::new();
    for &j in j_list {
        let t = filter.a().powi(j);
        let shells = active_shells(spec, filter, j);
        if shells.is_empty() {
            continue;
        }
        let l_hi = shells.iter().map(|&(l, _)| l).max().expect("nonempty");
        // clip the sampling spectrum to the active band
        let clipped = PowerSpectrum::from_values(
            spec.s,
            (spec.l_min()..=l_hi).map(|l| spec.get(l)).collect(),
            &spec.model,
        )?;
        // weighted basis values at each pair point
        let weights = |p: &SpherePoint| -> Vec<Complex64> {
            let profiles = ThetaProfiles::new(spec.s, l_hi, p.theta());
            let mut w = Vec::new();
            for &(l, f) in &shells {
                for m in -(l as i64)..=(l as i64) {
                    w.push(
                        Complex64::from_polar(1.0, m as f64 * p.phi()) * (profiles.get(l, m) * f),
                    );
                }
            }
            w
        };
        let pair_weights: Vec<(Vec<Complex64>, Vec<Complex64>)> = pairs
            .iter()
            .map(|(x, y)| (weights(x), weights(y)))
            .collect();
        // accumulate cross and auto moments over replicates
        let moments: Vec<(Complex64, f64, f64)> = {
            let per_rep: Vec<Vec<(Complex64, f64, f64)>> = par_map(n_reps, |rep| {
                let coeffs = sample_field_replicate(&clipped, seed, rep as u64).coeffs;
                pair_weights
                    .iter()
                    .map(|(wx, wy)| {
                        let mut bx = Complex64::new(0.0, 0.0);
                        let mut by = Complex64::new(0.0, 0.0);
                        let mut idx = 0;
                        for &(l, _) in &shells {
                            for m in -(l as i64)..=(l as i64) {
                                let a = coeffs.get(l, m);
                                bx += a * wx[idx];
                                by += a * wy[idx];
                                idx += 1;
                            }
                        }
                        (bx * by.conj(), bx.norm_sqr(), by.norm_sqr())
                    })
                    .collect()
            });
            let mut acc = vec![(Complex64::new(0.0, 0.0), 0.0f64, 0.0f64); pairs.len()];
            for rep in per_rep {
                for (a, r) in acc.iter_mut().zip(rep) {
                    a.0 += r.0;
                    a.1 += r.1;
                    a.2 += r.2;
                }
            }
            acc
        };
        for (pi, (cross, ax, ay)) in moments.iter().enumerate() {
            let corr = cross.norm() / (ax * ay).sqrt();
            let d = crate::geom::geodesic_distance(&pairs[pi].0, &pairs[pi].1);
            rows.push(CorrelationRow {
                j,
                pair: pi,
                distance: d,
                d_over_t: d / t,
                corr,
                se: (1.0 - corr * corr).max(0.0) / (n_reps as f64).sqrt(),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct SjCalibration {
    pub j: i32,
    pub alpha: f64,
    pub n_reps: usize,
    pub rejection_rate: f64,
    pub s_samples: Vec<f64>,
}

/// Rejection rate of the two-sided standardized test when the data are
/// generated from `spectrum_scale` times the model spectrum (1 = null).
pub fn sj_calibration(
    spec: &PowerSpectrum,
    filter: &NeedletFilter,
    j: i32,
    n_reps: usize,
    alpha: f64,
    seed: u64,
    spectrum_scale: f64,
) -> Result<SjCalibration> {
    let samples = gamma_hat_samples(spec, filter, &[j], n_reps, seed, spectrum_scale)
        .pop()
        .expect("one scale");
    let (mean, var) = gamma_hat_moments(spec, filter, j);
    let mut rejections = 0usize;
    let mut s_samples = Vec::with_capacity(n_reps);
    for g in samples {
        let r = s_statistic(g, mean, var, alpha)?;
        if r.reject {
            rejections += 1;
        }
        s_samples.push(r.s_value);
    }
    Ok(SjCalibration {
        j,
        alpha,
        n_reps,
        rejection_rate: rejections as f64 / n_reps as f64,
        s_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::power_law_spectrum;
    use crate::needlet::build_filter;

    #[test]
    fn single_mode_scale_is_chi_square_like() {
        // one active shell with tiny multiplicity: visibly non-Gaussian
        let filter = build_filter(2.0);
        let spec = power_law_spectrum(0, 4, 3.0, 1.0).unwrap();
        // choose j so that only l = 1 (lambda = 2) is active
        // a^{2j} * 2 in (1/4, 4) -> j = 0 gives u = 2 (active); l=2: u=12 (no)
        let rep = clt_experiment(&spec, &filter, &[0], 800, 5);
        assert_eq!(rep.scales[0].n_shells, 1);
        assert!(
            rep.scales[0].ks > 0.05,
            "expected visibly non-normal, ks = {}",
            rep.scales[0].ks
        );
    }

    #[test]
    fn many_shells_drift_to_gaussian() {
        let a = 2.0f64.powf(1.0 / 3.0);
        let filter = build_filter(a);
        let spec = power_law_spectrum(2, 96, 3.0, 1.0).unwrap();
        // scales covering l ~ 30 and l ~ 70
        let rep = clt_experiment(&spec, &filter, &[-15, -18], 1200, 7);
        assert!(rep.scales[0].dof < rep.scales[1].dof);
        assert!(
            rep.scales[1].ks < rep.scales[0].ks + 0.02,
            "ks did not improve: {} -> {}",
            rep.scales[0].ks,
            rep.scales[1].ks
        );
        assert!(rep.scales[1].ks < 0.08);
    }

    #[test]
    fn identical_point_pair_is_fully_correlated() {
        let filter = build_filter(2.0);
        let spec = power_law_spectrum(2, 32, 3.0, 1.0).unwrap();
        let x = SpherePoint::from_angles(1.1, 0.4);
        let rows =
            uncorrelation_experiment(&spec, &filter, &[-3], &[(x, x)], 64, 3).unwrap();
        assert!((rows[0].corr - 1.0).abs() < 1e-12);
        assert_eq!(rows[0].d_over_t, 0.0);
    }

    #[test]
    fn distant_pair_decorrelates_with_scale() {
        let a = 2.0f64.powf(1.0 / 3.0);
        let filter = build_filter(a);
        let spec = power_law_spectrum(2, 80, 3.0, 1.0).unwrap();
        let x = SpherePoint::from_angles(1.2, 0.0);
        let y = SpherePoint::from_angles(1.2 + 0.5, 0.0);
        let rows =
            uncorrelation_experiment(&spec, &filter, &[-8, -12], &[(x, y)], 400, 11).unwrap();
        assert!(
            rows[1].corr < rows[0].corr + 2.0 * (rows[0].se + rows[1].se),
            "|corr| should not grow: {} -> {}",
            rows[0].corr,
            rows[1].corr
        );
        assert!(rows[1].corr < 0.2, "fine-scale corr {}", rows[1].corr);
    }

    #[test]
    fn correlation_modulus_is_chart_independent() {
        // recompute the coefficient pair through a rotated chart: every beta
        // picks up a unit phase, so |corr| is unchanged
        use crate::geom::Rotation;
        use crate::harmonics::kernel::eval_sylm_chart;
        let filter = build_filter(2.0);
        let spec = power_law_spectrum(2, 24, 3.0, 1.0).unwrap();
        let shells = super::active_shells(&spec, &filter, -4);
        let x = SpherePoint::from_angles(1.0, 0.2);
        let y = SpherePoint::from_angles(1.35, 0.9);
        let chart = Rotation::about_x(0.8);
        let weights = |p: &SpherePoint, r: &Rotation| -> Vec<Complex64> {
            let mut w = Vec::new();
            for &(l, f) in &shells {
                for m in -(l as i64)..=(l as i64) {
                    w.push(eval_sylm_chart(2, l, m, p, r).unwrap() * f);
                }
            }
            w
        };
        let corr_with = |r: &Rotation| -> f64 {
            let wx = weights(&x, r);
            let wy = weights(&y, r);
            let mut cross = Complex64::new(0.0, 0.0);
            let (mut ax, mut ay) = (0.0f64, 0.0f64);
            for rep in 0..200u64 {
                let coeffs = sample_field_replicate(&spec, 5, rep).coeffs;
                let mut bx = Complex64::new(0.0, 0.0);
                let mut by = Complex64::new(0.0, 0.0);
                let mut idx = 0;
                for &(l, _) in &shells {
                    for m in -(l as i64)..=(l as i64) {
                        let a = coeffs.get(l, m);
                        bx += a * wx[idx];
                        by += a * wy[idx];
                        idx += 1;
                    }
                }
                cross += bx * by.conj();
                ax += bx.norm_sqr();
                ay += by.norm_sqr();
            }
            cross.norm() / (ax * ay).sqrt()
        };
        let c_ident = corr_with(&Rotation::IDENTITY);
        let c_chart = corr_with(&chart);
        assert!(
            (c_ident - c_chart).abs() < 1e-10,
            "|corr| changed across charts: {c_ident} vs {c_chart}"
        );
    }

    #[test]
    fn calibration_near_alpha_and_power_under_mis_scaling() {
        let a = 2.0f64.powf(1.0 / 3.0);
        let filter = build_filter(a);
        let spec = power_law_spectrum(2, 64, 3.0, 1.0).unwrap();
        let j = -17; // covers l ~ 50: plenty of degrees of freedom
        let null = sj_calibration(&spec, &filter, j, 1500, 0.05, 13, 1.0).unwrap();
        assert!(
            (null.rejection_rate - 0.05).abs() < 0.025,
            "null rate {}",
            null.rejection_rate
        );
        let alt = sj_calibration(&spec, &filter, j, 400, 0.05, 13, 2.0).unwrap();
        assert!(
            alt.rejection_rate >= 0.5,
            "power too low: {}",
            alt.rejection_rate
        );
    }
}
