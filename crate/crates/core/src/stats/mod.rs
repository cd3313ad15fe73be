//! Quadratic scale statistics of spin random fields, their exact Gaussian
//! moments, and the standardized model test.

pub mod experiments;
pub mod normal;

pub use experiments::{
    clt_experiment, sj_calibration, uncorrelation_experiment, CltReport, CltScale,
    CorrelationRow, SjCalibration,
};
pub use normal::{ks_distance_normal, phi, phi_inv};

use crate::error::{Error, Result};
use crate::fields::PowerSpectrum;
use crate::harmonics::{eigenvalue, SpinCoefficients};
use crate::needlet::{NeedletFilter, WaveletCoefficients};

/// Spectral quadratic statistic at scale `j`:
/// `sum_{l,m} f^2(a^{2j} lambda_ls) |a_lm|^2`.
pub fn gamma_hat(coeffs: &SpinCoefficients, filter: &NeedletFilter, j: i32) -> f64 {
    let s = coeffs.spin();
    let t2 = filter.a().powi(2 * j);
    let mut acc = 0.0;
    for l in coeffs.l_min()..=coeffs.l_max() {
        let w = filter.eval_sq(t2 * eigenvalue(s, l).expect("l >= |s|"));
        if w > 0.0 {
            acc += w * coeffs.shell_energy(l);
        }
    }
    acc
}

/// Frame-side quadratic statistic: `sum_k |beta_jk|^2` at scale `j`.
pub fn gamma_tilde(wc: &WaveletCoefficients, j: i32) -> Result<f64> {
    Ok(wc.scale(j)?.iter().map(|b| b.norm_sqr()).sum())
}

/// Spectrum mass seen by scale `j`:
/// `gamma_j = sum_{a^-2 <= a^{2j} lambda_ls <= a^2} C_l (2l+1)` (inclusive).
pub fn gamma_j(spectrum: &PowerSpectrum, a: f64, j: i32) -> f64 {
    let t2 = a.powi(2 * j);
    let (lo, hi) = (a.powi(-2), a.powi(2));
    let mut acc = 0.0;
    for l in spectrum.l_min()..=spectrum.l_max {
        let u = t2 * eigenvalue(spectrum.s, l).expect("l >= |s|");
        if u >= lo && u <= hi {
            acc += spectrum.get(l) * (2.0 * l as f64 + 1.0);
        }
    }
    acc
}

/// Exact Gaussian-model moments of the spectral statistic:
/// mean `sum_l f^2 C_l (2l+1)` and variance `sum_l 2 f^4 C_l^2 (2l+1)`.
pub fn gamma_hat_moments(
    spectrum: &PowerSpectrum,
    filter: &NeedletFilter,
    j: i32,
) -> (f64, f64) {
    let t2 = filter.a().powi(2 * j);
    let mut mean = 0.0;
    let mut var = 0.0;
    for l in spectrum.l_min()..=spectrum.l_max {
        let w = filter.eval_sq(t2 * eigenvalue(spectrum.s, l).expect("l >= |s|"));
        if w > 0.0 {
            let c = spectrum.get(l);
            let mult = 2.0 * l as f64 + 1.0;
            mean += w * c * mult;
            var += 2.0 * w * w * c * c * mult;
        }
    }
    (mean, var)
}

/// Per-scale statistics of one realization against a model: the plot-ready
/// row behind the `(j, gamma_hat, gamma_tilde, gamma_j, mean, var, S_j)`
/// table.
#[derive(Debug, Clone)]
pub struct ScaleStatistics {
    pub j: i32,
    pub gamma_hat: f64,
    /// Frame-side statistic; absent when no frame is supplied.
    pub gamma_tilde: Option<f64>,
    pub gamma_j: f64,
    pub mean: f64,
    pub var: f64,
    pub s_value: f64,
}

/// Assemble the per-scale table for one realization.
pub fn scale_statistics(
    coeffs: &SpinCoefficients,
    spectrum: &PowerSpectrum,
    filter: &NeedletFilter,
    frame: Option<&crate::needlet::NeedletFrame>,
    j_list: &[i32],
) -> Result<Vec<ScaleStatistics>> {
    let mut rows = Vec::with_capacity(j_list.len());
    for &j in j_list {
        let gh = gamma_hat(coeffs, filter, j);
        let gt = match frame {
            Some(f) => Some(f.scale_energy(coeffs, j)?),
            None => None,
        };
        let (mean, var) = gamma_hat_moments(spectrum, filter, j);
        let s_value = if var > 0.0 {
            (gh - mean) / var.sqrt()
        } else {
            f64::NAN
        };
        rows.push(ScaleStatistics {
            j,
            gamma_hat: gh,
            gamma_tilde: gt,
            gamma_j: gamma_j(spectrum, filter.a(), j),
            mean,
            var,
            s_value,
        });
    }
    Ok(rows)
}

/// Outcome of the standardized scale test.
#[derive(Debug, Clone)]
pub struct TestResult {
    pub s_value: f64,
    /// Two-sided threshold `z_{alpha/2}`.
    pub threshold: f64,
    pub reject: bool,
    /// Two-sided Gaussian p-value.
    pub p_value: f64,
}

/// Standardize an observed statistic against model moments and compare
/// two-sided against `z_{alpha/2}`.
pub fn s_statistic(
    gamma_hat_value: f64,
    model_mean: f64,
    model_var: f64,
    alpha: f64,
) -> Result<TestResult> {
    if !(model_var > 0.0) {
        return Err(Error::DegenerateModel);
    }
    assert!(alpha > 0.0 && alpha < 1.0);
    let s_value = (gamma_hat_value - model_mean) / model_var.sqrt();
    let threshold = phi_inv(1.0 - alpha / 2.0);
    Ok(TestResult {
        s_value,
        threshold,
        reject: s_value.abs() >= threshold,
        p_value: 2.0 * (1.0 - phi(s_value.abs())),
    })
}
