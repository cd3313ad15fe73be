//! Discretized needlet frames and their operators.
//!
//! A frame at dilation base `a` and pixel parameter `b` carries one
//! partition per active scale `j`; the frame element on cell `(j,k)` is
//! `sqrt(mu_jk) w_{a^j, x_jk, R_jk}` with the evaluation node `x_jk` placed
//! at fixed interior fractions of the cell. The node is deliberately
//! off-center: with midpoint nodes the discretization error of the frame
//! operator is second order in `b`, which would wash out the first-order
//! `C0 b` envelope the bound sweep measures.
//!
//! All quadratic functionals (`sum_k mu |<F, w>|^2`, the frame operator
//! `S F`) are evaluated band-by-band: cells in one band sit on a uniform
//! longitude grid, so the cell sums reduce to folded (aliased) coefficient
//! sums - exactly the same numbers as the cell-by-cell evaluation, at
//! `O(bands x L^2)` cost instead of `O(cells x L)`.

use super::filter::NeedletFilter;
use crate::error::{Error, Result};
use crate::geom::partition::{admissibility_constants, build_partition, ChartTag, Partition};
use crate::geom::{reference_angle, SpherePoint};
use crate::harmonics::eval::ThetaProfiles;
use crate::harmonics::{eigenvalue, SpinCoefficients};
use crate::reduce::par_map;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

/// In-cell node position, as fractions of the cell extents. Asymmetric on
/// purpose; see the module docs.
const NODE_FRAC_THETA: f64 = 0.38;
const NODE_FRAC_PHI: f64 = 0.29;

/// Per-band evaluation table for one scale.
#[derive(Debug, Clone)]
struct BandTable {
    n_cells: usize,
    /// Area of each (congruent) cell.
    mu: f64,
    theta_node: f64,
    polar: bool,
    /// `y_{s,l,m}(theta_node)` for m in -l_max..=l_max (outer) and the active
    /// shells (inner).
    profiles: Vec<f64>,
}

/// One active scale: filter weights on its shells plus its pixelization.
#[derive(Debug, Clone)]
pub struct Scale {
    pub j: i32,
    pub partition: Partition,
    /// Shells with nonzero filter weight at this scale.
    pub shells: Vec<u32>,
    /// `f(a^{2j} lambda_l)` per active shell.
    pub weights: Vec<f64>,
    bands: Vec<BandTable>,
}

#[derive(Debug, Clone)]
pub struct NeedletFrame {
    pub filter: NeedletFilter,
    pub s: i32,
    pub l_max: u32,
    pub b: f64,
    /// Partition admissibility constants of the pixelization family.
    pub c0: f64,
    pub delta0: f64,
    pub scales: Vec<Scale>,
}

/// Empirical frame diagnostics.
#[derive(Debug, Clone)]
pub struct FrameBounds {
    pub a_est: f64,
    pub b_est: f64,
    /// Largest observed Rayleigh defect `|<(Q - S) F, F>| / b`, over the
    /// random trials, the extremal probes, and the per-scale power sweep.
    pub c0_est: f64,
    /// Per-scale defect-norm estimates `(j, nu_j)` with `nu_j ~ ||Q_j - S_j||`.
    pub scale_norms: Vec<(i32, f64)>,
    /// `<S F, F>` for each unit-norm trial (probes appended last).
    pub trial_ratios: Vec<f64>,
}

/// Wavelet coefficients `beta_{jk} = sqrt(mu_jk) (f(a^{2j} Delta) F)_{R_jk}(x_jk)`,
/// stored per scale in cell order (band-major).
#[derive(Debug, Clone)]
pub struct WaveletCoefficients {
    pub s: i32,
    pub scales: Vec<(i32, Vec<Complex64>)>,
}

impl WaveletCoefficients {
    pub fn scale(&self, j: i32) -> Result<&[Complex64]> {
        self.scales
            .iter()
            .find(|(jj, _)| *jj == j)
            .map(|(_, v)| v.as_slice())
            .ok_or(Error::ScaleMissing { j })
    }

    pub fn total_energy(&self) -> f64 {
        self.scales
            .iter()
            .map(|(_, v)| v.iter().map(|c| c.norm_sqr()).sum::<f64>())
            .sum()
    }
}

impl NeedletFrame {
    pub fn scale(&self, j: i32) -> Result<&Scale> {
        self.scales
            .iter()
            .find(|sc| sc.j == j)
            .ok_or(Error::ScaleMissing { j })
    }

    pub fn j_range(&self) -> (i32, i32) {
        let lo = self.scales.iter().map(|s| s.j).min().unwrap_or(0);
        let hi = self.scales.iter().map(|s| s.j).max().unwrap_or(0);
        (lo, hi)
    }

    pub fn n_cells(&self) -> usize {
        self.scales.iter().map(|s| s.partition.n_cells()).sum()
    }

    /// Evaluation node of cell `k` in `band` of `scale`.
    pub fn node(&self, scale: &Scale, band: usize, k: usize) -> SpherePoint {
        let b = &scale.partition.bands[band];
        let theta = b.theta_lo + NODE_FRAC_THETA * (b.theta_hi - b.theta_lo);
        let phi = (k as f64 + NODE_FRAC_PHI) * b.delta_phi();
        SpherePoint::from_angles(theta, phi)
    }
}

/// Filter weight on shell `l` at scale `j`: `f(a^{2j} lambda_{ls})`.
fn shell_weight(filter: &NeedletFilter, s: i32, j: i32, l: u32) -> f64 {
    let lam = eigenvalue(s, l).expect("l >= |s|");
    filter.eval(filter.a().powi(2 * j) * lam)
}

/// Builds the frame: selects every scale whose filter support meets the
/// spectrum `[lambda_{|s|+1}, lambda_{L}]`, pixelizes each, and precomputes
/// the band profile tables.
pub fn build_frame(a: f64, b: f64, s: i32, l_max: u32) -> Result<NeedletFrame> {
    assert!(a > 1.0 && b > 0.0 && b < 1.0);
    if l_max < s.unsigned_abs() + 1 {
        return Err(Error::UndefinedHarmonic { s, l: l_max });
    }
    let filter = NeedletFilter::new(a);
    let lam_min = eigenvalue(s, s.unsigned_abs() + 1)?;
    let lam_max = eigenvalue(s, l_max)?;
    // a^{2j} lambda in (a^-2, a^2) <=> j in (-1 - w, 1 - w), w = ln(lambda)/(2 ln a)
    let j_lo = (-1.0 - lam_max.ln() / (2.0 * a.ln())).floor() as i32 - 1;
    let j_hi = (1.0 - lam_min.ln() / (2.0 * a.ln())).ceil() as i32 + 1;
    let (c0, delta0) = admissibility_constants();
    let mut scales = Vec::new();
    for j in j_lo..=j_hi {
        let mut shells = Vec::new();
        let mut weights = Vec::new();
        for l in (s.unsigned_abs() + 1)..=l_max {
            let w = shell_weight(&filter, s, j, l);
            if w > 0.0 {
                shells.push(l);
                weights.push(w);
            }
        }
        if shells.is_empty() {
            continue;
        }
        let partition = build_partition(j, a, b)?;
        let bands = build_band_tables(&partition, s, l_max, &shells);
        scales.push(Scale {
            j,
            partition,
            shells,
            weights,
            bands,
        });
    }
    Ok(NeedletFrame {
        filter,
        s,
        l_max,
        b,
        c0,
        delta0,
        scales,
    })
}

fn build_band_tables(
    partition: &Partition,
    s: i32,
    l_max: u32,
    shells: &[u32],
) -> Vec<BandTable> {
    let li = l_max as i64;
    par_map(partition.bands.len(), |bi| {
        let band = &partition.bands[bi];
        let theta_node = band.theta_lo + NODE_FRAC_THETA * (band.theta_hi - band.theta_lo);
        let profiles_all = ThetaProfiles::new(s, l_max, theta_node);
        let mut profiles = Vec::with_capacity((2 * li as usize + 1) * shells.len());
        for m in -li..=li {
            for &l in shells {
                profiles.push(if (m.unsigned_abs() as u32) <= l {
                    profiles_all.get(l, m)
                } else {
                    0.0
                });
            }
        }
        BandTable {
            n_cells: band.n_cells,
            mu: band.cell_area,
            theta_node,
            polar: band.polar,
            profiles,
        }
    })
}

/// Per-band filtered longitude profile: `c_m = sum_l f_jl a_lm y_lm(theta)`.
fn band_cm(scale: &Scale, table: &BandTable, coeffs: &SpinCoefficients) -> Vec<Complex64> {
    let li = coeffs.l_max() as i64;
    let ns = scale.shells.len();
    let mut out = vec![Complex64::new(0.0, 0.0); (2 * li + 1) as usize];
    for (mi, m) in (-li..=li).enumerate() {
        let base = mi * ns;
        let mut acc = Complex64::new(0.0, 0.0);
        for (si, &l) in scale.shells.iter().enumerate() {
            if (m.unsigned_abs() as u32) > l {
                continue;
            }
            acc += coeffs.get(l, m) * (scale.weights[si] * table.profiles[base + si]);
        }
        out[mi] = acc;
    }
    out
}

/// Fold a longitude profile onto the `n`-cell grid of a band:
/// `T_r = sum_{m = r mod n} c_m exp(i m alpha h)`, where `h = 2 pi / n`.
fn fold(cm: &[Complex64], l_max: u32, n: usize) -> Vec<Complex64> {
    let li = l_max as i64;
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let mut t = vec![Complex64::new(0.0, 0.0); n];
    for (mi, m) in (-li..=li).enumerate() {
        let r = (m.rem_euclid(n as i64)) as usize;
        t[r] += cm[mi] * Complex64::from_polar(1.0, m as f64 * NODE_FRAC_PHI * h);
    }
    t
}

impl NeedletFrame {
    /// `sum_k mu_jk |<F, w_jk>|^2` over one scale: the scale's share of
    /// `<S F, F>`, and the frame statistic `sum_k |beta_jk|^2`.
    pub fn scale_energy(&self, coeffs: &SpinCoefficients, j: i32) -> Result<f64> {
        let scale = self.scale(j)?;
        let parts = par_map(scale.bands.len(), |bi| {
            let table = &scale.bands[bi];
            let cm = band_cm(scale, table, coeffs);
            let t = fold(&cm, coeffs.l_max(), table.n_cells);
            let sum_sq: f64 = t.iter().map(|c| c.norm_sqr()).sum();
            table.mu * table.n_cells as f64 * sum_sq
        });
        Ok(crate::reduce::tree_sum_f64(&parts))
    }

    /// Frame operator restricted to a scale set:
    /// `S F = sum_{j in set} sum_k mu <F, w_jk> w_jk` in coefficient space.
    pub fn apply_s(&self, coeffs: &SpinCoefficients, j_set: &[i32]) -> Result<SpinCoefficients> {
        let mut out = SpinCoefficients::zeros(self.s, coeffs.l_max())?;
        let li = coeffs.l_max() as i64;
        for &j in j_set {
            let scale = self.scale(j)?;
            let contribs = par_map(scale.bands.len(), |bi| {
                let table = &scale.bands[bi];
                let n = table.n_cells;
                let h = 2.0 * std::f64::consts::PI / n as f64;
                let cm = band_cm(scale, table, coeffs);
                let t = fold(&cm, coeffs.l_max(), n);
                // (S_j F)_{lm} += mu f_l y_lm(theta) e^{-i m alpha h} n T_{m mod n}
                let ns = scale.shells.len();
                let mut local = vec![Complex64::new(0.0, 0.0); cm.len() * ns];
                for (mi, m) in (-li..=li).enumerate() {
                    let r = (m.rem_euclid(n as i64)) as usize;
                    let phase = Complex64::from_polar(1.0, -(m as f64) * NODE_FRAC_PHI * h);
                    let common = t[r] * phase * (table.mu * n as f64);
                    let base = mi * ns;
                    for si in 0..ns {
                        local[base + si] =
                            common * (scale.weights[si] * table.profiles[base + si]);
                    }
                }
                local
            });
            let ns = scale.shells.len();
            for (mi, m) in (-li..=li).enumerate() {
                for (si, &l) in scale.shells.iter().enumerate() {
                    if (m.unsigned_abs() as u32) > l {
                        continue;
                    }
                    let mut acc = Complex64::new(0.0, 0.0);
                    for c in &contribs {
                        acc += c[mi * ns + si];
                    }
                    let cur = out.get(l, m);
                    out.set(l, m, cur + acc);
                }
            }
        }
        Ok(out)
    }

    /// Spectral multiplier `Q F = sum_{j in set} f^2(a^{2j} Delta) F`.
    pub fn apply_q(&self, coeffs: &SpinCoefficients, j_set: &[i32]) -> Result<SpinCoefficients> {
        let mut mult = vec![0.0f64; (coeffs.l_max() + 1) as usize];
        for &j in j_set {
            let scale = self.scale(j)?;
            for (si, &l) in scale.shells.iter().enumerate() {
                mult[l as usize] += scale.weights[si] * scale.weights[si];
            }
        }
        Ok(coeffs.scaled(|l| mult[l as usize]))
    }

    /// `<Q F, F>` over a scale set, cheaply.
    pub fn q_quadratic_form(&self, coeffs: &SpinCoefficients, j_set: &[i32]) -> Result<f64> {
        let mut acc = 0.0;
        for &j in j_set {
            let scale = self.scale(j)?;
            for (si, &l) in scale.shells.iter().enumerate() {
                acc += scale.weights[si] * scale.weights[si] * coeffs.shell_energy(l);
            }
        }
        Ok(acc)
    }

    pub fn all_scales(&self) -> Vec<i32> {
        self.scales.iter().map(|s| s.j).collect()
    }
}

/// Materialized wavelet coefficients. Polar cells are reported in their
/// tagged chart (the fixed x-axis rotation); all others in the standard
/// chart.
pub fn wavelet_coefficients(
    coeffs: &SpinCoefficients,
    frame: &NeedletFrame,
) -> Result<WaveletCoefficients> {
    let li = coeffs.l_max() as i64;
    let mut scales = Vec::with_capacity(frame.scales.len());
    for scale in &frame.scales {
        let per_band: Vec<Vec<Complex64>> = par_map(scale.bands.len(), |bi| {
            let table = &scale.bands[bi];
            let n = table.n_cells;
            let h = 2.0 * std::f64::consts::PI / n as f64;
            let cm = band_cm(scale, table, coeffs);
            let sqrt_mu = table.mu.sqrt();
            let mut vals = Vec::with_capacity(n);
            for k in 0..n {
                let phi = (k as f64 + NODE_FRAC_PHI) * h;
                let mut acc = Complex64::new(0.0, 0.0);
                for (mi, m) in (-li..=li).enumerate() {
                    acc += cm[mi] * Complex64::from_polar(1.0, m as f64 * phi);
                }
                if table.polar {
                    let node = SpherePoint::from_angles(table.theta_node, phi);
                    let psi = reference_angle(
                        &node,
                        &crate::geom::Rotation::IDENTITY,
                        &ChartTag::PolarX.rotation(),
                    )
                    .expect("interior node");
                    acc *= Complex64::from_polar(1.0, frame.s as f64 * psi);
                }
                vals.push(acc * sqrt_mu);
            }
            vals
        });
        let mut flat = Vec::with_capacity(scale.partition.n_cells());
        for v in per_band {
            flat.extend(v);
        }
        scales.push((scale.j, flat));
    }
    Ok(WaveletCoefficients {
        s: frame.s,
        scales,
    })
}

/// Random unit-norm coefficients orthogonal to the bottom shell.
fn random_unit_coeffs(s: i32, l_max: u32, rng: &mut ChaCha8Rng) -> SpinCoefficients {
    let mut c = SpinCoefficients::zeros(s, l_max).expect("valid band");
    for l in (s.unsigned_abs() + 1)..=l_max {
        for m in -(l as i64)..=(l as i64) {
            let re: f64 = rng.gen::<f64>() - 0.5;
            let im: f64 = rng.gen::<f64>() - 0.5;
            c.set(l, m, Complex64::new(re, im));
        }
    }
    let norm = c.norm_sq().sqrt();
    c.scale_shells(|_| 1.0 / norm);
    c
}

/// Dominant |eigenvalue| of the self-adjoint pencil
/// `v -> Q_j v - S_j v` restricted to the scale's active shells,
/// by plain power iteration.
fn scale_defect_norm(frame: &NeedletFrame, j: i32, iters: usize, rng: &mut ChaCha8Rng) -> f64 {
    let apply = |v: &SpinCoefficients| -> SpinCoefficients {
        let mut out = frame.apply_q(v, &[j]).expect("scale present");
        let sv = frame.apply_s(v, &[j]).expect("scale present");
        out.axpy(Complex64::new(-1.0, 0.0), &sv);
        out
    };
    let mut v = random_unit_coeffs(frame.s, frame.l_max, rng);
    let mut lambda = 0.0f64;
    for _ in 0..iters {
        let w = apply(&v);
        let n = w.norm_sq().sqrt();
        if n < 1e-300 {
            return 0.0;
        }
        // Rayleigh quotient carries the sign; the norm estimate is |lambda|
        lambda = n;
        v = w.scaled(|_| 1.0 / n);
    }
    lambda
}

/// Extremal Rayleigh probes of the global defect `S - Q`: returns unit
/// vectors approximately maximizing and minimizing `<(S-Q)F, F>`.
fn extremal_probes(
    frame: &NeedletFrame,
    iters: usize,
    rng: &mut ChaCha8Rng,
) -> (SpinCoefficients, SpinCoefficients) {
    let all = frame.all_scales();
    let defect = |v: &SpinCoefficients| -> SpinCoefficients {
        let mut out = frame.apply_s(v, &all).expect("scales present");
        let qv = frame.apply_q(v, &all).expect("scales present");
        out.axpy(Complex64::new(-1.0, 0.0), &qv);
        out
    };
    // spectral radius first
    let mut v = random_unit_coeffs(frame.s, frame.l_max, rng);
    let mut rho = 0.0f64;
    for _ in 0..iters {
        let w = defect(&v);
        let n = w.norm_sq().sqrt();
        if n < 1e-300 {
            break;
        }
        rho = n;
        v = w.scaled(|_| 1.0 / n);
    }
    let shift = rho.max(1e-12);
    // shifted iterations isolate the signed extremes
    let mut run = |sign: f64| -> SpinCoefficients {
        let mut v = random_unit_coeffs(frame.s, frame.l_max, rng);
        for _ in 0..iters {
            let mut w = defect(&v);
            w.axpy(Complex64::new(sign * shift, 0.0), &v);
            let n = w.norm_sq().sqrt();
            if n < 1e-300 {
                break;
            }
            v = w.scaled(|_| 1.0 / n);
        }
        v
    };
    (run(1.0), run(-1.0))
}

/// Monte Carlo frame-bound estimate: min/max of `sum mu |<F, w>|^2` over
/// random unit-norm band-limited trials orthogonal to the bottom shell,
/// augmented with the two extremal Rayleigh probes, plus the per-scale
/// defect-norm sweep that produces the discretization constant estimate.
pub fn frame_bound_estimate(frame: &NeedletFrame, n_trials: usize, seed: u64) -> FrameBounds {
    assert!(n_trials >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0x6672616d65); // "frame"
    let all = frame.all_scales();
    let energy = |f: &SpinCoefficients| -> f64 {
        let mut acc = 0.0;
        for &j in &all {
            acc += frame.scale_energy(f, j).expect("scale present");
        }
        acc
    };
    let mut trial_ratios = Vec::with_capacity(n_trials + 2);
    for _ in 0..n_trials {
        let f = random_unit_coeffs(frame.s, frame.l_max, &mut rng);
        trial_ratios.push(energy(&f));
    }
    let (hi_probe, lo_probe) = extremal_probes(frame, 60, &mut rng);
    trial_ratios.push(energy(&hi_probe));
    trial_ratios.push(energy(&lo_probe));

    let a_est = trial_ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let b_est = trial_ratios
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);

    // On unit-norm trials orthogonal to the bottom shell, <Q F, F> = 1, so
    // the observed defect is |ratio - 1|.
    let mut c0_est = trial_ratios
        .iter()
        .fold(0.0f64, |m, r| m.max((r - 1.0).abs()))
        / frame.b;
    let mut scale_norms = Vec::with_capacity(frame.scales.len());
    for scale in &frame.scales {
        let nu = scale_defect_norm(frame, scale.j, 50, &mut rng);
        c0_est = c0_est.max(nu / frame.b);
        scale_norms.push((scale.j, nu));
    }
    FrameBounds {
        a_est,
        b_est,
        c0_est,
        scale_norms,
        trial_ratios,
    }
}
