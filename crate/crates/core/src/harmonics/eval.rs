//! Pointwise evaluation of spin-weighted spherical harmonics.
//!
//! Two independent evaluators:
//!
//! * `eval_profile_direct` sums the closed-form expression in half-angle
//!   powers. The sum cancels catastrophically (the terms grow like a central
//!   binomial coefficient while the value stays O(1)), so products and the
//!   accumulation run in double-double precision. Limited to `l <= 48`.
//! * `ThetaProfiles` runs the three-term Wigner-d recurrence upward in `l`,
//!   which is stable at any degree and is the production path for
//!   transforms, kernels, and single-point evaluation.
//!
//! Phase convention: the scalar harmonics carry the sign that makes
//! `conj(Y_lm) = Y_{l,-m}`, and the spin-`s` profile is
//! `y_{s,l,m}(theta) = (-1)^{m_+ + s} sqrt((2l+1)/4pi) d^l_{m,-s}(theta)`.
//! The two evaluators are cross-validated against each other in tests.

use crate::dd::Dd;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Largest degree the closed-form sum is allowed to touch: binomials up to
/// C(96,48) are exact in double-double, beyond that they are not.
pub const DIRECT_MAX_L: u32 = 48;

fn binomials_dd() -> &'static Vec<Vec<Dd>> {
    static TABLE: OnceLock<Vec<Vec<Dd>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n_max = 2 * DIRECT_MAX_L as usize;
        let mut rows: Vec<Vec<Dd>> = Vec::with_capacity(n_max + 1);
        rows.push(vec![Dd::ONE]);
        for n in 1..=n_max {
            let prev = &rows[n - 1];
            let mut row = vec![Dd::ONE; n + 1];
            for k in 1..n {
                row[k] = prev[k - 1].add(prev[k]);
            }
            rows.push(row);
        }
        rows
    })
}

fn binom_dd(n: i64, k: i64) -> Dd {
    if k < 0 || n < 0 || k > n {
        return Dd::ZERO;
    }
    binomials_dd()[n as usize][k as usize]
}

fn factorial_dd(n: i64) -> Dd {
    let mut acc = Dd::ONE;
    for i in 2..=n {
        acc = acc.mul_f64(i as f64);
    }
    acc
}

pub(crate) fn check_indices(s: i32, l: u32, m: i64) -> Result<()> {
    if (l as i64) < (s.unsigned_abs() as i64) {
        return Err(Error::UndefinedHarmonic { s, l });
    }
    if m.abs() > l as i64 {
        return Err(Error::UndefinedHarmonic { s, l });
    }
    Ok(())
}

/// Closed-form theta profile `y_{s,l,m}(theta)` via the compensated sum.
pub fn eval_profile_direct(s: i32, l: u32, m: i64, theta: f64) -> Result<f64> {
    check_indices(s, l, m)?;
    if l > DIRECT_MAX_L {
        return Err(Error::BandLimitExceeded(format!(
            "direct evaluation limited to l <= {DIRECT_MAX_L}, got {l}"
        )));
    }
    if theta <= 0.0 || theta >= PI {
        return Err(Error::PoleEvaluation { theta });
    }
    let li = l as i64;
    let si = s as i64;
    let half = 0.5 * theta;
    let (sh, ch) = (half.sin(), half.cos());

    // prefactor sqrt((l+m)!(l-m)!(2l+1) / (4 pi (l+s)!(l-s)!))
    let num = factorial_dd(li + m)
        .mul(factorial_dd(li - m))
        .mul_f64(2.0 * l as f64 + 1.0);
    let den = factorial_dd(li + si)
        .mul(factorial_dd(li - si))
        .mul_f64(4.0 * PI);
    let pref = num.div(den).to_f64().sqrt();
    let sign = if m < 0 && m % 2 != 0 { -1.0 } else { 1.0 };

    // powers of sin/cos of the half angle up to 2l
    let two_l = 2 * l as usize;
    let mut sp = vec![Dd::ONE; two_l + 1];
    let mut cp = vec![Dd::ONE; two_l + 1];
    for i in 1..=two_l {
        sp[i] = sp[i - 1].mul_f64(sh);
        cp[i] = cp[i - 1].mul_f64(ch);
    }

    let mut acc = Dd::ZERO;
    for r in 0.max(m - si)..=(li - si) {
        let b1 = binom_dd(li - si, r);
        let b2 = binom_dd(li + si, r + si - m);
        if b1.hi == 0.0 || b2.hi == 0.0 {
            continue;
        }
        let cot_pow = (2 * r + si - m) as usize;
        let sin_pow = two_l - cot_pow;
        let mut term = b1.mul(b2).mul(sp[sin_pow]).mul(cp[cot_pow]);
        if (li - r - si).rem_euclid(2) == 1 {
            term = term.neg();
        }
        acc = acc.add(term);
    }
    Ok(sign * pref * acc.to_f64())
}

/// Full complex value through the standard chart.
pub fn eval_sylm_direct(s: i32, l: u32, m: i64, theta: f64, phi: f64) -> Result<Complex64> {
    let profile = eval_profile_direct(s, l, m, theta)?;
    Ok(Complex64::from_polar(1.0, m as f64 * phi) * profile)
}

/// Seed of the upward d-recurrence: `d^{l0}_{m1 m2}` with
/// `l0 = max(|m1|, |m2|)`, single closed-form term.
fn d_seed(l0: i64, m1: i64, m2: i64, cos_half: f64, sin_half: f64) -> f64 {
    // Map (m1, m2) by the symmetries of d onto a pair whose first index is l0:
    //   d_{m1 m2} = (-1)^{m1-m2} d_{m2 m1} = d_{-m2 -m1} = (-1)^{m1-m2} d_{-m1 -m2}
    // and use d^l_{l, n} = sqrt(C(2l, l-n)) cos^{l+n} (-sin)^{l-n}.
    let (mu, nu, flip) = if m1 == l0 {
        (m1, m2, false)
    } else if m2 == -l0 {
        (-m2, -m1, false)
    } else if m2 == l0 {
        (m2, m1, true)
    } else {
        (-m1, -m2, true)
    };
    debug_assert_eq!(mu, l0);
    let sign = if flip && (m1 - m2).rem_euclid(2) == 1 {
        -1.0
    } else {
        1.0
    };
    let ln_binom = ln_factorial(2 * l0) - ln_factorial(l0 + nu) - ln_factorial(l0 - nu);
    let lp = (l0 + nu) as f64;
    let lm = (l0 - nu) as f64;
    // assemble in log space to survive large l0 near the poles
    let mag = (0.5 * ln_binom + lp * cos_half.abs().max(1e-300).ln()
        + lm * sin_half.abs().max(1e-300).ln())
    .exp();
    let parity = if (l0 - nu).rem_euclid(2) == 1 { -1.0 } else { 1.0 };
    let sgn_c = if cos_half < 0.0 && (l0 + nu).rem_euclid(2) == 1 {
        -1.0
    } else {
        1.0
    };
    let base = if sin_half == 0.0 && lm > 0.0 {
        0.0
    } else if cos_half == 0.0 && lp > 0.0 {
        0.0
    } else {
        mag
    };
    sign * parity * sgn_c * base
}

fn ln_factorial(n: i64) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let t = TABLE.get_or_init(|| {
        let mut v = vec![0.0; 4097];
        for i in 1..v.len() {
            v[i] = v[i - 1] + (i as f64).ln();
        }
        v
    });
    t[n as usize]
}

/// Wigner little-d by upward recursion in `l` for fixed `(m1, m2)`.
///
/// Returns `d^l_{m1 m2}(beta)` for `l = l_min ..= l_max` where
/// `l_min = max(|m1|, |m2|)`.
pub fn wigner_d_column(m1: i64, m2: i64, beta: f64, l_max: u32) -> Vec<f64> {
    let l0 = m1.abs().max(m2.abs());
    let lmax = l_max as i64;
    if lmax < l0 {
        return Vec::new();
    }
    let (sin_half, cos_half) = (0.5 * beta).sin_cos();
    let cb = beta.cos();
    let mut out = Vec::with_capacity((lmax - l0 + 1) as usize);
    let d0 = d_seed(l0, m1, m2, cos_half, sin_half);
    out.push(d0);
    // At j = l0 > 0 the lower-term coefficient vanishes, so starting the
    // recurrence with prev = 0 is exact; j = 0 is the Legendre step d^1 = cb.
    let mut prev = 0.0f64;
    let mut cur = d0;
    let (m1f, m2f) = (m1 as f64, m2 as f64);
    for j in l0..lmax {
        let next = if j == 0 {
            cb * cur
        } else {
            let jf = j as f64;
            let jp = jf + 1.0;
            let c_up = jf * ((jp * jp - m1f * m1f) * (jp * jp - m2f * m2f)).sqrt();
            let c_mid = (2.0 * jf + 1.0) * (jf * jp * cb - m1f * m2f);
            let c_dn = jp * ((jf * jf - m1f * m1f) * (jf * jf - m2f * m2f)).sqrt();
            (c_mid * cur - c_dn * prev) / c_up
        };
        out.push(next);
        prev = cur;
        cur = next;
    }
    out
}

/// Spin profile sign `(-1)^{m_+ + s}` relating the paper phase convention to
/// the raw d function.
#[inline]
fn profile_sign(s: i32, m: i64) -> f64 {
    let e = m.max(0) + s as i64;
    if e.rem_euclid(2) == 1 {
        -1.0
    } else {
        1.0
    }
}

/// All theta profiles `y_{s,l,m}(theta)` for one colatitude: recursion-based,
/// any band limit.
pub struct ThetaProfiles {
    pub s: i32,
    pub l_max: u32,
    /// For `m` in `-l_max ..= l_max`: values for `l = l_min(m) ..= l_max`.
    columns: Vec<Vec<f64>>,
}

impl ThetaProfiles {
    pub fn new(s: i32, l_max: u32, theta: f64) -> Self {
        let lmax = l_max as i64;
        let mut columns = Vec::with_capacity((2 * lmax + 1) as usize);
        for m in -lmax..=lmax {
            let mut col = wigner_d_column(m, -(s as i64), theta, l_max);
            let sign = profile_sign(s, m);
            for (idx, v) in col.iter_mut().enumerate() {
                let l = m.abs().max(s.abs() as i64) as f64 + idx as f64;
                *v *= sign * ((2.0 * l + 1.0) / (4.0 * PI)).sqrt();
            }
            columns.push(col);
        }
        ThetaProfiles { s, l_max, columns }
    }

    #[inline]
    pub fn l_min(&self, m: i64) -> u32 {
        m.unsigned_abs().max(self.s.unsigned_abs() as u64) as u32
    }

    /// `y_{s,l,m}(theta)`; zero-cost indexing into the recursion output.
    #[inline]
    pub fn get(&self, l: u32, m: i64) -> f64 {
        let col = &self.columns[(m + self.l_max as i64) as usize];
        let lmin = self.l_min(m);
        if l < lmin {
            return 0.0;
        }
        col[(l - lmin) as usize]
    }
}

/// Production single-point evaluation of `sY_{lm}` through the standard chart.
pub fn eval_sylm(s: i32, l: u32, m: i64, theta: f64, phi: f64) -> Result<Complex64> {
    check_indices(s, l, m)?;
    if theta <= 0.0 || theta >= PI {
        return Err(Error::PoleEvaluation { theta });
    }
    let col = wigner_d_column(m, -(s as i64), theta, l);
    let d = *col.last().expect("l >= l_min");
    let profile = profile_sign(s, m) * ((2.0 * l as f64 + 1.0) / (4.0 * PI)).sqrt() * d;
    Ok(Complex64::from_polar(1.0, m as f64 * phi) * profile)
}
