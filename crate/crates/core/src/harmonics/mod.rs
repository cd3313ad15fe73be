//! Spin-weighted spherical harmonics: evaluation, transforms, spectral
//! ladder operators, zonal harmonics, kernels, and Wigner rotations.

pub mod eval;
pub mod gram;
pub mod kernel;
pub mod transform;
pub mod wigner;

pub use eval::{eval_sylm, eval_sylm_direct, ThetaProfiles};
pub use gram::gram_residual;
pub use kernel::{eval_sylm_chart, projection_kernel};
pub use transform::{analysis, analysis_checked, synthesis, GridField};
pub use wigner::{rotate_coefficients, WignerD};

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Eigendata of the spin Laplacian on shell `l`:
/// the eigenvalue and the ladder normalization constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenData {
    pub lambda: f64,
    pub b: f64,
}

/// Spin-Laplacian eigenvalue: `(l-s)(l+s+1)` for `s >= 0`,
/// `(l+s)(l-s+1)` for `s < 0`; equivalently `l(l+1) - s(s+1)` up to the
/// sign symmetry in `s`.
pub fn eigenvalue(s: i32, l: u32) -> Result<f64> {
    if (l as i64) < s.unsigned_abs() as i64 {
        return Err(Error::UndefinedHarmonic { s, l });
    }
    let lf = l as f64;
    let sf = s as f64;
    Ok(if s >= 0 {
        (lf - sf) * (lf + sf + 1.0)
    } else {
        (lf + sf) * (lf - sf + 1.0)
    })
}

/// Eigenvalue plus the factorial-ratio root `b_{ls}`.
pub fn eigen(s: i32, l: u32) -> Result<EigenData> {
    let lambda = eigenvalue(s, l)?;
    let li = l as i64;
    let si = s as i64;
    let (hi, lo) = if s >= 0 { (li + si, li - si) } else { (li - si, li + si) };
    let mut b = 1.0f64;
    for k in (lo + 1)..=hi {
        b *= k as f64;
    }
    Ok(EigenData { lambda, b: b.sqrt() })
}

/// Spectral coefficients of a spin-`s` field, `|s| <= l <= l_max`,
/// `-l <= m <= l`, stored shell-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinCoefficients {
    s: i32,
    l_max: u32,
    data: Vec<Complex64>,
}

impl SpinCoefficients {
    pub fn zeros(s: i32, l_max: u32) -> Result<Self> {
        if l_max < s.unsigned_abs() {
            return Err(Error::UndefinedHarmonic { s, l: l_max });
        }
        let l_min = s.unsigned_abs() as usize;
        let n = (l_max as usize + 1).pow(2) - l_min.pow(2);
        Ok(SpinCoefficients {
            s,
            l_max,
            data: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    #[inline]
    pub fn spin(&self) -> i32 {
        self.s
    }

    #[inline]
    pub fn l_min(&self) -> u32 {
        self.s.unsigned_abs()
    }

    #[inline]
    pub fn l_max(&self) -> u32 {
        self.l_max
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    fn index(&self, l: u32, m: i64) -> usize {
        debug_assert!(l >= self.l_min() && l <= self.l_max);
        debug_assert!(m.abs() <= l as i64);
        let l = l as usize;
        let l_min = self.l_min() as usize;
        l * l - l_min * l_min + (m + l as i64) as usize
    }

    #[inline]
    pub fn get(&self, l: u32, m: i64) -> Complex64 {
        self.data[self.index(l, m)]
    }

    #[inline]
    pub fn set(&mut self, l: u32, m: i64, v: Complex64) {
        let i = self.index(l, m);
        self.data[i] = v;
    }

    /// Iterate `(l, m, value)` shell-major.
    pub fn iter(&self) -> impl Iterator<Item = (u32, i64, Complex64)> + '_ {
        let l_min = self.l_min();
        (l_min..=self.l_max).flat_map(move |l| {
            (-(l as i64)..=(l as i64)).map(move |m| (l, m, self.get(l, m)))
        })
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Energy `sum_m |a_lm|^2` of one shell.
    pub fn shell_energy(&self, l: u32) -> f64 {
        (-(l as i64)..=(l as i64))
            .map(|m| self.get(l, m).norm_sqr())
            .sum()
    }

    /// Apply a shell multiplier in place.
    pub fn scale_shells<F: Fn(u32) -> f64>(&mut self, f: F) {
        for l in self.l_min()..=self.l_max {
            let factor = f(l);
            for m in -(l as i64)..=(l as i64) {
                let i = self.index(l, m);
                self.data[i] *= factor;
            }
        }
    }

    pub fn scaled<F: Fn(u32) -> f64>(&self, f: F) -> SpinCoefficients {
        let mut out = self.clone();
        out.scale_shells(f);
        out
    }

    /// Linear combination with matching spin and band limit.
    pub fn axpy(&mut self, alpha: Complex64, other: &SpinCoefficients) {
        assert_eq!(self.s, other.s);
        assert_eq!(self.l_max, other.l_max);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    /// Whether `conj(a_lm) = a_{l,-m}` to within `tol` (so `a_{l0}` is real).
    pub fn is_involutive(&self, tol: f64) -> bool {
        for l in self.l_min()..=self.l_max {
            for m in 0..=(l as i64) {
                let a = self.get(l, m).conj();
                let b = self.get(l, -m);
                if (a - b).norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Spin-raising in coefficient space: multiplies shell `l` by
/// `sqrt((l-s)(l+s+1))` and re-tags the result with spin `s+1`.
/// The shell `l = s` (for `s >= 0`) is annihilated and shells below the new
/// `|s+1|` floor are dropped.
pub fn spin_raise(coeffs: &SpinCoefficients) -> Result<SpinCoefficients> {
    let s = coeffs.spin();
    let new_s = s + 1;
    let new_lmin = new_s.unsigned_abs();
    if coeffs.l_max() < new_lmin {
        return Err(Error::UndefinedHarmonic {
            s: new_s,
            l: coeffs.l_max(),
        });
    }
    let mut out = SpinCoefficients::zeros(new_s, coeffs.l_max())?;
    for l in new_lmin.max(coeffs.l_min())..=coeffs.l_max() {
        let lf = l as f64;
        let sf = s as f64;
        let factor = ((lf - sf) * (lf + sf + 1.0)).max(0.0).sqrt();
        for m in -(l as i64)..=(l as i64) {
            out.set(l, m, coeffs.get(l, m) * factor);
        }
    }
    Ok(out)
}

/// Spin-lowering: multiplies shell `l` by `-sqrt((l+s)(l-s+1))`, spin `s-1`.
pub fn spin_lower(coeffs: &SpinCoefficients) -> Result<SpinCoefficients> {
    let s = coeffs.spin();
    let new_s = s - 1;
    let new_lmin = new_s.unsigned_abs();
    if coeffs.l_max() < new_lmin {
        return Err(Error::UndefinedHarmonic {
            s: new_s,
            l: coeffs.l_max(),
        });
    }
    let mut out = SpinCoefficients::zeros(new_s, coeffs.l_max())?;
    for l in new_lmin.max(coeffs.l_min())..=coeffs.l_max() {
        let lf = l as f64;
        let sf = s as f64;
        let factor = -((lf + sf) * (lf - sf + 1.0)).max(0.0).sqrt();
        for m in -(l as i64)..=(l as i64) {
            out.set(l, m, coeffs.get(l, m) * factor);
        }
    }
    Ok(out)
}

/// Spin Laplacian: shell multiplier `lambda_{ls}`.
pub fn laplacian_s(coeffs: &SpinCoefficients) -> SpinCoefficients {
    let s = coeffs.spin();
    coeffs.scaled(|l| eigenvalue(s, l).expect("valid shell"))
}

/// Coefficients of the `s`-zonal harmonic of shell `l`:
/// a single entry `(-1)^{s_+} sqrt((2l+1)/4pi)` at `m = -s`.
pub fn zonal_coefficients(s: i32, l: u32, l_max: u32) -> Result<SpinCoefficients> {
    if l < s.unsigned_abs() || l > l_max {
        return Err(Error::UndefinedHarmonic { s, l });
    }
    let mut out = SpinCoefficients::zeros(s, l_max)?;
    let sign = if s > 0 && s % 2 == 1 { -1.0 } else { 1.0 };
    out.set(
        l,
        -(s as i64),
        Complex64::new(sign * ((2.0 * l as f64 + 1.0) / (4.0 * PI)).sqrt(), 0.0),
    );
    Ok(out)
}

/// The pole functional `L f = lim_{theta->0+} e^{i s phi} f_I(theta, phi)`,
/// computed spectrally: only `m = -s` coefficients survive the limit.
pub fn pole_functional(coeffs: &SpinCoefficients) -> Complex64 {
    let s = coeffs.spin();
    let sign = if s > 0 && s % 2 == 1 { -1.0 } else { 1.0 };
    let mut acc = Complex64::new(0.0, 0.0);
    for l in coeffs.l_min()..=coeffs.l_max() {
        acc += coeffs.get(l, -(s as i64)) * (sign * ((2.0 * l as f64 + 1.0) / (4.0 * PI)).sqrt());
    }
    acc
}

/// Electric/magnetic split: `E_lm = (a_lm + conj(a_{l,-m}))/2`,
/// `M_lm = -i (a_lm - conj(a_{l,-m}))/2`. Both parts are involutive and
/// `a = E + i M` exactly.
pub fn em_decompose(coeffs: &SpinCoefficients) -> (SpinCoefficients, SpinCoefficients) {
    let mut e = coeffs.clone();
    let mut m_part = coeffs.clone();
    for l in coeffs.l_min()..=coeffs.l_max() {
        for m in -(l as i64)..=(l as i64) {
            let a = coeffs.get(l, m);
            let b = coeffs.get(l, -m).conj();
            e.set(l, m, (a + b) * 0.5);
            m_part.set(l, m, (a - b) * Complex64::new(0.0, -0.5));
        }
    }
    (e, m_part)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_coeffs(s: i32, l_max: u32, seed: u64) -> SpinCoefficients {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut c = SpinCoefficients::zeros(s, l_max).unwrap();
        for l in c.l_min()..=l_max {
            for m in -(l as i64)..=(l as i64) {
                c.set(
                    l,
                    m,
                    Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
                );
            }
        }
        c
    }

    #[test]
    fn eigen_examples() {
        assert_eq!(eigen(2, 2).unwrap().lambda, 0.0);
        assert_eq!(eigen(-2, 3).unwrap().lambda, 6.0);
        assert_eq!(eigen(0, 7).unwrap().b, 1.0);
        assert_eq!(eigen(0, 7).unwrap().lambda, 56.0);
        // symmetric in s -> -s and equal to l(l+1) - s(s+1) for s >= 0
        for s in [-3i32, -1, 0, 2, 4] {
            for l in s.unsigned_abs()..=9 {
                let lam = eigenvalue(s, l).unwrap();
                assert_eq!(lam, eigenvalue(-s, l).unwrap());
                let lf = l as f64;
                let sa = s.unsigned_abs() as f64;
                assert_eq!(lam, lf * (lf + 1.0) - sa * (sa + 1.0));
            }
        }
        assert!(eigen(3, 2).is_err());
    }

    #[test]
    fn eigenvalues_increase_and_vanish_at_floor() {
        for s in [-2i32, 0, 3] {
            let l0 = s.unsigned_abs();
            assert_eq!(eigenvalue(s, l0).unwrap(), 0.0);
            let mut prev = -1.0;
            for l in l0..l0 + 10 {
                let lam = eigenvalue(s, l).unwrap();
                assert!(lam > prev);
                prev = lam;
            }
        }
    }

    #[test]
    fn ladder_multipliers() {
        // s=0, l=1 shell picks up sqrt(2) under raising, -sqrt(2) under lowering
        let mut c = SpinCoefficients::zeros(0, 2).unwrap();
        c.set(1, 0, Complex64::new(1.0, 0.0));
        let up = spin_raise(&c).unwrap();
        assert!((up.get(1, 0).re - 2.0f64.sqrt()).abs() < 1e-15);
        let down = spin_lower(&c).unwrap();
        assert!((down.get(1, 0).re + 2.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn raise_annihilates_bottom_shell() {
        let mut c = SpinCoefficients::zeros(2, 4).unwrap();
        c.set(2, 1, Complex64::new(1.0, 0.0));
        let up = spin_raise(&c).unwrap();
        assert_eq!(up.spin(), 3);
        assert_eq!(up.get(3, 1), Complex64::new(0.0, 0.0));
        assert!(up.norm_sq() < 1e-30);
    }

    #[test]
    fn lower_annihilates_negative_floor() {
        let mut c = SpinCoefficients::zeros(-2, 4).unwrap();
        c.set(2, 0, Complex64::new(1.0, 0.0));
        let down = spin_lower(&c).unwrap();
        assert_eq!(down.spin(), -3);
        assert!(down.norm_sq() < 1e-30);
    }

    #[test]
    fn laplacian_is_lower_compose_raise() {
        // -lower(raise(f)) has multiplier lambda for s >= 0
        let c = random_coeffs(1, 8, 42);
        let lap = laplacian_s(&c);
        let composed = spin_lower(&spin_raise(&c).unwrap()).unwrap();
        for l in 1..=8u32 {
            for m in -(l as i64)..=(l as i64) {
                let want = lap.get(l, m);
                let got = -composed.get(l, m);
                assert!((want - got).norm() < 1e-12 * (1.0 + want.norm()));
            }
        }
        // bottom shell is the null space
        let mut z = SpinCoefficients::zeros(3, 6).unwrap();
        z.set(3, -2, Complex64::new(0.3, 0.4));
        assert!(laplacian_s(&z).norm_sq() < 1e-30);
    }

    #[test]
    fn em_recomposition_and_involutivity() {
        let c = random_coeffs(2, 6, 7);
        let (e, m) = em_decompose(&c);
        assert!(e.is_involutive(1e-15));
        assert!(m.is_involutive(1e-15));
        for l in 2..=6u32 {
            for mm in -(l as i64)..=(l as i64) {
                let back = e.get(l, mm) + Complex64::new(0.0, 1.0) * m.get(l, mm);
                assert!((back - c.get(l, mm)).norm() < 1e-14);
            }
        }
        // involutive input has no magnetic part
        let (e2, m2) = em_decompose(&e);
        assert!(m2.norm_sq() < 1e-28);
        assert!((e2.norm_sq() - e.norm_sq()).abs() < 1e-12);
        // i * involutive input has no electric part
        let mut ie = e.clone();
        for l in ie.l_min()..=ie.l_max() {
            for mm in -(l as i64)..=(l as i64) {
                let v = ie.get(l, mm);
                ie.set(l, mm, Complex64::new(0.0, 1.0) * v);
            }
        }
        let (e3, _) = em_decompose(&ie);
        assert!(e3.norm_sq() < 1e-28);
    }

    #[test]
    fn zonal_and_pole_functional() {
        for s in [-2i32, -1, 0, 1, 2] {
            for l in [s.unsigned_abs().max(1), 5] {
                let z = zonal_coefficients(s, l, 6).unwrap();
                let lf = pole_functional(&z);
                let want = (2.0 * l as f64 + 1.0) / (4.0 * PI);
                assert!(
                    (lf.re - want).abs() < 1e-14 && lf.im.abs() < 1e-15,
                    "s={s} l={l}: {lf}"
                );
            }
        }
        // anything supported off m = -s maps to zero
        let mut c = SpinCoefficients::zeros(1, 4).unwrap();
        c.set(3, 0, Complex64::new(0.7, -0.2));
        c.set(2, 2, Complex64::new(1.0, 1.0));
        assert_eq!(pole_functional(&c), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn no_shells_below_spin_floor() {
        assert!(SpinCoefficients::zeros(3, 2).is_err());
        let c = SpinCoefficients::zeros(3, 3).unwrap();
        assert_eq!(c.len(), 7);
        assert_eq!(c.l_min(), 3);
    }
}
