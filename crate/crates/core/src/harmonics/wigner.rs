//! Wigner rotation matrices for harmonic coefficients.
//!
//! `D^l_{m'm}(R)` is defined by the expansion of the rotated basis section,
//! `sY^R_{lm} = sum_{m'} D^l_{m'm}(R) sY_{lm'}`, which makes it independent of
//! the spin weight. Rotating twice composes as
//! `rotate(rotate(a, R1), R2) = rotate(a, R1 R2)`, i.e. the matrices satisfy
//! `D(R1 R2) = D(R2) D(R1)` (the coefficient map is a right action, matching
//! the `f -> f(R .)` convention for scalars).
//!
//! Matrices are assembled from the ZYZ factorization, with the little-d
//! values taken from the same stable recursion the evaluators use.

use super::eval::wigner_d_column;
use super::SpinCoefficients;
use crate::geom::Rotation;
use num_complex::Complex64;

/// Rotation matrix on one shell, paper phase convention; entry `(m', m)` is
/// `D^l_{m'm}(R)`.
#[derive(Debug, Clone)]
pub struct WignerD {
    pub l: u32,
    /// Row-major `(2l+1) x (2l+1)`, row index `m' + l`, column index `m + l`.
    mat: Vec<Complex64>,
}

#[inline]
fn condon_shortley_fix(m: i64) -> f64 {
    // (-1)^{m_+}: relates the raw little-d phase to the convention in which
    // conj(Y_lm) = Y_{l,-m}
    if m > 0 && m % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

impl WignerD {
    pub fn new(l: u32, r: &Rotation) -> Self {
        let (alpha, beta, gamma) = r.zyz_angles();
        let li = l as i64;
        let n = (2 * li + 1) as usize;
        let mut mat = vec![Complex64::new(0.0, 0.0); n * n];
        // d columns are cheap to reuse: for fixed (m, m') we need only the
        // top entry of the recursion at degree l
        for m in -li..=li {
            let em_alpha = Complex64::from_polar(1.0, m as f64 * alpha);
            for mp in -li..=li {
                let d = *wigner_d_column(m, mp, beta, l)
                    .last()
                    .expect("l >= max(|m|,|m'|)");
                let em_gamma = Complex64::from_polar(1.0, mp as f64 * gamma);
                let phase = condon_shortley_fix(m) * condon_shortley_fix(mp);
                mat[(mp + li) as usize * n + (m + li) as usize] =
                    em_gamma * em_alpha * (d * phase);
            }
        }
        WignerD { l, mat }
    }

    #[inline]
    pub fn get(&self, m_prime: i64, m: i64) -> Complex64 {
        let li = self.l as i64;
        let n = (2 * li + 1) as usize;
        self.mat[(m_prime + li) as usize * n + (m + li) as usize]
    }

    /// `out_{m'} = sum_m D_{m'm} v_m` over one shell.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = 2 * self.l as usize + 1;
        assert_eq!(v.len(), n);
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (row, o) in out.iter_mut().enumerate() {
            let base = row * n;
            let mut acc = Complex64::new(0.0, 0.0);
            for (col, vv) in v.iter().enumerate() {
                acc += self.mat[base + col] * vv;
            }
            *o = acc;
        }
        out
    }

    pub fn matmul(&self, other: &WignerD) -> WignerD {
        assert_eq!(self.l, other.l);
        let n = 2 * self.l as usize + 1;
        let mut mat = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.mat[i * n + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    mat[i * n + j] += a * other.mat[k * n + j];
                }
            }
        }
        WignerD { l: self.l, mat }
    }

    pub fn max_abs_diff(&self, other: &WignerD) -> f64 {
        self.mat
            .iter()
            .zip(&other.mat)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
    }
}

/// Rotate a coefficient vector: `a'_{lm'} = sum_m D^l_{m'm}(R) a_{lm}`.
pub fn rotate_coefficients(coeffs: &SpinCoefficients, r: &Rotation) -> SpinCoefficients {
    let mut out = SpinCoefficients::zeros(coeffs.spin(), coeffs.l_max()).expect("same layout");
    for l in coeffs.l_min()..=coeffs.l_max() {
        let d = WignerD::new(l, r);
        let li = l as i64;
        let v: Vec<Complex64> = (-li..=li).map(|m| coeffs.get(l, m)).collect();
        let rotated = d.apply(&v);
        for (idx, m) in (-li..=li).enumerate() {
            out.set(l, m, rotated[idx]);
        }
    }
    out
}
