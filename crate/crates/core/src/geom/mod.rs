//! Sphere geometry: points, rotations, rotated charts and their reference
//! directions, geodesic distance, quadrature grids, equal-area partitions.
//!
//! The chart `U_R` is the sphere minus the poles of the rotated coordinate
//! system `R`; its reference direction at `p` is the unit tangent of the
//! rotated parallel circle through `p`, i.e. `rho_R(p) = (R z) x p`
//! normalized. Spin-`s` trivializations on overlapping charts differ by
//! `exp(i s psi)` where `psi` is the signed angle between the two reference
//! directions, measured in the tangent plane with the orientation fixed by
//! `J v = v x p` (the convention that makes the angle from the limit of the
//! parallel tangents at the south pole along the meridian `phi = 0` to the
//! one along meridian `phi` equal to `phi`).

pub mod partition;
pub mod quadrature;

pub use partition::{build_partition, Cell, ChartTag, Partition};
pub use quadrature::{build_quadrature, QuadratureGrid};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

const UNIT_TOL: f64 = 1e-12;

/// Point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    v: [f64; 3],
}

impl SpherePoint {
    /// Builds a point from a vector, normalizing it. Fails for near-zero input.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !(n.is_finite() && n > 1e-14) {
            return Err(Error::PoleEvaluation { theta: f64::NAN });
        }
        Ok(SpherePoint {
            v: [x / n, y / n, z / n],
        })
    }

    /// Colatitude/longitude constructor; `theta` in (0, pi) hits the open chart,
    /// the poles themselves are still representable (theta = 0 or pi).
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = (theta.sin(), theta.cos());
        let (sp, cp) = (phi.sin(), phi.cos());
        SpherePoint {
            v: [st * cp, st * sp, ct],
        }
    }

    pub const NORTH: SpherePoint = SpherePoint { v: [0.0, 0.0, 1.0] };
    pub const SOUTH: SpherePoint = SpherePoint {
        v: [0.0, 0.0, -1.0],
    };

    #[inline]
    pub fn vector(&self) -> [f64; 3] {
        self.v
    }

    /// Colatitude in [0, pi].
    #[inline]
    pub fn theta(&self) -> f64 {
        let z = self.v[2].clamp(-1.0, 1.0);
        let rho = (self.v[0] * self.v[0] + self.v[1] * self.v[1]).sqrt();
        rho.atan2(z)
    }

    /// Longitude in [-pi, pi). Zero at the poles by convention.
    #[inline]
    pub fn phi(&self) -> f64 {
        if self.v[0] == 0.0 && self.v[1] == 0.0 {
            return 0.0;
        }
        let p = self.v[1].atan2(self.v[0]);
        if p >= std::f64::consts::PI {
            p - 2.0 * std::f64::consts::PI
        } else {
            p
        }
    }

    /// True when the point is within `tol` of either coordinate pole.
    #[inline]
    pub fn near_pole(&self, tol: f64) -> bool {
        self.v[0] * self.v[0] + self.v[1] * self.v[1] < tol * tol
    }

    #[inline]
    pub fn dot(&self, other: &SpherePoint) -> f64 {
        dot(self.v, other.v)
    }
}

#[inline]
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Proper rotation of R^3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    m: [[f64; 3]; 3],
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// Validates orthogonality and unit determinant to 1e-12.
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Result<Self> {
        let r = Rotation { m };
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += m[k][i] * m[k][j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                if (s - want).abs() > UNIT_TOL {
                    return Err(Error::PoleInChart);
                }
            }
        }
        if (r.det() - 1.0).abs() > UNIT_TOL {
            return Err(Error::PoleInChart);
        }
        Ok(r)
    }

    pub fn about_x(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation {
            m: [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]],
        }
    }

    pub fn about_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation {
            m: [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]],
        }
    }

    pub fn about_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation {
            m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    pub fn from_axis_angle(axis: SpherePoint, angle: f64) -> Self {
        let [x, y, z] = axis.vector();
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        Rotation {
            m: [
                [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
                [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
                [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
            ],
        }
    }

    /// Uniform random rotation (quaternion method).
    pub fn uniform<R: rand::Rng + ?Sized>(rng: &mut R) -> Self {
        use std::f64::consts::TAU;
        let u1: f64 = rng.gen();
        let u2: f64 = rng.gen();
        let u3: f64 = rng.gen();
        let a = (1.0 - u1).sqrt();
        let b = u1.sqrt();
        let q = [
            a * (TAU * u2).sin(),
            a * (TAU * u2).cos(),
            b * (TAU * u3).sin(),
            b * (TAU * u3).cos(),
        ];
        let (x, y, z, w) = (q[0], q[1], q[2], q[3]);
        Rotation {
            m: [
                [
                    1.0 - 2.0 * (y * y + z * z),
                    2.0 * (x * y - z * w),
                    2.0 * (x * z + y * w),
                ],
                [
                    2.0 * (x * y + z * w),
                    1.0 - 2.0 * (x * x + z * z),
                    2.0 * (y * z - x * w),
                ],
                [
                    2.0 * (x * z - y * w),
                    2.0 * (y * z + x * w),
                    1.0 - 2.0 * (x * x + y * y),
                ],
            ],
        }
    }

    #[inline]
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.m
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    #[inline]
    pub fn apply(&self, p: SpherePoint) -> SpherePoint {
        let v = p.vector();
        SpherePoint {
            v: self.apply_vec(v),
        }
    }

    #[inline]
    pub fn apply_vec(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.m;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    /// Inverse = transpose.
    pub fn inverse(&self) -> Rotation {
        let m = &self.m;
        Rotation {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    m[i][j] += self.m[i][k] * other.m[k][j];
                }
            }
        }
        Rotation { m }
    }

    /// Pole of the rotated coordinate system, `R z`.
    #[inline]
    pub fn north(&self) -> [f64; 3] {
        [self.m[0][2], self.m[1][2], self.m[2][2]]
    }

    /// ZYZ Euler angles: `self = Rz(alpha) Ry(beta) Rz(gamma)`, beta in [0, pi].
    pub fn zyz_angles(&self) -> (f64, f64, f64) {
        let m = &self.m;
        let cb = m[2][2].clamp(-1.0, 1.0);
        let sb = (m[0][2] * m[0][2] + m[1][2] * m[1][2]).sqrt();
        if sb > 1e-14 {
            let beta = sb.atan2(cb);
            let alpha = m[1][2].atan2(m[0][2]);
            let gamma = m[2][1].atan2(-m[2][0]);
            (alpha, beta, gamma)
        } else if cb > 0.0 {
            // pure z-rotation
            (m[1][0].atan2(m[0][0]), 0.0, 0.0)
        } else {
            (
                (-m[0][1]).atan2(-m[0][0]),
                std::f64::consts::PI,
                0.0,
            )
        }
    }
}

/// Geodesic distance in [0, pi], stable near both endpoints.
///
/// `atan2(|x cross y|, x dot y)` agrees with `acos(x dot y)` but does not lose
/// digits when the points are nearly coincident or nearly antipodal.
pub fn geodesic_distance(x: &SpherePoint, y: &SpherePoint) -> f64 {
    let c = cross(x.vector(), y.vector());
    norm(c).atan2(x.dot(y))
}

/// Reference direction of chart `R` at `p`: unit tangent of the rotated
/// parallel circle through `p`, in the direction of increasing rotated
/// longitude.
pub fn reference_direction(p: &SpherePoint, chart: &Rotation) -> Result<[f64; 3]> {
    let n = chart.north();
    let t = cross(n, p.vector());
    let len = norm(t);
    if len < 1e-12 {
        return Err(Error::PoleInChart);
    }
    Ok([t[0] / len, t[1] / len, t[2] / len])
}

/// Signed angle in (-pi, pi] from tangent `v` to tangent `w` at `p`.
///
/// Orientation: `J v = v x p`, so the sign is that of `det[v, p, w]`.
fn signed_tangent_angle(p: &SpherePoint, v: [f64; 3], w: [f64; 3]) -> f64 {
    let jv = cross(v, p.vector());
    let s = dot(jv, w);
    let c = dot(v, w);
    let mut a = s.atan2(c);
    if a <= -std::f64::consts::PI {
        a += 2.0 * std::f64::consts::PI;
    }
    a
}

/// Angle `psi` such that a spin-`s` trivialization satisfies
/// `f_{R2}(p) = exp(i s psi) f_{R1}(p)`, i.e. the angle from the chart-`R1`
/// reference direction to the chart-`R2` one at `p`.
pub fn reference_angle(p: &SpherePoint, r1: &Rotation, r2: &Rotation) -> Result<f64> {
    let v = reference_direction(p, r1)?;
    let w = reference_direction(p, r2)?;
    Ok(signed_tangent_angle(p, v, w))
}

/// Signed angle at the north pole from the chart-`R` reference direction to
/// the fixed tangent `d/dy`. Appears in the zonal-kernel identity.
pub fn north_pole_angle_to_y(chart: &Rotation) -> Result<f64> {
    let p = SpherePoint::NORTH;
    let v = reference_direction(&p, chart)?;
    Ok(signed_tangent_angle(&p, v, [0.0, 1.0, 0.0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn point_round_trip() {
        for &(t, p) in &[(0.3, -2.1), (1.2, 0.0), (2.9, 3.0), (FRAC_PI_2, -PI)] {
            let pt = SpherePoint::from_angles(t, p);
            assert!((pt.theta() - t).abs() < 1e-12);
            let dp = (pt.phi() - p).rem_euclid(2.0 * PI);
            assert!(dp < 1e-12 || (2.0 * PI - dp) < 1e-12);
        }
    }

    #[test]
    fn distance_trivial_cases() {
        let n = SpherePoint::NORTH;
        let s = SpherePoint::SOUTH;
        let e = SpherePoint::from_angles(FRAC_PI_2, 0.4);
        assert_eq!(geodesic_distance(&n, &n), 0.0);
        assert!((geodesic_distance(&n, &s) - PI).abs() < 1e-15);
        assert!((geodesic_distance(&n, &e) - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn distance_rotation_invariant() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let r = Rotation::uniform(&mut rng);
            let x = Rotation::uniform(&mut rng).apply(SpherePoint::NORTH);
            let y = Rotation::uniform(&mut rng).apply(SpherePoint::NORTH);
            let d0 = geodesic_distance(&x, &y);
            let d1 = geodesic_distance(&r.apply(x), &r.apply(y));
            assert!((d0 - d1).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_validation() {
        assert!(Rotation::from_matrix(Rotation::about_z(0.7).matrix()).is_ok());
        let mut bad = Rotation::IDENTITY.matrix();
        bad[0][0] = 1.0 + 1e-9;
        assert!(Rotation::from_matrix(bad).is_err());
        // reflections are rejected
        let refl = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]];
        assert!(Rotation::from_matrix(refl).is_err());
    }

    #[test]
    fn zyz_factorization_reconstructs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let r = Rotation::uniform(&mut rng);
            let (a, b, g) = r.zyz_angles();
            let rebuilt = Rotation::about_z(a)
                .compose(&Rotation::about_y(b))
                .compose(&Rotation::about_z(g));
            for i in 0..3 {
                for j in 0..3 {
                    assert!((r.matrix()[i][j] - rebuilt.matrix()[i][j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn reference_angle_same_chart_is_zero() {
        let p = SpherePoint::from_angles(1.1, 0.3);
        let r = Rotation::about_y(0.8);
        assert_eq!(reference_angle(&p, &r, &r).unwrap(), 0.0);
    }

    #[test]
    fn reference_angle_antisymmetric() {
        let p = SpherePoint::from_angles(1.3, -0.7);
        let r1 = Rotation::about_x(0.5);
        let r2 = Rotation::about_y(-0.9);
        let a = reference_angle(&p, &r1, &r2).unwrap();
        let b = reference_angle(&p, &r2, &r1).unwrap();
        let sum = (a + b).rem_euclid(2.0 * PI);
        assert!(sum < 1e-12 || (2.0 * PI - sum) < 1e-12);
    }

    #[test]
    fn reference_angle_errors_at_chart_pole() {
        let p = SpherePoint::NORTH;
        assert!(matches!(
            reference_angle(&p, &Rotation::IDENTITY, &Rotation::about_x(0.3)),
            Err(Error::PoleInChart)
        ));
    }

    #[test]
    fn z_rotation_leaves_reference_direction() {
        let p = SpherePoint::from_angles(0.9, 1.7);
        let r = Rotation::about_z(1.234);
        let a = reference_angle(&p, &Rotation::IDENTITY, &r).unwrap();
        assert!(a.abs() < 1e-12);
    }

    /// Rotation about the axis through an equatorial point: the reference
    /// direction tilts by the rotation angle, with the sign fixed by the
    /// tangent-plane orientation. Cross-checked against a finite-difference
    /// pushforward of the rotated parallel curve.
    #[test]
    fn equatorial_axis_rotation_angle_matches_pushforward() {
        let p = SpherePoint::new(1.0, 0.0, 0.0).unwrap();
        for &gamma in &[0.2, 0.9, -0.6, 1.4] {
            let r2 = Rotation::about_x(gamma);
            let psi = reference_angle(&p, &Rotation::IDENTITY, &r2).unwrap();

            // oracle: differentiate h -> R2 * angles(R2^-1 p + h in longitude)
            let q = r2.inverse().apply(p);
            let (t0, p0) = (q.theta(), q.phi());
            let h = 1e-6;
            let plus = r2.apply(SpherePoint::from_angles(t0, p0 + h));
            let minus = r2.apply(SpherePoint::from_angles(t0, p0 - h));
            let w = [
                (plus.vector()[0] - minus.vector()[0]) / (2.0 * h),
                (plus.vector()[1] - minus.vector()[1]) / (2.0 * h),
                (plus.vector()[2] - minus.vector()[2]) / (2.0 * h),
            ];
            let wn = norm(w);
            let w = [w[0] / wn, w[1] / wn, w[2] / wn];
            let v = reference_direction(&p, &Rotation::IDENTITY).unwrap();
            let oracle = signed_tangent_angle(&p, v, w);
            assert!(
                (psi - oracle).abs() < 1e-9,
                "gamma={gamma}: psi={psi} oracle={oracle}"
            );
            // with this orientation the angle comes out as -gamma
            assert!((psi + gamma).abs() < 1e-12);
        }
    }

    #[test]
    fn cocycle_identity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let p = Rotation::uniform(&mut rng).apply(SpherePoint::from_angles(1.0, 0.0));
            let r1 = Rotation::uniform(&mut rng);
            let r2 = Rotation::uniform(&mut rng);
            let r3 = Rotation::uniform(&mut rng);
            let a12 = match reference_angle(&p, &r1, &r2) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let a23 = match reference_angle(&p, &r2, &r3) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let a13 = match reference_angle(&p, &r1, &r3) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let mut diff = (a12 + a23 - a13).rem_euclid(2.0 * PI);
            if diff > PI {
                diff -= 2.0 * PI;
            }
            assert!(diff.abs() < 1e-10, "cocycle defect {diff}");
        }
    }
}
