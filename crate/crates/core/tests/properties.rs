//! Property tests over randomized parameters.

use num_complex::Complex64;
use proptest::prelude::*;
use spinharm::geom::{build_partition, geodesic_distance, reference_angle, Rotation, SpherePoint};
use spinharm::harmonics::em_decompose;
use spinharm::needlet::NeedletFilter;
use spinharm::SpinCoefficients;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_covers_sphere_with_bounded_cells(
        j in -6i32..0,
        a in 1.2f64..2.5,
        b in 0.15f64..0.9,
    ) {
        let tau = b * a.powi(j);
        prop_assume!(tau <= std::f64::consts::PI);
        let p = build_partition(j, a, b).unwrap();
        prop_assert!((p.total_area() - 4.0 * std::f64::consts::PI).abs() < 1e-9);
        prop_assert!(p.max_diameter() <= tau * (1.0 + 1e-12));
        prop_assert!(p.min_cell_area() > 0.0);
    }

    #[test]
    fn distance_is_rotation_invariant_and_symmetric(
        seed in 0u64..1000,
        axis_angle in 0.0f64..6.28,
    ) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = Rotation::uniform(&mut rng).apply(SpherePoint::NORTH);
        let y = Rotation::uniform(&mut rng).apply(SpherePoint::NORTH);
        let r = Rotation::about_z(axis_angle).compose(&Rotation::about_x(1.0));
        let d = geodesic_distance(&x, &y);
        prop_assert!((d - geodesic_distance(&y, &x)).abs() < 1e-15);
        prop_assert!((d - geodesic_distance(&r.apply(x), &r.apply(y))).abs() < 1e-12);
        prop_assert!((0.0..=std::f64::consts::PI + 1e-12).contains(&d));
    }

    #[test]
    fn reference_angle_cocycle(seed in 0u64..2000) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let p = Rotation::uniform(&mut rng).apply(SpherePoint::from_angles(1.0, 0.2));
        let r1 = Rotation::uniform(&mut rng);
        let r2 = Rotation::uniform(&mut rng);
        let r3 = Rotation::uniform(&mut rng);
        let angles = (
            reference_angle(&p, &r1, &r2),
            reference_angle(&p, &r2, &r3),
            reference_angle(&p, &r1, &r3),
        );
        if let (Ok(a12), Ok(a23), Ok(a13)) = angles {
            let mut defect = (a12 + a23 - a13).rem_euclid(2.0 * std::f64::consts::PI);
            if defect > std::f64::consts::PI {
                defect -= 2.0 * std::f64::consts::PI;
            }
            prop_assert!(defect.abs() < 1e-10, "cocycle defect {defect}");
        }
    }

    #[test]
    fn em_split_recomposes(seed in 0u64..1000, s in -3i32..=3) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let l_max = s.unsigned_abs() + 4;
        let mut c = SpinCoefficients::zeros(s, l_max).unwrap();
        for l in c.l_min()..=l_max {
            for m in -(l as i64)..=(l as i64) {
                c.set(l, m, Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            }
        }
        let (e, m) = em_decompose(&c);
        prop_assert!(e.is_involutive(1e-14));
        prop_assert!(m.is_involutive(1e-14));
        for (l, mm, v) in c.iter() {
            let back = e.get(l, mm) + Complex64::new(0.0, 1.0) * m.get(l, mm);
            prop_assert!((back - v).norm() < 1e-14);
        }
    }

    #[test]
    fn filter_squares_telescope(a in 1.05f64..3.0, u in 1e-3f64..1e6) {
        let f = NeedletFilter::new(a);
        let log_period = 2.0 * a.ln();
        let j_lo = ((1e-14f64.ln() - u.ln()) / log_period).floor() as i32;
        let j_hi = ((1e2f64.ln() - u.ln()) / log_period).ceil() as i32;
        let mut sum = 0.0;
        for j in j_lo..=j_hi {
            sum += f.eval_sq(a.powi(2 * j) * u);
        }
        prop_assert!((sum - 1.0).abs() < 1e-10, "a={a} u={u}: {sum}");
    }
}
