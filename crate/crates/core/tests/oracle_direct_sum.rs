//! Exact-arithmetic oracle for the closed-form harmonic profile.
//!
//! At theta = pi/2 the half-angle factors are exact dyadic rationals
//! (cot = 1, sin^2 = 1/2), so the profile squares to an exact rational
//! multiple of 1/(4 pi). The oracle computes that rational with big-integer
//! arithmetic and checks both evaluators against it.

use num_bigint::BigInt;
use num_rational::BigRational;
use spinharm::harmonics::eval::{eval_profile_direct, ThetaProfiles};
use std::f64::consts::{FRAC_PI_2, PI};

fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

fn factorial(n: i64) -> BigInt {
    let mut acc = BigInt::from(1);
    for k in 2..=n {
        acc *= k;
    }
    acc
}

fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::from(0);
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Exact profile value at pi/2 as `sign * sqrt(q / (4 pi))` with rational q.
fn oracle_equator(s: i64, l: i64, m: i64) -> f64 {
    // integer alternating sum of the closed form
    let mut sum = BigInt::from(0);
    for r in 0..=(l - s).max(0) {
        let b1 = binomial(l - s, r);
        let b2 = binomial(l + s, r + s - m);
        if b1 == big(0) || b2 == big(0) {
            continue;
        }
        let term = b1 * b2;
        if (l - r - s).rem_euclid(2) == 1 {
            sum -= term;
        } else {
            sum += term;
        }
    }
    // q = (l+m)!(l-m)!(2l+1) / ((l+s)!(l-s)!) * sum^2 / 4^l
    let num = factorial(l + m) * factorial(l - m) * big(2 * l + 1) * sum.clone() * sum.clone();
    let den = factorial(l + s) * factorial(l - s) * BigInt::from(4).pow(l as u32);
    let q = BigRational::new(num, den);
    let qf = rational_to_f64(&q);
    let magnitude = (qf / (4.0 * PI)).sqrt();
    let sum_sign = if sum < big(0) { -1.0 } else { 1.0 };
    let phase = if m < 0 && m % 2 != 0 { -1.0 } else { 1.0 };
    phase * sum_sign * magnitude
}

fn rational_to_f64(q: &BigRational) -> f64 {
    // exact for the sizes involved after scaling: split into quotient and
    // remainder to keep precision
    let num = q.numer();
    let den = q.denom();
    let scale = BigInt::from(1u64) << 80;
    let scaled = num * &scale / den;
    let mut out = 0.0f64;
    let mut rest = scaled;
    let two63 = BigInt::from(1u64) << 63;
    let mut factor = 1.0f64;
    while rest != big(0) {
        let part = &rest % &two63;
        let part_i: i64 = i64::try_from(&part).expect("bounded chunk");
        out += part_i as f64 * factor;
        rest = (rest - part) / &two63;
        factor *= 9.223372036854776e18;
    }
    out / 2.0f64.powi(80)
}

#[test]
fn direct_sum_matches_exact_rational_oracle() {
    for s in -3i64..=3 {
        for l in s.abs()..=10 {
            for m in -l..=l {
                let want = oracle_equator(s, l, m);
                let got = eval_profile_direct(s as i32, l as u32, m, FRAC_PI_2).unwrap();
                assert!(
                    (got - want).abs() < 1e-13 * (1.0 + want.abs()),
                    "(s,l,m)=({s},{l},{m}): direct {got} vs oracle {want}"
                );
            }
        }
    }
}

#[test]
fn recursion_matches_exact_rational_oracle() {
    for s in -3i64..=3 {
        for l in [s.abs().max(1), 8, 15, 25] {
            let profiles = ThetaProfiles::new(s as i32, l as u32, FRAC_PI_2);
            for m in -l..=l {
                let want = oracle_equator(s, l, m);
                let got = profiles.get(l as u32, m);
                assert!(
                    (got - want).abs() < 1e-12 * (1.0 + want.abs()),
                    "(s,l,m)=({s},{l},{m}): recursion {got} vs oracle {want}"
                );
            }
        }
    }
}
