//! Exact rational helpers for certifying floating-point roots.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::bounds::{round_down, round_up};

pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn pow(q: &BigRational, k: u32) -> BigRational {
    num_traits::pow(q.clone(), k as usize)
}

/// Largest float found with `v^k <= q`, i.e. a certified lower bound on the
/// k-th root of a nonnegative rational.
pub fn root_lower(q: &BigRational, k: u32) -> f64 {
    assert!(k >= 1 && !q.is_negative());
    if q.is_zero() {
        return 0.0;
    }
    let mut v = to_f64(q).powf(1.0 / k as f64).max(0.0);
    let mut step = 1;
    while pow(&rational(v), k) > *q {
        for _ in 0..step {
            v = round_down(v);
        }
        step *= 2;
    }
    while pow(&rational(round_up(v)), k) <= *q {
        v = round_up(v);
    }
    v
}

/// Smallest float found with `v^k >= q`.
pub fn root_upper(q: &BigRational, k: u32) -> f64 {
    assert!(k >= 1 && !q.is_negative());
    if q.is_zero() {
        return 0.0;
    }
    if q.is_one() {
        return 1.0;
    }
    let mut v = to_f64(q).powf(1.0 / k as f64);
    let mut step = 1;
    while pow(&rational(v), k) < *q {
        for _ in 0..step {
            v = round_up(v);
        }
        step *= 2;
    }
    while v > 0.0 && pow(&rational(round_down(v)), k) >= *q {
        v = round_down(v);
    }
    v
}
