//! Error-free transformations and exact comparisons between integers and floats.
//!
//! Thresholds such as `c^2`, `cosh T` or `e^T` are carried as `f64`; integer
//! quantities derived from lattice points are compared against the exact real
//! value of those floats, never against a rounded conversion of the integer.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::scalar::rational_from_f64;

/// `a * b = p + e` exactly.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `a + b = s + e` exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Compensated dot product (Ogita, Rump and Oishi); as accurate as if computed
/// in twice the working precision.
pub fn dot2(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    let mut c = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let (p, ep) = two_prod(x, y);
        let (t, es) = two_sum(s, p);
        s = t;
        c += ep + es;
    }
    s + c
}

/// Exact comparison of an integer with the real value of a float.
pub fn cmp_int_f64(m: i128, x: f64) -> Ordering {
    assert!(!x.is_nan(), "comparison against NaN");
    if x == f64::INFINITY {
        return Ordering::Less;
    }
    if x == f64::NEG_INFINITY {
        return Ordering::Greater;
    }
    const EXACT: i128 = 1 << 53;
    if m.abs() < EXACT {
        return (m as f64).partial_cmp(&x).expect("finite");
    }
    let floor = x.floor();
    if floor.abs() >= 1.0e38 {
        return if floor > 0.0 { Ordering::Less } else { Ordering::Greater };
    }
    let fi = floor as i128;
    match m.cmp(&fi) {
        Ordering::Equal if floor != x => Ordering::Less,
        other => other,
    }
}

/// Exact comparison of an integer with `c * c`, where `c` is a float.
pub fn cmp_int_square(m: i128, c: f64) -> Ordering {
    let (p, e) = two_prod(c, c);
    if p.abs() < 4.0e15 && e.is_finite() {
        // If m != p as reals, their gap is at least ulp(p) > |e|.
        match cmp_int_f64(m, p) {
            Ordering::Equal => 0.0f64.partial_cmp(&e).expect("finite"),
            other => other,
        }
    } else {
        let cr = rational_from_f64(c);
        BigRational::from_integer(BigInt::from(m)).cmp(&(&cr * &cr))
    }
}

/// Largest integer strictly below `x` (for `x > 0`), as used for the open
/// bound `q < cosh T`.
pub fn largest_int_below(x: f64) -> i128 {
    let f = x.ceil();
    let candidate = f as i128 - 1;
    if cmp_int_f64(candidate + 1, x) == Ordering::Less {
        candidate + 1
    } else {
        candidate
    }
}

const SQUARE_MOD64: u64 = {
    let mut mask = 0u64;
    let mut i = 0u64;
    while i < 64 {
        mask |= 1 << ((i * i) % 64);
        i += 1;
    }
    mask
};

/// Exact integer square root if `x` is a perfect square.
#[inline]
pub fn exact_sqrt(x: u64) -> Option<u64> {
    if (SQUARE_MOD64 >> (x & 63)) & 1 == 0 {
        return None;
    }
    let r = isqrt(x);
    (r * r == x).then_some(r)
}

/// Floor of the square root.
#[inline]
pub fn isqrt(x: u64) -> u64 {
    let mut r = (x as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|s| s > x) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= x) {
        r += 1;
    }
    r
}
