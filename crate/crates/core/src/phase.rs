//! Exact-as-possible evaluation of `e(x) = exp(2πi x)` at integer multiples
//! of a real frequency.

use std::f64::consts::TAU;

use num_complex::Complex64;

/// `e(x) = exp(2πi x)`.
#[inline]
pub fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * x)
}

/// Fractional part of `m · alpha` in `[0, 1)`, computed from the exact
/// double-double product so large `m` does not lose the fractional digits.
#[inline]
pub fn frac_mul(m: i64, alpha: f64) -> f64 {
    let mf = m as f64;
    let hi = mf * alpha;
    let lo = mf.mul_add(alpha, -hi);
    let f = (hi - hi.floor()) + lo;
    let f = f - f.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Fractional part of `m · p / q` in `[0, 1)`, exact up to the final division.
#[inline]
pub fn frac_mul_rational(m: i64, p: i64, q: i64) -> f64 {
    let r = ((m as i128 * p as i128).rem_euclid(q as i128)) as f64;
    r / q as f64
}
