//! Canonical text forms for numbers in CSV and JSON outputs.

use num_bigint::BigInt;
use num_rational::BigRational;

/// Seventeen significant digits; round-trips every finite `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// `a/b` in lowest terms (`a` alone when the denominator is 1).
pub fn fmt_rational(q: &BigRational) -> String {
    if q.denom() == &BigInt::from(1) {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_f64(s: &str) -> Option<f64> {
    s.trim().parse().ok()
}
