//! Continued-fraction rationalization of fitted floats.

use num_bigint::BigInt;
use num_rational::BigRational;

/// Best rational approximation of `x` whose error is at most `tol`, with the
/// denominator capped at `1/tol`. Returns `None` for non-finite input.
pub fn rationalize(x: f64, tol: f64) -> Option<BigRational> {
    if !x.is_finite() || !(tol > 0.0) {
        return None;
    }
    let cap = (1.0 / tol).min(1e18);
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut rest = x;
    loop {
        let a = rest.floor();
        if a.abs() > 1e18 {
            break;
        }
        let a = a as i128;
        let (h2, k2) = match (a.checked_mul(h1).and_then(|v| v.checked_add(h0)), a.checked_mul(k1).and_then(|v| v.checked_add(k0))) {
            (Some(h), Some(k)) => (h, k),
            _ => break,
        };
        if k2 as f64 > cap && k1 != 0 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = rest - a as f64;
        if (x - h1 as f64 / k1 as f64).abs() <= tol || frac == 0.0 {
            break;
        }
        rest = 1.0 / frac;
    }
    Some(BigRational::new(BigInt::from(h1), BigInt::from(k1)))
}
