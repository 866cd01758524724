//! Scalar root finding.

use crate::error::{Error, Result};

/// Bisection on `[lo, hi]` until the bracket is narrower than `tol`.
/// `f(lo)` and `f(hi)` must not share a sign; an exact zero at either end is
/// returned as is.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.is_nan() || fhi.is_nan() || flo.signum() == fhi.signum() {
        return Err(Error::NotBracketed { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Principal branch of the Lambert W function for `y >= 0`: the `w >= 0`
/// with `w e^w = y`. Newton steps, falling back to bisection whenever a step
/// leaves the current bracket.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn lambert_w0(y: f64) -> Result<f64> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::OutOfRange {
            name: "y",
            value: y,
            expected: "0 <= y < inf",
        });
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let f = |w: f64| w * w.exp() - y;
    let (mut lo, mut hi) = (0.0, y.max(1.0));
    let mut w = (1.0 + y).ln();
    for _ in 0..200 {
        let fw = f(w);
        if fw == 0.0 {
            return Ok(w);
        }
        if fw < 0.0 {
            lo = w;
        } else {
            hi = w;
        }
        let step = fw / ((w + 1.0) * w.exp());
        let mut next = w - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - w).abs() <= 1e-16 * w.abs().max(1.0) || hi - lo <= 1e-16 {
            return Ok(next);
        }
        w = next;
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-9).is_err());
        assert_eq!(bisect(|x| x - 1.0, 1.0, 3.0, 1e-9).unwrap(), 1.0);
    }

    #[test]
    fn lambert_identity() {
        for &y in &[1e-6, 0.1, 1.0 / std::f64::consts::E, 1.0, 5.0, 1e6] {
            let w = lambert_w0(y).unwrap();
            assert!((w * w.exp() - y).abs() <= 1e-12 * y.max(1.0), "y={y}");
        }
        assert!((lambert_w0(1.0).unwrap() - 0.567_143_290_409_783_8).abs() < 1e-15);
        assert!(lambert_w0(-0.1).is_err());
    }
}
