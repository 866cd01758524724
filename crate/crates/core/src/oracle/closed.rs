//! Closed-form expected time of the deterministic search.

use super::{check_det_domain, signed_pow, ExactExpectation, Route};
use crate::error::Result;

/// `R_0` for a target at `n` in `(g^t, g^(t+1)]`, first sweep toward it:
///
/// `(1-p) g^(t+1) (1 + (1-2p)(g + (g-1)(2p-1)^t)) / ((g-1)(1-gp)) - 2(1-p)/(g-1) + n`.
pub fn expected_time_det_closed(g: f64, p: f64, t: u32, n: f64) -> Result<ExactExpectation> {
    check_det_domain(g, p, t, n)?;
    Ok(ExactExpectation {
        value: det_closed_value(g, p, t, n),
        route: Route::ClosedForm,
        p,
        g,
        t,
        delta: None,
        n,
    })
}

pub(crate) fn det_closed_value(g: f64, p: f64, t: u32, n: f64) -> f64 {
    let q = 1.0 - p;
    let head = q
        * g.powi(t as i32 + 1)
        * (1.0 + (1.0 - 2.0 * p) * (g + (g - 1.0) * signed_pow(p, t as i32)))
        / ((g - 1.0) * (1.0 - g * p));
    head - 2.0 * q / (g - 1.0) + n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fault_free_limit() {
        // Right 1, back 1, left 2, back 2, then n.
        let n = 1.0 + 1e-9;
        let v = expected_time_det_closed(2.0, 1e-9, 0, n).unwrap().value;
        assert!((v - (6.0 + n)).abs() < 1e-7);
        // t = 1, n = 3: 1 + 1 + 2 + 2 + 3.
        let v = expected_time_det_closed(2.0, 1e-12, 1, 3.0).unwrap().value;
        assert!((v - 9.0).abs() < 1e-9);
    }

    #[test]
    fn at_least_distance() {
        for &p in &[0.05, 0.2, 0.45] {
            for t in 0..8 {
                let n = 2f64.powi(t) * 1.3;
                assert!(expected_time_det_closed(2.0, p, t as u32, n).unwrap().value >= n);
            }
        }
    }

    #[test]
    fn domain() {
        assert!(expected_time_det_closed(2.0, 0.5, 1, 3.0).is_err());
        assert!(expected_time_det_closed(2.0, 0.2, 1, 5.0).is_err());
        assert!(expected_time_det_closed(3.0, 0.4, 1, 5.0).is_err());
        assert!(expected_time_det_closed(2.0, 0.2, 2, 8.0).is_ok());
    }
}
