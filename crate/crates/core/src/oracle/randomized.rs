//! Expected time of the randomized search, whose turning points are
//! `g^(k + epsilon)` with `epsilon` uniform on `[0, 1)`.
//!
//! For a target at `n = g^(t + delta)` the first turning point at or beyond
//! `n` has index `t + 1` when `epsilon < delta` and `t` otherwise.

use serde::{Deserialize, Serialize};

use super::ladder::Ladder;
use super::{signed_pow, ExactExpectation, Route};
use crate::error::{ensure, Result};

/// Which first direction the expectation averages over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conditioning {
    /// First sweep toward the target.
    TowardTarget,
    /// First direction uniform, independent of `epsilon`.
    Unconditioned,
}

fn check_rand_domain(g: f64, p: f64, delta: f64, t: u32, n: f64) -> Result<()> {
    ensure("p", p, p > 0.0 && p < 0.5, "0 < p < 1/2")?;
    ensure("g", g, g >= 2.0 && g * p < 1.0, "2 <= g < 1/p")?;
    ensure(
        "delta",
        delta,
        delta > 0.0 && delta <= 1.0,
        "0 < delta <= 1",
    )?;
    let expect = g.powf(t as f64 + delta);
    ensure(
        "n",
        n,
        (n / expect - 1.0).abs() <= 1e-9,
        "n = g^(t + delta)",
    )?;
    Ok(())
}

fn r0_shape(g: f64, p: f64, t: i32, n: f64, eps: f64) -> f64 {
    n + g.powf(eps)
        * (p - 1.0)
        * (-2.0
            + g * (2.0 * p
                + g.powi(t) * (1.0 + g - 2.0 * g * p - (g - 1.0) * signed_pow(p, t + 1))))
        / ((g - 1.0) * (g * p - 1.0))
}

/// `R(0)` for a fixed `epsilon < delta` (turning points up to `g^(t+1+eps)`).
pub fn rand_r0_case1(g: f64, p: f64, t: u32, n: f64, eps: f64) -> f64 {
    r0_shape(g, p, t as i32, n, eps)
}

/// `R(0)` for a fixed `epsilon >= delta`: the first case with `t - 1`.
pub fn rand_r0_case2(g: f64, p: f64, t: u32, n: f64, eps: f64) -> f64 {
    r0_shape(g, p, t as i32 - 1, n, eps)
}

/// `E[T]` over `epsilon`, first sweep toward the target, in closed form:
///
/// `n (1 + (1-p)(g(2p-1) - 1)(1 + (2p-1)^t) / ((gp-1) ln g))
///  - 2(p-1)/((gp-1) ln g) + 2g(p-1)(p + g^t (p-1)(2p-1)^t) / ((gp-1) ln g)`.
pub fn expected_time_rand_exact(
    g: f64,
    p: f64,
    t: u32,
    delta: f64,
    n: f64,
) -> Result<ExactExpectation> {
    check_rand_domain(g, p, delta, t, n)?;
    let lg = g.ln();
    let den = (g * p - 1.0) * lg;
    let s = signed_pow(p, t as i32);
    let value = n * (1.0 + (1.0 - p) * (-1.0 + g * (2.0 * p - 1.0)) * (1.0 + s) / den)
        - 2.0 * (p - 1.0) / den
        + 2.0 * g * (p - 1.0) * (p + g.powi(t as i32) * (p - 1.0) * s) / den;
    Ok(ExactExpectation {
        value,
        route: Route::ClosedForm,
        p,
        g,
        t,
        delta: Some(delta),
        n,
    })
}

/// Coefficients `(a, b)` of `E = a g^eps + b n` for a ladder with `size`
/// rungs below the target, for the chosen conditioning.
fn linear_coefficients(g: f64, p: f64, size: usize, cond: Conditioning) -> Result<(f64, f64)> {
    let unit_scale = Ladder::new(g, p, 1.0, size, 0.0)?.solve()?;
    let unit_target = Ladder::new(g, p, 0.0, size, 1.0)?.solve()?;
    Ok(match cond {
        Conditioning::TowardTarget => (unit_scale.r0(), unit_target.r0()),
        Conditioning::Unconditioned => (
            0.5 * (unit_scale.r0() + unit_scale.l0()),
            0.5 * (unit_target.r0() + unit_target.l0()),
        ),
    })
}

/// `(R(0), L(0))` at a fixed `epsilon` by solving the ladder.
pub fn rand_pointwise_system(
    g: f64,
    p: f64,
    t: u32,
    delta: f64,
    n: f64,
    eps: f64,
) -> Result<(f64, f64)> {
    check_rand_domain(g, p, delta, t, n)?;
    ensure(
        "epsilon",
        eps,
        (0.0..1.0).contains(&eps),
        "0 <= epsilon < 1",
    )?;
    let size = if eps < delta {
        t as usize + 1
    } else {
        t as usize
    };
    let sol = Ladder::new(g, p, g.powf(eps), size, n)?.solve()?;
    Ok((sol.r0(), sol.l0()))
}

/// `E[T]` over `epsilon` by the ladder system. The solution is linear in
/// `(g^eps, n)` on each of `[0, delta)` and `[delta, 1)`, so the integral over
/// `epsilon` is exact.
pub fn expected_time_rand_system(
    g: f64,
    p: f64,
    t: u32,
    delta: f64,
    n: f64,
    cond: Conditioning,
) -> Result<ExactExpectation> {
    check_rand_domain(g, p, delta, t, n)?;
    let lg = g.ln();
    let gd = g.powf(delta);
    let (a1, b1) = linear_coefficients(g, p, t as usize + 1, cond)?;
    let (a2, b2) = linear_coefficients(g, p, t as usize, cond)?;
    let value = a1 * (gd - 1.0) / lg + b1 * n * delta + a2 * (g - gd) / lg + b2 * n * (1.0 - delta);
    Ok(ExactExpectation {
        value,
        route: Route::SystemSolve,
        p,
        g,
        t,
        delta: Some(delta),
        n,
    })
}

/// `E[T]` of the randomized search as run: uniform `epsilon` and uniform
/// first direction.
pub fn expected_time_rand_unconditioned(
    g: f64,
    p: f64,
    t: u32,
    delta: f64,
    n: f64,
) -> Result<ExactExpectation> {
    expected_time_rand_system(g, p, t, delta, n, Conditioning::Unconditioned)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::closed::det_closed_value;

    #[test]
    fn case1_at_zero_is_deterministic() {
        for &(g, p, t) in &[(2.0f64, 0.2, 2u32), (3.0, 0.1, 1), (2.5, 0.3, 4)] {
            let n = g.powf(t as f64 + 0.6);
            let a = rand_r0_case1(g, p, t, n, 0.0);
            assert!((a / det_closed_value(g, p, t, n) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cases_match_pointwise_system() {
        let (g, p, t, delta) = (3.0f64, 0.1, 1u32, 0.5);
        let n = g.powf(1.5);
        for &eps in &[0.0, 0.2, 0.49] {
            let (r, _) = rand_pointwise_system(g, p, t, delta, n, eps).unwrap();
            assert!((r / rand_r0_case1(g, p, t, n, eps) - 1.0).abs() < 1e-12);
        }
        for &eps in &[0.5, 0.7, 0.99] {
            let (r, _) = rand_pointwise_system(g, p, t, delta, n, eps).unwrap();
            assert!((r / rand_r0_case2(g, p, t, n, eps) - 1.0).abs() < 1e-12);
        }
        // t = 0 and eps >= delta: found on the first sweep.
        let n0 = g.powf(0.3);
        assert_eq!(rand_r0_case2(g, p, 0, n0, 0.5), n0);
        assert_eq!(rand_pointwise_system(g, p, 0, 0.3, n0, 0.5).unwrap().0, n0);
    }

    #[test]
    fn combined_value_matches_system_route() {
        for &(g, p, t, delta) in &[
            (3.0f64, 0.1, 1u32, 0.5),
            (2.0, 0.3, 4, 0.2),
            (2.2, 0.05, 0, 0.9),
            (2.0, 0.4, 6, 1.0),
        ] {
            let n = g.powf(t as f64 + delta);
            let c = expected_time_rand_exact(g, p, t, delta, n).unwrap().value;
            let s = expected_time_rand_system(g, p, t, delta, n, Conditioning::TowardTarget)
                .unwrap()
                .value;
            assert!(
                (c / s - 1.0).abs() < 1e-10,
                "{g} {p} {t} {delta}: {c} vs {s}"
            );
        }
    }

    #[test]
    fn reference_value() {
        let n = 3f64.powf(1.5);
        let c = expected_time_rand_exact(3.0, 0.1, 1, 0.5, n).unwrap().value;
        assert!((c - 22.86005367).abs() < 1e-7);
        let u = expected_time_rand_unconditioned(3.0, 0.1, 1, 0.5, n).unwrap();
        assert!((u.ratio() - 4.6637).abs() < 1e-4);
    }
}
