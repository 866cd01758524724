//! Closed-form competitive ratios, their optimal expansion factors and the
//! threshold probabilities where they cross reference values.

use std::f64::consts::{LN_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::roots::{bisect, lambert_w0};

const ROOT_TOL: f64 = 1e-12;

fn check_p(p: f64) -> Result<f64> {
    ensure("p", p, p > 0.0 && p < 0.5, "0 < p < 1/2")
}

fn check_gp(g: f64, p: f64) -> Result<()> {
    check_p(p)?;
    ensure("g", g, g >= 2.0 && g * p < 1.0, "2 <= g < 1/p")?;
    Ok(())
}

/// Limit ratio of the deterministic search:
/// `(1 - g(2g(p-2)p + g + 2)) / ((1-g)(1-gp))`.
pub fn f_det(g: f64, p: f64) -> Result<f64> {
    check_gp(g, p)?;
    Ok((1.0 - g * (2.0 * g * (p - 2.0) * p + g + 2.0)) / ((1.0 - g) * (1.0 - g * p)))
}

/// Limit ratio of the randomized search:
/// `1 + (1-p)(1 + g(1-2p)) / ((1-gp) ln g)`.
pub fn f_rand(g: f64, p: f64) -> Result<f64> {
    check_gp(g, p)?;
    Ok(1.0 + (1.0 - p) * (1.0 + g * (1.0 - 2.0 * p)) / ((1.0 - g * p) * g.ln()))
}

/// `h_p(g) = (1-gp)(1 + g(1-2p)) - g(1-p) ln g`; `f_rand` is stationary
/// where it vanishes.
pub fn h(g: f64, p: f64) -> f64 {
    (1.0 - g * p) * (1.0 + g * (1.0 - 2.0 * p)) - g * (1.0 - p) * g.ln()
}

/// Breakpoint below which the deterministic optimizer exceeds 2:
/// `(2 - sqrt 2)/4`.
pub fn p_det_g2() -> f64 {
    (2.0 - SQRT_2) / 4.0
}

/// Breakpoint below which the randomized optimizer exceeds 2:
/// `(5 - sqrt(1 + ln^2 2 + 6 ln 2) - ln 2)/8`.
pub fn p0() -> f64 {
    (5.0 - (1.0 + LN_2 * LN_2 + 6.0 * LN_2).sqrt() - LN_2) / 8.0
}

/// Minimizer of `f_det` over `g >= 2`.
pub fn optimal_g_det(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(if p <= p_det_g2() {
        (-(SQRT_2 + 2.0) * p + SQRT_2 + 1.0) / (1.0 - 2.0 * p * p)
    } else {
        2.0
    })
}

/// Minimizer of `f_rand` over `g >= 2`: the root of `h_p` on `[2, 4]` for
/// `p <= p0`, else 2.
pub fn optimal_g_rand(p: f64) -> Result<f64> {
    check_p(p)?;
    if p > p0() {
        return Ok(2.0);
    }
    // Rounding can push h_p(2) a hair below zero right at p0.
    if h(2.0, p) <= 0.0 {
        return Ok(2.0);
    }
    bisect(|g| h(g, p), 2.0, 4.0, ROOT_TOL)
}

/// Competitive ratio of the optimally tuned deterministic search:
/// `2(sqrt 2 + 2)` up to `(2 - sqrt 2)/4`, then `6 - 4p + 1/(1-2p)`.
pub fn cr_theorem_det(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(if p <= p_det_g2() {
        2.0 * (SQRT_2 + 2.0)
    } else {
        6.0 - 4.0 * p + 1.0 / (1.0 - 2.0 * p)
    })
}

/// Competitive ratio of the optimally tuned randomized search:
/// `g_p ((1-p)/(1 - g_p p))^2 + 1` up to `p0`, then
/// `(1-p)(1 + 2(1-2p))/((1-2p) ln 2) + 1`.
pub fn cr_theorem_rand(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(if p <= p0() {
        let g = optimal_g_rand(p)?;
        let r = (1.0 - p) / (1.0 - g * p);
        g * r * r + 1.0
    } else {
        (1.0 - p) * (1.0 + 2.0 * (1.0 - 2.0 * p)) / ((1.0 - 2.0 * p) * LN_2) + 1.0
    })
}

/// Reference values of the optimal randomized cow-path search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambertReference {
    /// `W(1/e)`.
    pub w: f64,
    /// `1/W(1/e)`, the root of `g - g ln g + 1`.
    pub g: f64,
    /// `1/W(1/e) + 1`.
    pub cr: f64,
}

pub fn lambert_reference() -> LambertReference {
    let w = lambert_w0((-1.0f64).exp()).expect("1/e is in range");
    LambertReference {
        w,
        g: 1.0 / w,
        cr: 1.0 / w + 1.0,
    }
}

/// Follower speed of the wireless two-agent search:
/// `(1 - 2 sqrt(p - p^2)) / (1 - 2p)`.
pub fn wireless_speed(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok((1.0 - 2.0 * (p - p * p).sqrt()) / (1.0 - 2.0 * p))
}

/// `3 + 4 sqrt(p(1-p))`.
pub fn cr_wireless(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(3.0 + 4.0 * (p * (1.0 - p)).sqrt())
}

/// Wireless ratio for an arbitrary follower speed `s`:
/// `(5 - s(s + 4 - 8p)) / (1 - s^2)`.
pub fn cr_wireless_at_speed(p: f64, s: f64) -> Result<f64> {
    check_p(p)?;
    ensure("s", s, s > 0.0 && s < 1.0, "0 < s < 1")?;
    Ok((5.0 - s * (s + 4.0 - 8.0 * p)) / (1.0 - s * s))
}

/// Probabilities where the various ratios cross their reference values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub p_det_g2: f64,
    pub p0: f64,
    pub p_det_cr9: f64,
    pub p_rand_cr9: f64,
    /// Same value found by bisection on `cr_theorem_rand(p) = 9`.
    pub p_rand_cr9_bisection: f64,
    pub p_wireless_459: f64,
}

pub fn compute_thresholds() -> Thresholds {
    let ln2 = LN_2;
    let p_rand_cr9 = (7.0 + (1.0 + 256.0 * ln2 * ln2 - 96.0 * ln2).sqrt() - 16.0 * ln2) / 8.0;
    let p_rand_cr9_bisection = bisect(
        |p| cr_theorem_rand(p).expect("p in range") - 9.0,
        0.3,
        0.49,
        ROOT_TOL,
    )
    .expect("bracketed");
    let target = lambert_reference().cr;
    let p_wireless_459 = bisect(
        |p| 3.0 + 4.0 * (p * (1.0 - p)).sqrt() - target,
        1e-9,
        0.5,
        ROOT_TOL,
    )
    .expect("bracketed");
    Thresholds {
        p_det_g2: p_det_g2(),
        p0: p0(),
        p_det_cr9: (17f64.sqrt() - 1.0) / 8.0,
        p_rand_cr9,
        p_rand_cr9_bisection,
        p_wireless_459,
    }
}

/// Partial sums of `sum_{i<depth} (1-p) p^i 2^i d`, the expected cost of
/// an excursion that doubles after every failed turn.
pub fn divergence_partial_sums(p: f64, d: f64, depth: usize) -> Result<Vec<f64>> {
    ensure("p", p, p > 0.0 && p < 1.0, "0 < p < 1")?;
    ensure("d", d, d > 0.0 && d.is_finite(), "d > 0")?;
    if depth == 0 {
        return Err(Error::OutOfRange {
            name: "depth",
            value: 0.0,
            expected: ">= 1",
        });
    }
    let mut term = (1.0 - p) * d;
    let mut sum = 0.0;
    Ok((0..depth)
        .map(|_| {
            sum += term;
            term *= 2.0 * p;
            sum
        })
        .collect())
}

/// A competitive-ratio curve point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrCurve {
    pub p: f64,
    pub g_star: f64,
    pub cr: f64,
    /// `(1/2 - p) cr`.
    pub cr_scaled: f64,
}

impl CrCurve {
    fn new(p: f64, g_star: f64, cr: f64) -> Self {
        Self {
            p,
            g_star,
            cr,
            cr_scaled: (0.5 - p) * cr,
        }
    }
}

/// Row of the scaled competitive-ratio table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledCrRow {
    pub p: f64,
    pub scaled_det: f64,
    pub scaled_rand: f64,
}

/// Row of the expansion-factor table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRow {
    pub p: f64,
    pub g_det: f64,
    pub g_rand: f64,
}

/// The two summary tables over a grid of `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure1 {
    pub scaled: Vec<ScaledCrRow>,
    pub expansion: Vec<ExpansionRow>,
}

pub fn det_curve(p: f64) -> Result<CrCurve> {
    Ok(CrCurve::new(p, optimal_g_det(p)?, cr_theorem_det(p)?))
}

pub fn rand_curve(p: f64) -> Result<CrCurve> {
    Ok(CrCurve::new(p, optimal_g_rand(p)?, cr_theorem_rand(p)?))
}

pub fn figure1_tables(p_grid: &[f64]) -> Result<Figure1> {
    if p_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut scaled = Vec::with_capacity(p_grid.len());
    let mut expansion = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let d = det_curve(p)?;
        let r = rand_curve(p)?;
        scaled.push(ScaledCrRow {
            p,
            scaled_det: d.cr_scaled,
            scaled_rand: r.cr_scaled,
        });
        expansion.push(ExpansionRow {
            p,
            g_det: d.g_star,
            g_rand: r.g_star,
        });
    }
    Ok(Figure1 { scaled, expansion })
}

/// `n` evenly spaced interior points of `(lo, hi)`.
pub fn open_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64)
        .collect()
}
