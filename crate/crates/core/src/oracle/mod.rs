//! Exact expected termination times of the single-agent searches.
//!
//! Three independent routes: closed forms ([`closed`]), the dense linear
//! system over the turning-point ladder ([`ladder`]) and the block inverse
//! built from the closed-form `(I - P^2)^-1` ([`block`]). [`randomized`]
//! integrates the ladder over the random scale `epsilon`, and [`bounds`]
//! holds the per-interval competitive-ratio bounds.

pub mod block;
pub mod bounds;
pub mod closed;
pub mod ladder;
pub mod randomized;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

pub use block::{block_inverse, expected_time_det_block, inverse_b_closed, inverse_bp_row};
pub use bounds::{cr_bound_det, cr_bound_rand};
pub use closed::expected_time_det_closed;
pub use ladder::{expected_time_det_system, Ladder, LadderSolution, SystemMatrices};
pub use randomized::{
    expected_time_rand_exact, expected_time_rand_system, expected_time_rand_unconditioned,
    rand_r0_case1, rand_r0_case2, Conditioning,
};

/// How an [`ExactExpectation`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Route {
    ClosedForm,
    SystemSolve,
    BlockInverse,
}

/// An exact expected termination time with its inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactExpectation {
    pub value: f64,
    pub route: Route,
    pub p: f64,
    pub g: f64,
    pub t: u32,
    pub delta: Option<f64>,
    pub n: f64,
}

impl ExactExpectation {
    pub fn ratio(&self) -> f64 {
        self.value / self.n
    }
}

/// `(2p - 1)^k` for integer `k`, sign handled by integer powering.
pub(crate) fn signed_pow(p: f64, k: i32) -> f64 {
    (2.0 * p - 1.0).powi(k)
}

/// Checks `0 < p < 1/2`, `2 <= g < 1/p` and `g^t < n <= g^(t+1)` (with a
/// relative slack of `1e-12` on the bracket).
pub(crate) fn check_det_domain(g: f64, p: f64, t: u32, n: f64) -> Result<()> {
    ensure("p", p, p > 0.0 && p < 0.5, "0 < p < 1/2")?;
    ensure("g", g, g >= 2.0 && g * p < 1.0, "2 <= g < 1/p")?;
    let lo = g.powi(t as i32);
    let slack = 1e-12;
    ensure(
        "n",
        n,
        n > lo * (1.0 - slack) && n <= lo * g * (1.0 + slack),
        "g^t < n <= g^(t+1)",
    )?;
    Ok(())
}
