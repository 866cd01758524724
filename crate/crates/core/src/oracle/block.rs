//! Block-inverse route: `A^-1` assembled from a closed-form `(I - P^2)^-1`.

use nalgebra::DMatrix;

use super::ladder::{coupling_matrix, Ladder};
use super::{check_det_domain, signed_pow, ExactExpectation, Route};
use crate::error::{ensure, Result};

/// `delta_1 = 1`, `delta_m = (1-p)/2 (1 - (2p-1)^(m-2))` for `m >= 2`.
pub fn inverse_b_entry(p: f64, m: usize) -> f64 {
    if m == 1 {
        1.0
    } else {
        (1.0 - p) / 2.0 * (1.0 - signed_pow(p, m as i32 - 2))
    }
}

/// `(I - P^2)^-1` of size `t+1`: upper triangular Toeplitz with entries
/// `delta_(j-i+1)`.
pub fn inverse_b_closed(p: f64, t: u32) -> Result<DMatrix<f64>> {
    ensure("p", p, p > 0.0 && p < 1.0, "0 < p < 1")?;
    let m = t as usize + 1;
    Ok(DMatrix::from_fn(m, m, |i, j| {
        if j >= i {
            inverse_b_entry(p, j - i + 1)
        } else {
            0.0
        }
    }))
}

/// First row of `(I - P^2)^-1 P`: `0` then `-(1-p)/2 ((2p-1)^(r-2) + 1)` for
/// `r = 2..=t+1`.
pub fn inverse_bp_row(p: f64, t: u32) -> Result<Vec<f64>> {
    ensure("p", p, p > 0.0 && p < 1.0, "0 < p < 1")?;
    Ok((1..=t as usize + 1)
        .map(|r| {
            if r == 1 {
                0.0
            } else {
                -(1.0 - p) / 2.0 * (signed_pow(p, r as i32 - 2) + 1.0)
            }
        })
        .collect())
}

/// `A^-1 = [[B^-1, -B^-1 P], [-P B^-1, I + P B^-1 P]]` with `B = I - P^2`.
pub fn block_inverse(p: f64, t: u32) -> Result<DMatrix<f64>> {
    let m = t as usize + 1;
    let b_inv = inverse_b_closed(p, t)?;
    let pm = coupling_matrix(p, m);
    let b_inv_p = &b_inv * &pm;
    let mut out = DMatrix::zeros(2 * m, 2 * m);
    out.view_mut((0, 0), (m, m)).copy_from(&b_inv);
    out.view_mut((0, m), (m, m)).copy_from(&(-&b_inv_p));
    out.view_mut((m, 0), (m, m)).copy_from(&(-(&pm * &b_inv)));
    out.view_mut((m, m), (m, m))
        .copy_from(&(DMatrix::identity(m, m) + &pm * &b_inv_p));
    Ok(out)
}

/// `R_0 = sum_j B^-1_{1j} alpha_{j-1} - sum_j (B^-1 P)_{1j} beta_{j-1}` using
/// only the closed-form first rows.
pub fn expected_time_det_block(g: f64, p: f64, t: u32, n: f64) -> Result<ExactExpectation> {
    check_det_domain(g, p, t, n)?;
    let lad = Ladder::deterministic(g, p, t, n)?;
    let row = inverse_bp_row(p, t)?;
    let mut value = 0.0;
    for (j, r) in row.iter().enumerate() {
        value += inverse_b_entry(p, j + 1) * lad.alpha(j) - r * lad.beta(j);
    }
    Ok(ExactExpectation {
        value,
        route: Route::BlockInverse,
        p,
        g,
        t,
        delta: None,
        n,
    })
}
