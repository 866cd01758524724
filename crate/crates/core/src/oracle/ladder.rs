//! The linear system over the ladder of intended turning points.
//!
//! Turning points are `x_k = x_0 g^k`; the target sits at `n` on the right
//! with `x_{K-1} < n <= x_K`. `R_k` (`L_k`) is the expected termination time
//! of an agent leaving the origin to the right (left) with intended
//! expansion `x_k`. `R_k = n` for `k >= K`, `L_K` has a closed form, and the
//! remaining `2K` unknowns solve `A [R; L] = [alpha; beta]` with
//! `A = [[I, P], [P, I]]` and `P_ij = -(1-p) p^(j-i-1)` for `j > i`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_det_domain, ExactExpectation, Route};
use crate::error::{ensure, Error, Result};

/// Expected-time ladder for one target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub g: f64,
    pub p: f64,
    /// First intended turning point `x_0`.
    pub x0: f64,
    /// Index `K` of the first turning point at or beyond the target.
    pub size: usize,
    pub n: f64,
}

/// Assembled system of a [`Ladder`].
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    pub p_mat: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub alpha: DVector<f64>,
    pub beta: DVector<f64>,
}

/// Solution of a [`Ladder`]: `r[k] = R_k`, `l[k] = L_k` for `k < K`, and
/// the boundary value `L_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderSolution {
    pub r: Vec<f64>,
    pub l: Vec<f64>,
    pub l_boundary: f64,
    pub n: f64,
}

impl LadderSolution {
    /// `R_0`: first sweep toward the target.
    pub fn r0(&self) -> f64 {
        self.r.first().copied().unwrap_or(self.n)
    }

    /// `L_0`: first sweep away from the target.
    pub fn l0(&self) -> f64 {
        self.l.first().copied().unwrap_or(self.l_boundary)
    }

    pub fn r_at(&self, k: usize) -> f64 {
        self.r.get(k).copied().unwrap_or(self.n)
    }

    pub fn l_at(&self, k: usize) -> f64 {
        if k < self.l.len() {
            self.l[k]
        } else {
            self.l_boundary
        }
    }
}

/// `P` of size `m`: `P_ij = -(1-p) p^(j-i-1)` above the diagonal.
pub fn coupling_matrix(p: f64, m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, m, |i, j| {
        if j > i {
            -(1.0 - p) * p.powi((j - i - 1) as i32)
        } else {
            0.0
        }
    })
}

/// `[[I, P], [P, I]]`.
pub fn block_matrix(pm: &DMatrix<f64>) -> DMatrix<f64> {
    let m = pm.nrows();
    let mut a = DMatrix::identity(2 * m, 2 * m);
    a.view_mut((0, m), (m, m)).copy_from(pm);
    a.view_mut((m, 0), (m, m)).copy_from(pm);
    a
}

impl Ladder {
    pub fn new(g: f64, p: f64, x0: f64, size: usize, n: f64) -> Result<Self> {
        ensure("p", p, p > 0.0 && p < 1.0, "0 < p < 1")?;
        ensure("g", g, g > 1.0 && g * p < 1.0, "1 < g < 1/p")?;
        ensure("x0", x0, x0 >= 0.0 && x0.is_finite(), "x0 >= 0")?;
        ensure("n", n, n >= 0.0 && n.is_finite(), "n >= 0")?;
        Ok(Self { g, p, x0, size, n })
    }

    /// Deterministic ladder: `x_0 = 1`, `K = t + 1`.
    pub fn deterministic(g: f64, p: f64, t: u32, n: f64) -> Result<Self> {
        Self::new(g, p, 1.0, t as usize + 1, n)
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x0 * self.g.powi(k as i32)
    }

    /// `L_K = 2(1-p) x_K / (1 - gp) + n`.
    pub fn l_boundary(&self) -> f64 {
        2.0 * (1.0 - self.p) * self.x(self.size) / (1.0 - self.g * self.p) + self.n
    }

    /// `alpha_k = 2(1-p) x_k/(1-gp) (1 + (1-2p) g (pg)^(K-1-k)) + n p^(K-1-k)`.
    pub fn alpha(&self, k: usize) -> f64 {
        let (g, p) = (self.g, self.p);
        let e = (self.size - 1 - k) as i32;
        2.0 * (1.0 - p) * self.x(k) / (1.0 - g * p) * (1.0 + (1.0 - 2.0 * p) * g * (p * g).powi(e))
            + self.n * p.powi(e)
    }

    /// `beta_k = 2(1-p) x_k/(1-gp) + n p^(K-1-k)`.
    pub fn beta(&self, k: usize) -> f64 {
        let (g, p) = (self.g, self.p);
        let e = (self.size - 1 - k) as i32;
        2.0 * (1.0 - p) * self.x(k) / (1.0 - g * p) + self.n * p.powi(e)
    }

    /// `alpha_k` from its defining sums, before simplification:
    /// `n p^(K-k) + 2(1-p) sum_{i<K-k} p^i x_{k+i} + (1-p) p^(K-k-1) L_K`.
    pub fn alpha_from_sums(&self, k: usize) -> f64 {
        let p = self.p;
        let m = self.size - k;
        let walk: f64 = (0..m).map(|i| p.powi(i as i32) * self.x(k + i)).sum();
        self.n * p.powi(m as i32)
            + 2.0 * (1.0 - p) * walk
            + (1.0 - p) * p.powi(m as i32 - 1) * self.l_boundary()
    }

    pub fn matrices(&self) -> SystemMatrices {
        let m = self.size;
        let p_mat = coupling_matrix(self.p, m);
        let a = block_matrix(&p_mat);
        SystemMatrices {
            p_mat,
            a,
            alpha: DVector::from_fn(m, |k, _| self.alpha(k)),
            beta: DVector::from_fn(m, |k, _| self.beta(k)),
        }
    }

    /// Solves the system by LU with partial pivoting.
    pub fn solve(&self) -> Result<LadderSolution> {
        let m = self.size;
        if m == 0 {
            return Ok(LadderSolution {
                r: Vec::new(),
                l: Vec::new(),
                l_boundary: self.l_boundary(),
                n: self.n,
            });
        }
        let sys = self.matrices();
        let mut b = DVector::zeros(2 * m);
        b.rows_mut(0, m).copy_from(&sys.alpha);
        b.rows_mut(m, m).copy_from(&sys.beta);
        let x = sys.a.lu().solve(&b).ok_or(Error::SingularSystem(2 * m))?;
        Ok(LadderSolution {
            r: x.rows(0, m).iter().copied().collect(),
            l: x.rows(m, m).iter().copied().collect(),
            l_boundary: self.l_boundary(),
            n: self.n,
        })
    }

    /// Largest violation of the defining recurrences
    /// `R_k = (1-p) sum_i p^i (2 x_{k+i} + L_{k+i+1})` (stopping with `n` once
    /// the sweep reaches the target) and
    /// `L_k = (1-p) sum_i p^i (2 x_{k+i} + R_{k+i+1})`, relative to `R_0`.
    pub fn recurrence_residual(&self, sol: &LadderSolution) -> f64 {
        let (g, p) = (self.g, self.p);
        let q = 1.0 - p;
        let m = self.size;
        let mut worst: f64 = 0.0;
        for k in 0..m {
            let mut r = 0.0;
            for i in 0..(m - k) {
                r += q * p.powi(i as i32) * (2.0 * self.x(k + i) + sol.l_at(k + i + 1));
            }
            r += p.powi((m - k) as i32) * self.n;
            // Tail of L_k beyond the ladder: R_j = n and the walk series is geometric.
            let mut l = 0.0;
            for i in 0..(m - k) {
                l += q * p.powi(i as i32) * sol.r_at(k + i + 1);
            }
            l += p.powi((m - k) as i32) * self.n + 2.0 * q * self.x(k) / (1.0 - g * p);
            worst = worst.max((r - sol.r[k]).abs()).max((l - sol.l[k]).abs());
        }
        worst / sol.r0().max(1.0)
    }
}

/// `R_0` of the deterministic search by solving the ladder system. Also
/// returns all `R_k`, `L_k`.
pub fn expected_time_det_system(
    g: f64,
    p: f64,
    t: u32,
    n: f64,
) -> Result<(ExactExpectation, LadderSolution)> {
    check_det_domain(g, p, t, n)?;
    let sol = Ladder::deterministic(g, p, t, n)?.solve()?;
    let e = ExactExpectation {
        value: sol.r0(),
        route: Route::SystemSolve,
        p,
        g,
        t,
        delta: None,
        n,
    };
    Ok((e, sol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::closed::det_closed_value;

    #[test]
    fn alpha_matches_raw_sums() {
        for &(g, p, x0, m, n) in &[
            (2.0, 0.2, 1.0, 3, 5.0),
            (3.0, 0.1, 1.7, 4, 40.0),
            (2.4, 0.3, 1.0, 1, 1.5),
        ] {
            let lad = Ladder::new(g, p, x0, m, n).unwrap();
            for k in 0..m {
                let a = lad.alpha(k);
                assert!((a - lad.alpha_from_sums(k)).abs() < 1e-12 * a, "k={k}");
            }
        }
    }

    #[test]
    fn single_rung_is_alpha() {
        for &(g, p, n) in &[(2.0, 0.1, 1.5), (2.5, 0.3, 2.0), (2.0, 0.45, 1.01)] {
            let (e, sol) = expected_time_det_system(g, p, 0, n).unwrap();
            let lad = Ladder::deterministic(g, p, 0, n).unwrap();
            assert!((e.value - lad.alpha(0)).abs() < 1e-12 * e.value);
            assert_eq!(sol.r.len(), 1);
        }
    }

    #[test]
    fn boundary_value() {
        let (_, sol) = expected_time_det_system(2.0, 0.2, 2, 5.0).unwrap();
        assert!((sol.l_boundary - (2.0 * 0.8 * 8.0 / 0.6 + 5.0)).abs() < 1e-12);
    }

    #[test]
    fn matches_closed_form_and_recurrences() {
        let (e, sol) = expected_time_det_system(2.0, 0.25, 5, 50.0).unwrap();
        let c = det_closed_value(2.0, 0.25, 5, 50.0);
        assert!((e.value / c - 1.0).abs() < 1e-9);
        let lad = Ladder::deterministic(2.0, 0.25, 5, 50.0).unwrap();
        assert!(lad.recurrence_residual(&sol) < 1e-12);
        let (e, _) = expected_time_det_system(2.0, 0.2, 2, 5.0).unwrap();
        assert!((e.value / det_closed_value(2.0, 0.2, 2, 5.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn a_commutes_with_block_swap() {
        let sys = Ladder::deterministic(2.0, 0.3, 4, 20.0).unwrap().matrices();
        let m = 5;
        let mut swap = DMatrix::zeros(2 * m, 2 * m);
        for i in 0..m {
            swap[(i, m + i)] = 1.0;
            swap[(m + i, i)] = 1.0;
        }
        assert_eq!(&swap * &sys.a * &swap, sys.a);
        // P is strictly upper triangular, so A itself is not symmetric.
        assert_ne!(sys.a, sys.a.transpose());
        assert_eq!(sys.p_mat[(0, 1)], -0.7);
        assert!((sys.p_mat[(0, 2)] + 0.7 * 0.3).abs() < 1e-15);
        assert_eq!(sys.p_mat[(2, 1)], 0.0);
    }
}
