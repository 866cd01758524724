//! Verification suites: cross-route agreement of the exact oracles,
//! reference constants and Monte Carlo checks of the two-agent protocols and
//! the bit harvest.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    compute_thresholds, cr_theorem_rand, cr_wireless, figure1_tables, optimal_g_det, optimal_g_rand,
};
use crate::bitforge::{harvest_amplified, plan_amplifier, uniform_from_bits};
use crate::error::{Error, Result};
use crate::kinematics::FaultProb;
use crate::montecarlo::{map_trials, run_trials};
use crate::oracle::ladder::{block_matrix, coupling_matrix};
use crate::oracle::randomized::Conditioning;
use crate::oracle::{
    block_inverse, expected_time_det_block, expected_time_det_closed, expected_time_det_system,
    expected_time_rand_exact, expected_time_rand_system, inverse_b_closed,
};
use crate::search::TargetPlacement;
use crate::two_agent::{simulated_turn, wireless_search};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    AppendixC,
    AppendixD,
    BlockInverse,
    Thresholds,
    Figure1,
    Lemma7,
    Theorem5,
    Bits,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::AppendixC,
        Suite::AppendixD,
        Suite::BlockInverse,
        Suite::Thresholds,
        Suite::Figure1,
        Suite::Lemma7,
        Suite::Theorem5,
        Suite::Bits,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::AppendixC => "appendix_c",
            Suite::AppendixD => "appendix_d",
            Suite::BlockInverse => "block_inverse",
            Suite::Thresholds => "thresholds",
            Suite::Figure1 => "figure1",
            Suite::Lemma7 => "lemma7",
            Suite::Theorem5 => "theorem5",
            Suite::Bits => "bits",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

/// Monte Carlo settings of the stochastic suites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub trials: u64,
    pub seed: u64,
    pub parallelism: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            trials: 100_000,
            seed: 1,
            parallelism: None,
        }
    }
}

/// One check: passes when `residual <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Runs one suite.
pub fn verify(suite: Suite, opts: &VerifyOptions) -> Result<VerifyReport> {
    let checks = match suite {
        Suite::AppendixC => appendix_c()?,
        Suite::AppendixD => appendix_d()?,
        Suite::BlockInverse => block_inverse_checks()?,
        Suite::Thresholds => thresholds(),
        Suite::Figure1 => figure1()?,
        Suite::Lemma7 => lemma7(&[0.2], 1e-3, opts)?,
        Suite::Theorem5 => theorem5(&[0.1, 0.25], 1e-4, opts)?,
        Suite::Bits => bits(&[0.1, 0.3, 0.45], opts)?,
    };
    Ok(VerifyReport {
        suite,
        passed: checks.iter().all(|c| c.pass),
        checks,
    })
}

/// `0.05, 0.10, ..., 0.45`.
pub fn p_grid() -> Vec<f64> {
    (1..=9).map(|i| i as f64 * 0.05).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Closed form against the linear system and the block inverse over
/// `p in {0.05..0.45}`, `g in {2, g*}`, `t in 0..=10`, `n = g^(t + 1/2)`.
pub fn appendix_c() -> Result<Vec<Check>> {
    let mut sys: f64 = 0.0;
    let mut blk: f64 = 0.0;
    for p in p_grid() {
        for g in [2.0, optimal_g_det(p)?] {
            for t in 0..=10 {
                let n = g.powf(t as f64 + 0.5);
                let c = expected_time_det_closed(g, p, t, n)?.value;
                sys = sys.max(rel(expected_time_det_system(g, p, t, n)?.0.value, c));
                blk = blk.max(rel(expected_time_det_block(g, p, t, n)?.value, c));
            }
        }
    }
    Ok(vec![
        Check::new("closed_vs_system", sys, 1e-9),
        Check::new("closed_vs_block", blk, 1e-9),
    ])
}

/// Combined randomized closed form against the integrated ladder system.
pub fn appendix_d() -> Result<Vec<Check>> {
    let mut worst: f64 = 0.0;
    for p in p_grid() {
        for g in [2.0, optimal_g_rand(p)?, 3.0] {
            if g * p >= 1.0 {
                continue;
            }
            for t in 0..=6 {
                for delta in [0.1, 0.25, 0.5, 0.75, 1.0] {
                    let n = g.powf(t as f64 + delta);
                    let c = expected_time_rand_exact(g, p, t, delta, n)?.value;
                    let s =
                        expected_time_rand_system(g, p, t, delta, n, Conditioning::TowardTarget)?
                            .value;
                    worst = worst.max(rel(s, c));
                }
            }
        }
    }
    Ok(vec![Check::new("closed_vs_system", worst, 1e-9)])
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// `A A^-1 = I` for the closed-form inverse and `(I - P^2)^-1` against a
/// numerical inverse.
pub fn block_inverse_checks() -> Result<Vec<Check>> {
    let mut ident: f64 = 0.0;
    let mut b_inv: f64 = 0.0;
    for p in p_grid() {
        for t in 0..=10u32 {
            let m = t as usize + 1;
            let pm = coupling_matrix(p, m);
            let a = block_matrix(&pm);
            let prod = &a * block_inverse(p, t)?;
            ident = ident.max(max_abs(&(prod - DMatrix::identity(2 * m, 2 * m))));
            let b = DMatrix::identity(m, m) - &pm * &pm;
            let numeric = b.try_inverse().ok_or(Error::SingularSystem(m))?;
            b_inv = b_inv.max(max_abs(&(numeric - inverse_b_closed(p, t)?)));
        }
    }
    Ok(vec![
        Check::new("a_times_inverse_is_identity", ident, 1e-10),
        Check::new("closed_inverse_of_b", b_inv, 1e-10),
    ])
}

/// Threshold probabilities and optimal constants against their published
/// decimals.
pub fn thresholds() -> Vec<Check> {
    let th = compute_thresholds();
    let mut checks = vec![
        Check::new("p_det_g2", (th.p_det_g2 - 0.146447).abs(), 1e-5),
        Check::new("p0", (th.p0 - 0.241516).abs(), 1e-5),
        Check::new("p_det_cr9", (th.p_det_cr9 - 0.390388).abs(), 1e-5),
        Check::new("p_rand_cr9", (th.p_rand_cr9 - 0.436185).abs(), 1e-5),
        Check::new(
            "p_rand_cr9_bisection",
            (th.p_rand_cr9_bisection - 0.436185).abs(),
            1e-5,
        ),
        Check::new("p_wireless_459", (th.p_wireless_459 - 0.197063).abs(), 1e-5),
    ];
    let g = optimal_g_rand(1e-6).unwrap_or(f64::NAN);
    let cr = cr_theorem_rand(1e-6).unwrap_or(f64::NAN);
    checks.push(Check::new(
        "optimal_g_rand_small_p",
        (g - 3.59112).abs(),
        1e-4,
    ));
    checks.push(Check::new(
        "cr_theorem_rand_small_p",
        (cr - 4.59112).abs(),
        1e-4,
    ));
    checks
}

/// Summary curves: randomized below deterministic, optimizers
/// non-increasing and clamped at 2 past their breakpoints, scaled ratios
/// bounded as `p -> 1/2`.
pub fn figure1() -> Result<Vec<Check>> {
    let mut grid: Vec<f64> = (1..=49).map(|i| i as f64 * 0.01).collect();
    grid.extend((1..=20).map(|i| 0.49 + 0.0099 * i as f64 / 20.0));
    let fig = figure1_tables(&grid)?;
    let th = compute_thresholds();
    let order = fig.scaled.iter().fold(f64::NEG_INFINITY, |a, r| {
        a.max(r.scaled_rand - r.scaled_det)
    });
    let rise =
        |f: &dyn Fn(usize) -> f64| (1..grid.len()).fold(0.0f64, |a, i| a.max(f(i) - f(i - 1)));
    let det_rise = rise(&|i| fig.expansion[i].g_det);
    let rand_rise = rise(&|i| fig.expansion[i].g_rand);
    let clamp = fig.expansion.iter().fold(0.0f64, |a, r| {
        let mut a = a;
        if r.p > th.p_det_g2 {
            a = a.max((r.g_det - 2.0).abs());
        }
        if r.p > th.p0 {
            a = a.max((r.g_rand - 2.0).abs());
        }
        a
    });
    let inside = fig.expansion.iter().fold(0.0f64, |a, r| {
        let mut a = a;
        if r.p < th.p_det_g2 {
            a = a.max(2.0 - r.g_det + f64::EPSILON);
        }
        if r.p < th.p0 {
            a = a.max(2.0 - r.g_rand + f64::EPSILON);
        }
        a
    });
    let tail = fig
        .scaled
        .iter()
        .filter(|r| r.p > 0.45)
        .fold(0.0f64, |a, r| a.max(r.scaled_det).max(r.scaled_rand));
    Ok(vec![
        Check::new("rand_below_det", order, 0.0),
        Check::new("g_det_non_increasing", det_rise, 0.0),
        Check::new("g_rand_non_increasing", rand_rise, 0.0),
        Check::new("clamped_at_2_past_breakpoints", clamp, 0.0),
        Check::new("above_2_before_breakpoints", inside, f64::EPSILON),
        Check::new("scaled_bounded_near_half", tail, 1.0),
    ])
}

/// Simulated turns: mean turning-point error 0 and mean meeting delay
/// `gamma/(1-p)`, in standard errors.
pub fn lemma7(ps: &[f64], gamma: f64, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for &p in ps {
        let fp = FaultProb::new(p)?;
        simulated_turn(1.0, gamma, fp, &mut crate::rng::RandomStream::new(0))?;
        let dev = run_trials(opts.trials, opts.seed, opts.parallelism, |rng| {
            let r = simulated_turn(1.0, gamma, fp, rng).expect("validated");
            (r.realized_point - r.intended_point, false)
        });
        let delay = run_trials(opts.trials, opts.seed, opts.parallelism, |rng| {
            (
                simulated_turn(1.0, gamma, fp, rng)
                    .expect("validated")
                    .elapsed,
                false,
            )
        });
        checks.push(Check::new(
            format!("turn_error_mean_zero_p{p}"),
            dev.z_score(0.0),
            3.0,
        ));
        checks.push(Check::new(
            format!("meeting_delay_p{p}"),
            delay.z_score(gamma / (1.0 - p)),
            3.0,
        ));
    }
    Ok(checks)
}

/// Wireless search at unit distance: mean ratio against
/// `3 + 4 sqrt(p(1-p))`.
pub fn theorem5(ps: &[f64], gamma: f64, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let target = TargetPlacement::at(1.0)?;
    let mut checks = Vec::new();
    for &p in ps {
        let fp = FaultProb::new(p)?;
        wireless_search(&target, fp, gamma, &mut crate::rng::RandomStream::new(0))?;
        let est = run_trials(opts.trials, opts.seed, opts.parallelism, |rng| {
            let r = wireless_search(&target, fp, gamma, rng).expect("validated");
            (r.outcome.termination_time, r.outcome.truncated)
        });
        checks.push(Check::new(
            format!("wireless_ratio_p{p}"),
            (est.mean - cr_wireless(p)?).abs(),
            0.02,
        ));
    }
    Ok(checks)
}

/// Kolmogorov-Smirnov statistic of `xs` against Uniform[0,1).
pub fn ks_uniform(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let lo = x - i as f64 / n;
        let hi = (i + 1) as f64 / n - x;
        d.max(lo).max(hi)
    })
}

/// Asymptotic KS critical value at level 0.01.
pub fn ks_critical_01(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

const BITS_PER_TRIAL: usize = 1000;
const TOLERANCE: f64 = 1e-3;

/// Frequency of ones among `trials` harvested bits, in blocks of 1000.
pub fn amplified_bit_frequency(
    p: f64,
    bits: u64,
    seed: u64,
    parallelism: Option<usize>,
) -> Result<f64> {
    let plan = plan_amplifier(p, TOLERANCE)?;
    let blocks = bits.div_ceil(BITS_PER_TRIAL as u64);
    let ones: Vec<usize> = map_trials(blocks, seed, parallelism, |rng| {
        let h = harvest_amplified(&plan, BITS_PER_TRIAL, 1e-9, rng).expect("validated");
        h.bits.iter().filter(|&&b| b).count()
    });
    Ok(ones.iter().sum::<usize>() as f64 / (blocks as usize * BITS_PER_TRIAL) as f64)
}

/// `samples` uniforms, each from 32 harvested bits.
pub fn harvested_uniforms(
    p: f64,
    samples: u64,
    seed: u64,
    parallelism: Option<usize>,
) -> Result<Vec<f64>> {
    let plan = plan_amplifier(p, TOLERANCE)?;
    Ok(map_trials(samples, seed, parallelism, |rng| {
        let h = harvest_amplified(&plan, 32, 1e-9, rng).expect("validated");
        uniform_from_bits(&h.bits).expect("32 bits")
    }))
}

/// Amplified bit bias within tolerance plus three standard errors, and KS
/// uniformity of harvested 32-bit fractions.
pub fn bits(ps: &[f64], opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let bits = opts.trials.max(BITS_PER_TRIAL as u64);
    for &p in ps {
        let freq = amplified_bit_frequency(p, bits, opts.seed, opts.parallelism)?;
        let n = bits.div_ceil(BITS_PER_TRIAL as u64) as f64 * BITS_PER_TRIAL as f64;
        let sigma = 0.5 / n.sqrt();
        checks.push(Check::new(
            format!("bit_bias_p{p}"),
            (freq - 0.5).abs(),
            TOLERANCE + 3.0 * sigma,
        ));
    }
    let samples = opts.trials.clamp(100, 10_000);
    let mut xs = harvested_uniforms(0.2, samples, opts.seed, opts.parallelism)?;
    checks.push(Check::new(
        "ks_uniform_p0.2",
        ks_uniform(&mut xs),
        ks_critical_01(xs.len()),
    ));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("x".parse::<Suite>().is_err());
    }

    #[test]
    fn deterministic_suites_pass() {
        let opts = VerifyOptions::default();
        for s in [
            Suite::AppendixC,
            Suite::AppendixD,
            Suite::BlockInverse,
            Suite::Thresholds,
            Suite::Figure1,
        ] {
            let r = verify(s, &opts).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn ks_statistic_examples() {
        let mut xs = vec![0.5];
        assert!((ks_uniform(&mut xs) - 0.5).abs() < 1e-15);
        let mut xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert!((ks_uniform(&mut xs) - 0.005).abs() < 1e-12);
    }

    #[test]
    fn small_stochastic_suites_pass() {
        let opts = VerifyOptions {
            trials: 20_000,
            seed: 3,
            parallelism: None,
        };
        for s in [Suite::Lemma7, Suite::Bits] {
            let r = verify(s, &opts).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }
}
