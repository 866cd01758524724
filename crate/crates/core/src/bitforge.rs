//! Random bits from faulty turns.
//!
//! Chaining `k` in-place turn attempts leaves the heading unchanged with
//! probability `q_k = ((2p-1)^k + 1)/2`, which tends to 1/2. An agent that
//! walks out and back near the origin with such amplified turns reads one
//! nearly fair bit per turn from whether the origin shows up, and can then
//! drive a randomized search with those bits.

use serde::{Deserialize, Serialize};

use crate::analysis::optimal_g_det;
use crate::error::{ensure, Error, Result};
use crate::kinematics::{attempt_turn, AgentState, Direction, FaultProb};
use crate::rng::RandomStream;
use crate::search::{
    deterministic_search, randomized_search_with, RandomChoices, SimOutcome, TargetPlacement,
};

/// `q_k = ((2p-1)^k + 1)/2`: probability that `k` chained attempts leave
/// the heading unchanged.
pub fn amplify_q(p: f64, k: u32) -> Result<f64> {
    ensure("p", p, (0.0..=1.0).contains(&p), "0 <= p <= 1")?;
    if k < 1 {
        return Err(Error::OutOfRange {
            name: "k",
            value: 0.0,
            expected: ">= 1",
        });
    }
    Ok(((2.0 * p - 1.0).powi(k as i32) + 1.0) / 2.0)
}

/// How many chained attempts make one amplified turn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplifierPlan {
    pub p: FaultProb,
    pub k: u32,
    pub q_k: f64,
}

impl AmplifierPlan {
    /// Plain single-attempt turns.
    pub fn single(p: FaultProb) -> Self {
        Self {
            p,
            k: 1,
            q_k: p.value(),
        }
    }

    /// `|q_k - 1/2|`.
    pub fn bias(&self) -> f64 {
        (self.q_k - 0.5).abs()
    }

    /// `k` in-place attempts. Returns the new state; the agent does not learn
    /// the outcome.
    pub fn turn(&self, state: AgentState, rng: &mut RandomStream) -> AgentState {
        (0..self.k).fold(state, |s, _| attempt_turn(s, self.p, rng).0)
    }
}

/// Smallest `k` with `|2p-1|^k / 2 <= tolerance`.
pub fn plan_amplifier(p: f64, tolerance: f64) -> Result<AmplifierPlan> {
    ensure("p", p, p > 0.0 && p < 1.0, "0 < p < 1")?;
    ensure("tolerance", tolerance, tolerance > 0.0, "tolerance > 0")?;
    let base = (2.0 * p - 1.0).abs();
    let mut k = 1u32;
    while base.powi(k as i32) / 2.0 > tolerance {
        k += 1;
    }
    Ok(AmplifierPlan {
        p: FaultProb::new(p)?,
        k,
        q_k: amplify_q(p, k)?,
    })
}

/// Result of a harvest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarvestReport {
    /// `true` when the origin was missed.
    pub bits: Vec<bool>,
    pub elapsed: f64,
    pub max_excursion: f64,
    /// `|q - 1/2|` for the turn used.
    pub per_bit_bias: f64,
    /// Distance from the origin at the end (0 when the last bit was 0).
    pub final_distance: f64,
}

/// An agent walking near the origin, logging legs and watching for the
/// target.
pub(crate) struct Walker {
    pub state: AgentState,
    pub out: SimOutcome,
    target: f64,
    pub found: bool,
}

impl Walker {
    pub fn new(direction: Direction, target: Option<f64>) -> Self {
        Self {
            state: AgentState::at(0.0, direction),
            out: SimOutcome::default(),
            target: target.unwrap_or(f64::NAN),
            found: false,
        }
    }

    /// Walks `dist` along the current heading; stops at the target.
    pub fn step(&mut self, dist: f64) -> bool {
        if self.found {
            return true;
        }
        let from = self.state.position;
        let to = from + self.state.direction.sign() * dist;
        if self.out.walk(from, to, self.target) {
            self.state.position = self.target;
            self.found = true;
        } else {
            self.state.position = to;
        }
        self.found
    }

    pub fn heading_home(&self) -> bool {
        self.state.direction == Direction::towards(self.state.position, 0.0)
    }
}

/// Runs the harvest on `walker`. Stops early if the target is met.
pub(crate) fn harvest_on(
    walker: &mut Walker,
    plan: &AmplifierPlan,
    n_bits: usize,
    zeta: f64,
    rng: &mut RandomStream,
) -> HarvestReport {
    let start = walker.out.termination_time;
    let mut bits = Vec::with_capacity(n_bits);
    let mut w = 0.0;
    let mut max_excursion: f64 = 0.0;
    for _ in 0..n_bits {
        if w == 0.0 {
            if walker.step(zeta) {
                break;
            }
            w = zeta;
        }
        walker.state = plan.turn(walker.state, rng);
        walker.out.turn_attempts += plan.k as u64;
        let home = walker.heading_home();
        if walker.step(w) {
            break;
        }
        if home {
            bits.push(false);
            w = 0.0;
        } else {
            bits.push(true);
            w *= 2.0;
        }
        max_excursion = max_excursion.max(walker.state.position.abs());
    }
    HarvestReport {
        bits,
        elapsed: walker.out.termination_time - start,
        max_excursion,
        per_bit_bias: plan.bias(),
        final_distance: w,
    }
}

/// Harvests `n_bits` bits with plain single-attempt turns (bit 1 with
/// probability `p`).
pub fn harvest_bits(
    p: f64,
    n_bits: usize,
    zeta: f64,
    rng: &mut RandomStream,
) -> Result<HarvestReport> {
    ensure("p", p, (0.0..1.0).contains(&p), "0 <= p < 1")?;
    harvest_amplified(
        &AmplifierPlan::single(FaultProb::new(p)?),
        n_bits,
        zeta,
        rng,
    )
}

/// Harvests `n_bits` bits, each from one amplified turn.
///
/// Starting at the origin the agent walks `zeta`, turns and walks `zeta`
/// again. Meeting the origin gives bit 0 and the next bit starts there;
/// otherwise the bit is 1, the agent is `2 zeta` out, and the next bit turns
/// and walks that distance. The excursion never exceeds `2^n_bits zeta`.
pub fn harvest_amplified(
    plan: &AmplifierPlan,
    n_bits: usize,
    zeta: f64,
    rng: &mut RandomStream,
) -> Result<HarvestReport> {
    ensure("zeta", zeta, zeta > 0.0 && zeta.is_finite(), "zeta > 0")?;
    if n_bits == 0 {
        return Err(Error::EmptyBits);
    }
    let mut walker = Walker::new(Direction::Right, None);
    Ok(harvest_on(&mut walker, plan, n_bits, zeta, rng))
}

/// Upper bound on the mean harvest time, `zeta n (n+1) (1 + 2 bias)^n`.
///
/// A bit preceded by `j` misses since the last return costs at most
/// `2^(j+1) zeta`, and `j` misses in a row have probability at most
/// `(1/2 + bias)^j`.
pub fn mean_harvest_bound(n_bits: usize, zeta: f64, bias: f64) -> f64 {
    let n = n_bits as f64;
    zeta * n * (n + 1.0) * (1.0 + 2.0 * bias).powf(n)
}

/// Outcome of a return to the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnReport {
    pub elapsed: f64,
    pub attempts: u64,
    pub returned: bool,
    /// Distance from the origin when giving up (0 if returned).
    pub final_distance: f64,
}

/// Return with distance doubling, on `walker`, for at most `cap` attempts.
/// The walker must be `w` away and heading away from the origin.
pub(crate) fn return_on(
    walker: &mut Walker,
    p: FaultProb,
    mut w: f64,
    cap: u64,
    rng: &mut RandomStream,
) -> ReturnReport {
    let start = walker.out.termination_time;
    let mut attempts = 0;
    let mut returned = w == 0.0;
    while !returned && attempts < cap && !walker.found {
        walker.state = attempt_turn(walker.state, p, rng).0;
        walker.out.turn_attempts += 1;
        attempts += 1;
        let home = walker.heading_home();
        walker.step(w);
        if home {
            returned = true;
            w = 0.0;
        } else {
            w *= 2.0;
        }
    }
    ReturnReport {
        elapsed: walker.out.termination_time - start,
        attempts,
        returned,
        final_distance: w,
    }
}

/// Returns to the origin from distance `w` (heading away): turn, walk `w`;
/// if the origin does not appear, the distance has doubled. Repeats until
/// back.
pub fn return_to_origin(p: f64, w: f64, rng: &mut RandomStream) -> Result<(f64, u64)> {
    let r = return_to_origin_capped(p, w, u64::MAX, rng)?;
    Ok((r.elapsed, r.attempts))
}

/// [`return_to_origin`] giving up after `cap` attempts.
pub fn return_to_origin_capped(
    p: f64,
    w: f64,
    cap: u64,
    rng: &mut RandomStream,
) -> Result<ReturnReport> {
    ensure("p", p, (0.0..1.0).contains(&p), "0 <= p < 1")?;
    ensure("w", w, w > 0.0 && w.is_finite(), "w > 0")?;
    let mut walker = Walker::new(Direction::Right, None);
    walker.state.position = w;
    Ok(return_on(&mut walker, FaultProb::new(p)?, w, cap, rng))
}

/// Radix-2 fraction `sum_j b_j 2^(-j-1)`.
pub fn uniform_from_bits(bits: &[bool]) -> Result<f64> {
    if bits.is_empty() {
        return Err(Error::EmptyBits);
    }
    let mut x = 0.0f64;
    let mut scale = 0.5;
    for &b in bits {
        if b {
            x += scale;
        }
        scale *= 0.5;
    }
    // Beyond 53 bits the sum can round up to 1.
    Ok(x.min(1.0 - f64::EPSILON / 2.0))
}

/// Settings for driving the randomized search from harvested bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarvestSpec {
    /// Bits of `epsilon`; one more bit picks the first direction.
    pub n_bits: usize,
    pub zeta: f64,
    /// Amplifier tolerance `|q - 1/2|`.
    pub tolerance: f64,
    /// Residual probability of giving up on the return to the origin.
    pub return_miss: f64,
}

impl Default for HarvestSpec {
    fn default() -> Self {
        Self {
            n_bits: 32,
            zeta: 1e-9,
            tolerance: 1e-3,
            return_miss: 1e-9,
        }
    }
}

/// What the harvest produced for the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedChoices {
    pub epsilon: f64,
    pub direction: Direction,
    pub harvest: HarvestReport,
    pub returned: ReturnReport,
    /// `true` when the bounded return failed and the deterministic search ran.
    pub fell_back: bool,
}

/// Smallest `l` with `p^l < miss`.
pub fn return_cap(p: f64, miss: f64) -> u64 {
    if p <= 0.0 {
        return 1;
    }
    ((miss.ln() / p.ln()).floor() as u64 + 1).max(1)
}

/// A deterministic p-faulty agent running the randomized search.
///
/// It harvests `n_bits + 1` amplified bits near the origin (the first picks
/// the direction, the rest form `epsilon`), returns to the origin with at
/// most `l` attempts where `p^l < return_miss`, and then runs the
/// randomized search with those choices. If it is still out after `l`
/// attempts it keeps returning and runs the deterministic search, tuned
/// with [`optimal_g_det`], instead.
/// Every leg watches for the target. Harvest and return time is in
/// `overhead`.
pub fn deterministic_simulates_randomized(
    g: f64,
    p: FaultProb,
    target: &TargetPlacement,
    rng: &mut RandomStream,
    fail_cap: u32,
    spec: &HarvestSpec,
) -> Result<(SimOutcome, SimulatedChoices)> {
    p.ensure_searchable()?;
    ensure("g", g, g >= 2.0 && g * p.value() < 1.0, "2 <= g < 1/p")?;
    ensure("zeta", spec.zeta, spec.zeta > 0.0, "zeta > 0")?;
    ensure(
        "return_miss",
        spec.return_miss,
        spec.return_miss > 0.0 && spec.return_miss < 1.0,
        "(0, 1)",
    )?;
    if spec.n_bits == 0 {
        return Err(Error::EmptyBits);
    }
    let plan = plan_amplifier(p.value(), spec.tolerance)?;
    let x = target.position();
    let mut walker = Walker::new(Direction::Right, Some(x));
    let harvest = harvest_on(&mut walker, &plan, spec.n_bits + 1, spec.zeta, rng);
    let mut returned = return_on(
        &mut walker,
        p,
        harvest.final_distance,
        return_cap(p.value(), spec.return_miss),
        rng,
    );
    let mut fell_back = false;
    if !returned.returned && !walker.found {
        fell_back = true;
        let more = return_on(&mut walker, p, returned.final_distance, u64::MAX, rng);
        returned = ReturnReport {
            elapsed: returned.elapsed + more.elapsed,
            attempts: returned.attempts + more.attempts,
            ..more
        };
    }
    let (epsilon, direction) = if harvest.bits.len() == spec.n_bits + 1 {
        let direction = if harvest.bits[0] {
            Direction::Right
        } else {
            Direction::Left
        };
        (uniform_from_bits(&harvest.bits[1..])?, direction)
    } else {
        (0.0, Direction::Right)
    };
    let choices = SimulatedChoices {
        epsilon,
        direction,
        harvest,
        returned,
        fell_back,
    };
    let mut out = walker.out;
    out.overhead = out.termination_time;
    if walker.found {
        return Ok((out, choices));
    }
    let search = if fell_back {
        deterministic_search(optimal_g_det(p.value())?, p, target, rng, fail_cap)?
    } else {
        randomized_search_with(
            g,
            p,
            target,
            rng,
            fail_cap,
            RandomChoices::fixed(epsilon, direction),
        )?
    };
    append(&mut out, search);
    Ok((out, choices))
}

fn append(out: &mut SimOutcome, rest: SimOutcome) {
    out.termination_time += rest.termination_time;
    out.turn_attempts += rest.turn_attempts;
    out.truncated |= rest.truncated;
    out.overhead += rest.overhead;
    out.legs.extend(rest.legs);
}
