//! One p-faulty agent running the baseline zig-zag search and its
//! deterministic and randomized front ends.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::kinematics::{attempt_turn, leg_crossing_time, AgentState, Direction, FaultProb, Leg};
use crate::montecarlo::{run_trials, Estimate};
use crate::rng::RandomStream;

/// Parameters of the baseline search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    pub g: f64,
    pub p: FaultProb,
    /// Exponent `i0` of the first intended turning point `g^i0`.
    pub start_exponent: f64,
    pub start_direction: Direction,
}

impl SearchParams {
    pub fn new(
        g: f64,
        p: FaultProb,
        start_exponent: f64,
        start_direction: Direction,
    ) -> Result<Self> {
        ensure("g", g, g >= 2.0 && g.is_finite(), "2 <= g < inf")?;
        ensure(
            "start_exponent",
            start_exponent,
            start_exponent.is_finite(),
            "finite",
        )?;
        Ok(Self {
            g,
            p,
            start_exponent,
            start_direction,
        })
    }
}

/// Where the target sits: distance `magnitude > 0` on `side`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetPlacement {
    magnitude: f64,
    side: Direction,
}

impl TargetPlacement {
    pub fn new(magnitude: f64, side: Direction) -> Result<Self> {
        ensure(
            "n",
            magnitude,
            magnitude > 0.0 && magnitude.is_finite(),
            "0 < n < inf",
        )?;
        Ok(Self { magnitude, side })
    }

    /// Target at signed coordinate `x != 0`.
    pub fn at(x: f64) -> Result<Self> {
        Self::new(x.abs(), Direction::of(x))
    }

    /// Target at `side * g^(t + delta)`.
    pub fn from_decomposition(g: f64, t: u32, delta: f64, side: Direction) -> Result<Self> {
        ensure("g", g, g > 1.0, "g > 1")?;
        ensure(
            "delta",
            delta,
            delta > 0.0 && delta <= 1.0,
            "0 < delta <= 1",
        )?;
        Self::new(g.powf(t as f64 + delta), side)
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn side(&self) -> Direction {
        self.side
    }

    pub fn position(&self) -> f64 {
        self.side.sign() * self.magnitude
    }

    /// `(t, delta)` with `g^t < n <= g^(t+1)` and `n = g^(t + delta)`.
    /// Defined only for `n > 1`.
    pub fn decompose(&self, g: f64) -> Option<(u32, f64)> {
        decompose(self.magnitude, g)
    }
}

/// `(t, delta)` with `g^t < n <= g^(t+1)` and `n = g^(t + delta)`, for `n > 1`
/// and `g > 1`.
pub fn decompose(n: f64, g: f64) -> Option<(u32, f64)> {
    if !(n > 1.0 && g > 1.0 && n.is_finite()) {
        return None;
    }
    let lg = n.ln() / g.ln();
    let mut t = (lg.ceil() - 1.0).max(0.0) as i64;
    // Repair rounding in the logarithm with exact comparisons on powers.
    while t > 0 && g.powi(t as i32) >= n {
        t -= 1;
    }
    while g.powi(t as i32 + 1) < n {
        t += 1;
    }
    let delta = (lg - t as f64).clamp(f64::MIN_POSITIVE, 1.0);
    Some((t as u32, delta))
}

/// One realization of a search.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SimOutcome {
    pub termination_time: f64,
    pub legs: Vec<Leg>,
    pub truncated: bool,
    pub turn_attempts: u64,
    /// Part of `termination_time` spent on auxiliary work (bit harvesting,
    /// returning to the origin). Zero for plain searches.
    pub overhead: f64,
}

impl SimOutcome {
    /// Appends the unit-speed leg `from -> to`, cut short at `target` if the
    /// leg passes over it. Returns `true` when the target was reached.
    pub(crate) fn walk(&mut self, from: f64, to: f64, target: f64) -> bool {
        match leg_crossing_time(from, to, 1.0, target) {
            Some(dt) => {
                self.push(Leg::moving(from, target, 1.0), dt);
                true
            }
            None => {
                self.push(Leg::moving(from, to, 1.0), (to - from).abs());
                false
            }
        }
    }

    pub(crate) fn push(&mut self, leg: Leg, duration: f64) {
        self.termination_time += duration;
        self.legs.push(Leg { duration, ..leg });
    }

    /// Position at the end of the last leg.
    pub fn final_position(&self) -> f64 {
        self.legs.last().map_or(0.0, |l| l.to)
    }

    /// Sum of leg durations, recomputed.
    pub fn total_leg_time(&self) -> f64 {
        self.legs.iter().map(|l| l.duration).sum()
    }
}

/// `max(1, ceil(ln 1e-12 / ln p))`: the number of consecutive failed turns
/// tolerated before a run is declared truncated.
pub fn default_fail_cap(p: f64) -> u32 {
    if p <= 0.0 {
        return 1;
    }
    if p >= 1.0 {
        return u32::MAX;
    }
    ((1e-12f64).ln() / p.ln()).ceil().max(1.0) as u32
}

/// The baseline zig-zag.
///
/// From the origin the agent sweeps to `d g^i`, attempts a turn and walks
/// for `g^(i+1) - g^i`. If the turn worked it meets the origin on the way
/// (this needs `g >= 2`) and sweeps the other side up to `g^(i+1)`. If it
/// failed, the origin never shows up, the agent ends at `d g^(i+1)` and tries
/// again. The agent never reads the outcome of [`attempt_turn`]; only origin
/// and target sightings steer it.
pub fn baseline_search(
    params: &SearchParams,
    target: &TargetPlacement,
    rng: &mut RandomStream,
    fail_cap: u32,
) -> Result<SimOutcome> {
    ensure(
        "g",
        params.g,
        params.g >= 2.0 && params.g.is_finite(),
        "2 <= g < inf",
    )?;
    if fail_cap < 1 {
        return Err(Error::OutOfRange {
            name: "fail_cap",
            value: fail_cap as f64,
            expected: ">= 1",
        });
    }
    let g = params.g;
    let x = target.position();
    let mut out = SimOutcome::default();
    let mut radius = g.powf(params.start_exponent);
    let mut heading = params.start_direction;

    loop {
        let mut pos = heading.sign() * radius;
        if out.walk(0.0, pos, x) {
            return Ok(out);
        }
        let mut misses = 0u32;
        loop {
            let (state, _) = attempt_turn(AgentState::at(pos, heading), params.p, rng);
            out.turn_attempts += 1;
            heading = state.direction;
            let next = radius * g;
            let end = pos + heading.sign() * (next - radius);
            let origin_seen = leg_crossing_time(pos, end, 1.0, 0.0).is_some();
            let stop = if origin_seen { 0.0 } else { end };
            if out.walk(pos, stop, x) {
                return Ok(out);
            }
            radius = next;
            if origin_seen {
                break;
            }
            pos = end;
            misses += 1;
            if misses > fail_cap {
                out.truncated = true;
                return Ok(out);
            }
        }
    }
}

fn check_search_range(g: f64, p: FaultProb) -> Result<()> {
    p.ensure_searchable()?;
    ensure("g", g, g >= 2.0 && g.is_finite(), "2 <= g < inf")?;
    Ok(())
}

/// Deterministic search: baseline with `i0 = 0`, first sweep to the right.
/// Requires `2 <= g <= 1/p` and `0 < p < 1/2`.
pub fn deterministic_search(
    g: f64,
    p: FaultProb,
    target: &TargetPlacement,
    rng: &mut RandomStream,
    fail_cap: u32,
) -> Result<SimOutcome> {
    check_search_range(g, p)?;
    ensure("g", g, g * p.value() <= 1.0, "g <= 1/p")?;
    let params = SearchParams::new(g, p, 0.0, Direction::Right)?;
    baseline_search(&params, target, rng, fail_cap)
}

/// Optional overrides of the two random choices of the randomized search.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RandomChoices {
    pub epsilon: Option<f64>,
    pub direction: Option<Direction>,
}

impl RandomChoices {
    /// Only the first sweep direction is pinned; `epsilon` stays random.
    pub fn toward(direction: Direction) -> Self {
        Self {
            epsilon: None,
            direction: Some(direction),
        }
    }

    pub fn fixed(epsilon: f64, direction: Direction) -> Self {
        Self {
            epsilon: Some(epsilon),
            direction: Some(direction),
        }
    }
}

/// Randomized search: uniform `epsilon` in `[0,1)` and a uniform first
/// direction, then baseline with `i0 = epsilon`.
pub fn randomized_search(
    g: f64,
    p: FaultProb,
    target: &TargetPlacement,
    rng: &mut RandomStream,
    fail_cap: u32,
) -> Result<SimOutcome> {
    randomized_search_with(g, p, target, rng, fail_cap, RandomChoices::default())
}

/// Randomized search with either choice optionally pinned. Unpinned choices
/// are drawn in the order `epsilon`, then direction.
pub fn randomized_search_with(
    g: f64,
    p: FaultProb,
    target: &TargetPlacement,
    rng: &mut RandomStream,
    fail_cap: u32,
    choices: RandomChoices,
) -> Result<SimOutcome> {
    check_search_range(g, p)?;
    let epsilon = match choices.epsilon {
        Some(e) => ensure("epsilon", e, (0.0..1.0).contains(&e), "0 <= epsilon < 1")?,
        None => rng.uniform(),
    };
    let direction = match choices.direction {
        Some(d) => d,
        None => random_direction(rng),
    };
    let params = SearchParams::new(g, p, epsilon, direction)?;
    baseline_search(&params, target, rng, fail_cap)
}

pub(crate) fn random_direction(rng: &mut RandomStream) -> Direction {
    if rng.bernoulli(0.5) {
        Direction::Right
    } else {
        Direction::Left
    }
}

/// Which single-agent algorithm a profile runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    Deterministic,
    Randomized,
}

/// One cell of a competitive-ratio profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCell {
    pub t: u32,
    pub delta: f64,
    pub n: f64,
    pub ratio: f64,
    pub stderr: f64,
    pub estimate: Estimate,
}

/// Monte Carlo `E[T]/n` for targets `n = g^(t+delta)` on the right, over
/// `t = 0..=t_max` and every `delta` in the grid.
#[allow(clippy::too_many_arguments)]
pub fn estimate_cr_profile(
    algorithm: Algorithm,
    g: f64,
    p: FaultProb,
    t_max: u32,
    delta_grid: &[f64],
    trials: u64,
    master_seed: u64,
    parallelism: Option<usize>,
) -> Result<Vec<ProfileCell>> {
    if delta_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if trials < 1 {
        return Err(Error::OutOfRange {
            name: "trials",
            value: 0.0,
            expected: ">= 1",
        });
    }
    check_search_range(g, p)?;
    let cap = default_fail_cap(p.value());
    let mut cells = Vec::new();
    for t in 0..=t_max {
        for &delta in delta_grid {
            let target = TargetPlacement::from_decomposition(g, t, delta, Direction::Right)?;
            let n = target.magnitude();
            // Fail fast on parameter errors before entering the parallel loop.
            let mut probe = RandomStream::new(0);
            run_algorithm(algorithm, g, p, &target, &mut probe, cap)?;
            let est = run_trials(trials, master_seed, parallelism, |rng| {
                let o = run_algorithm(algorithm, g, p, &target, rng, cap).expect("validated");
                (o.termination_time, o.truncated)
            });
            cells.push(ProfileCell {
                t,
                delta,
                n,
                ratio: est.mean / n,
                stderr: est.stderr / n,
                estimate: est,
            });
        }
    }
    Ok(cells)
}

fn run_algorithm(
    algorithm: Algorithm,
    g: f64,
    p: FaultProb,
    target: &TargetPlacement,
    rng: &mut RandomStream,
    cap: u32,
) -> Result<SimOutcome> {
    match algorithm {
        Algorithm::Deterministic => deterministic_search(g, p, target, rng, cap),
        Algorithm::Randomized => randomized_search(g, p, target, rng, cap),
    }
}
