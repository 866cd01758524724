//! Two faulty agents cooperating to certify their turns.
//!
//! A Leader certifies a turn against a Follower, which is either the other
//! agent or a fixed point (the target, the origin, a halted agent). Built on
//! that: a pair simulating a fault-free zig-zag, the same pair running the
//! randomized zig-zag with harvested bits, and the wireless search where the
//! non-finder changes speed.
//!
//! Conventions used throughout:
//! - an agent that reaches the target during a turn zone halts there; the
//!   partner walks into it, so a pair run ends at the Follower's first
//!   arrival at the target;
//! - when two agents are collocated, a realignment turn of one of them is
//!   seen by the other at once, so it is repeated in place until it succeeds
//!   and costs no time (the attempts are still counted).

use serde::{Deserialize, Serialize};

use crate::analysis::{lambert_reference, wireless_speed};
use crate::bitforge::{harvest_on, plan_amplifier, return_on, uniform_from_bits, Walker};
use crate::error::{ensure, Error, Result};
use crate::kinematics::{attempt_turn, leg_crossing_time, AgentState, Direction, FaultProb, Leg};
use crate::rng::RandomStream;
use crate::search::{RandomChoices, SimOutcome, TargetPlacement};

/// Turns beyond which a pair search is declared truncated.
const MAX_TURNS: usize = 4096;

/// How the agents exchange information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comm {
    Wireless,
    FaceToFace,
}

/// Parameters shared by the two-agent protocols.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoAgentConfig {
    pub p: FaultProb,
    /// Scale of the forced-turn protocol, in line units.
    pub gamma: f64,
    /// Per-turn multiplier of `gamma`.
    pub gamma_decay: f64,
    /// Follower speed in the wireless search.
    pub follower_speed: f64,
    pub comm: Comm,
}

impl TwoAgentConfig {
    /// Wireless defaults: decay 1/2, follower speed `wireless_speed(p)`.
    pub fn new(p: f64, gamma: f64) -> Result<Self> {
        let p = FaultProb::new(p)?.ensure_searchable()?;
        let cfg = Self {
            p,
            gamma,
            gamma_decay: 0.5,
            follower_speed: wireless_speed(p.value())?,
            comm: Comm::Wireless,
        };
        cfg.validate()
    }

    pub fn validate(self) -> Result<Self> {
        self.p.ensure_below_half()?;
        check_gamma(self.gamma)?;
        check_decay(self.gamma_decay)?;
        ensure(
            "follower_speed",
            self.follower_speed,
            self.follower_speed > 0.0 && self.follower_speed < 1.0,
            "0 < s < 1",
        )?;
        Ok(self)
    }
}

/// One certified turn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub intended_point: f64,
    pub realized_point: f64,
    /// Protocol time: from the first attempt to the meeting (mobile
    /// Follower), or from leaving the anchor to coming back (immobile).
    pub elapsed: f64,
    /// Leader attempts.
    pub attempts: u64,
}

/// The reference a Leader turns against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Follower {
    /// The other agent, trailing the Leader in the same direction at unit
    /// speed, at most `2 gamma` behind.
    Mobile(AgentState),
    /// A fixed point.
    Immobile(f64),
}

fn check_gamma(gamma: f64) -> Result<f64> {
    ensure(
        "gamma",
        gamma,
        gamma > 0.0 && gamma.is_finite(),
        "gamma > 0",
    )
}

fn check_decay(decay: f64) -> Result<f64> {
    ensure(
        "gamma_decay",
        decay,
        decay > 0.0 && decay <= 1.0,
        "0 < decay <= 1",
    )
}

/// Attempts a turn until it succeeds; returns the number of attempts.
fn turn_until_success(state: AgentState, p: FaultProb, rng: &mut RandomStream) -> u64 {
    let mut attempts = 0;
    loop {
        attempts += 1;
        if attempt_turn(state, p, rng).1 {
            return attempts;
        }
    }
}

/// Forced turn of `leader` against `follower`.
///
/// Mobile Follower: repeat {attempt a turn; move for `gamma`} until the
/// agents meet. A failed attempt keeps the gap, a successful one closes it
/// at relative speed 2.
///
/// Immobile Follower at `a`: the Leader, at `a` or heading away from it,
/// moves `gamma` further, then repeats {attempt a turn; walk the current
/// distance `w` to `a`} until it is back at `a`; each miss doubles `w`.
pub fn force_change_direction(
    leader: AgentState,
    follower: Follower,
    gamma: f64,
    p: FaultProb,
    rng: &mut RandomStream,
) -> Result<TurnRecord> {
    check_gamma(gamma)?;
    match follower {
        Follower::Mobile(f) => {
            let d = leader.direction;
            let gap = d.sign() * (leader.position - f.position);
            ensure(
                "gap",
                gap,
                gap > 0.0 && gap <= 2.0 * gamma,
                "0 < gap <= 2 gamma",
            )?;
            if f.direction != d || f.speed() != 1.0 || leader.speed() != 1.0 {
                return Err(Error::OutOfRange {
                    name: "follower",
                    value: f.speed(),
                    expected: "same heading as the leader, unit speed",
                });
            }
            let mut attempts = 0;
            let mut elapsed = 0.0;
            loop {
                attempts += 1;
                if attempt_turn(leader, p, rng).1 {
                    elapsed += gap / 2.0;
                    break;
                }
                elapsed += gamma;
            }
            Ok(TurnRecord {
                intended_point: leader.position,
                realized_point: f.position + d.sign() * elapsed,
                elapsed,
                attempts,
            })
        }
        Follower::Immobile(anchor) => {
            let mut scratch = SimOutcome::default();
            let (rec, _) = immobile_turn(&mut scratch, leader, anchor, gamma, p, rng)?;
            Ok(rec)
        }
    }
}

/// Immobile forced turn, logging the Leader's legs into `out`. Returns the
/// record and the Leader's state back at `anchor`, heading away from where
/// it overshot.
fn immobile_turn(
    out: &mut SimOutcome,
    leader: AgentState,
    anchor: f64,
    gamma: f64,
    p: FaultProb,
    rng: &mut RandomStream,
) -> Result<(TurnRecord, AgentState)> {
    let away = leader.direction;
    let offset = away.sign() * (leader.position - anchor);
    ensure(
        "leader",
        offset,
        offset >= 0.0,
        "at the anchor or heading away from it",
    )?;
    let mut state = leader;
    let mut w = offset + gamma;
    let mut elapsed = gamma;
    let overshoot = anchor + away.sign() * w;
    out.push(Leg::moving(state.position, overshoot, 1.0), gamma);
    state.position = overshoot;
    let mut attempts = 0;
    loop {
        let (next, _) = attempt_turn(state, p, rng);
        attempts += 1;
        state = next;
        let home = state.direction == Direction::towards(state.position, anchor);
        let end = state.position + state.direction.sign() * w;
        if home {
            out.push(Leg::moving(state.position, anchor, 1.0), w);
            elapsed += w;
            state.position = anchor;
            break;
        }
        out.push(Leg::moving(state.position, end, 1.0), w);
        state.position = end;
        elapsed += w;
        w *= 2.0;
    }
    out.turn_attempts += attempts;
    let rec = TurnRecord {
        intended_point: anchor,
        realized_point: anchor,
        elapsed,
        attempts,
    };
    Ok((rec, state))
}

/// Geometry of one simulated turn in coordinates along the approach
/// direction, with the intended point at 0 and the zone starting at
/// `-2 gamma`.
#[derive(Debug, Clone, Copy)]
struct Zone {
    gamma: f64,
    /// Leader attempts.
    attempts: u64,
    /// Follower position when the gap reaches `2 gamma`.
    f0: f64,
    /// Duration and Follower speed of the slow-down.
    slow_time: f64,
    slow_speed: f64,
    /// Meeting point.
    meet: f64,
    /// Farthest point the Leader reaches.
    leader_max: f64,
}

impl Zone {
    fn draw(gamma: f64, p: FaultProb, heading: Direction, rng: &mut RandomStream) -> Self {
        let f0 = -gamma / p.success();
        let l0 = 2.0 * gamma + f0;
        let slow_time = l0 + 2.0 * gamma;
        let leader = AgentState::at(0.0, heading);
        let mut attempts = 1;
        while !attempt_turn(leader, p, rng).1 {
            attempts += 1;
        }
        Self {
            gamma,
            attempts,
            f0,
            slow_time,
            slow_speed: (f0 + 2.0 * gamma) / slow_time,
            meet: f0 + attempts as f64 * gamma,
            leader_max: l0 + (attempts - 1) as f64 * gamma,
        }
    }

    fn elapsed(&self) -> f64 {
        self.attempts as f64 * self.gamma
    }
}

/// One turn of a pair approaching `intended_point` from the origin side.
///
/// At `2 gamma` before the point the Follower slows down so that when the
/// Leader is `2 gamma` ahead the Follower is `gamma/(1-p)` before the point;
/// then the Leader forces a turn against the mobile Follower and both turn
/// where they meet. `elapsed` runs from the first attempt to the meeting.
pub fn simulated_turn(
    intended_point: f64,
    gamma: f64,
    p: FaultProb,
    rng: &mut RandomStream,
) -> Result<TurnRecord> {
    check_gamma(gamma)?;
    p.ensure_below_half()?;
    let heading = Direction::of(intended_point);
    let zone = Zone::draw(gamma, p, heading, rng);
    Ok(TurnRecord {
        intended_point,
        realized_point: intended_point + heading.sign() * zone.meet,
        elapsed: zone.elapsed(),
        attempts: zone.attempts,
    })
}

/// Result of a pair search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRun {
    /// Legs of the Follower; a halt while the Leader harvests bits.
    pub outcome: SimOutcome,
    pub turns: Vec<TurnRecord>,
    pub epsilon: f64,
    pub direction: Direction,
}

impl PairRun {
    /// Sum of the turn protocol times.
    pub fn protocol_time(&self) -> f64 {
        self.turns.iter().map(|t| t.elapsed).sum()
    }
}

/// Walks the pair from the origin through the turning points
/// `d (-1)^i g^(i + epsilon)`, each turn simulated with
/// `gamma_i = gamma0 decay^i`.
#[allow(clippy::too_many_arguments)]
fn pair_zigzag(
    out: &mut SimOutcome,
    turns: &mut Vec<TurnRecord>,
    g: f64,
    epsilon: f64,
    direction: Direction,
    p: FaultProb,
    gamma0: f64,
    decay: f64,
    x: f64,
    rng: &mut RandomStream,
) {
    let mut pos = 0.0;
    let mut radius = g.powf(epsilon);
    let mut heading = direction;
    let mut gamma = gamma0;
    for _ in 0..MAX_TURNS {
        let point = heading.sign() * radius;
        let zone_start = point - heading.sign() * 2.0 * gamma;
        if out.walk(pos, zone_start, x) {
            return;
        }
        let zone = Zone::draw(gamma, p, heading, rng);
        out.turn_attempts += zone.attempts;
        let local = |u: f64| point + heading.sign() * u;
        let ux = heading.sign() * (x - point);
        let f0 = local(zone.f0);
        if (-2.0 * gamma..=zone.leader_max).contains(&ux) {
            if ux <= zone.f0 {
                let dt = (ux + 2.0 * gamma) / zone.slow_speed;
                out.push(Leg::moving(zone_start, x, zone.slow_speed), dt);
            } else {
                out.push(Leg::moving(zone_start, f0, zone.slow_speed), zone.slow_time);
                out.walk(f0, x, x);
            }
            return;
        }
        out.push(Leg::moving(zone_start, f0, zone.slow_speed), zone.slow_time);
        pos = local(zone.meet);
        out.push(Leg::moving(f0, pos, 1.0), zone.elapsed());
        out.turn_attempts += turn_until_success(AgentState::at(pos, heading), p, rng);
        turns.push(TurnRecord {
            intended_point: point,
            realized_point: pos,
            elapsed: zone.elapsed(),
            attempts: zone.attempts,
        });
        heading = heading.opposite();
        radius *= g;
        gamma *= decay;
    }
    out.truncated = true;
}

fn check_pair(p: FaultProb, gamma0: f64, decay: f64) -> Result<()> {
    p.ensure_below_half()?;
    ensure(
        "gamma0",
        gamma0,
        gamma0 > 0.0 && gamma0 < 0.5,
        "0 < gamma0 < 1/2",
    )?;
    ensure(
        "gamma_decay",
        decay,
        decay > 0.0 && decay < 1.0,
        "0 < decay < 1",
    )?;
    Ok(())
}

/// Two agents simulating the fault-free doubling zig-zag (turning points
/// `1, -2, 4, ...`). Ends when the Follower, the last agent, reaches the
/// target.
pub fn simulate_two_agent_zigzag(
    target: &TargetPlacement,
    p: FaultProb,
    gamma0: f64,
    gamma_decay: f64,
    rng: &mut RandomStream,
) -> Result<PairRun> {
    simulate_two_agent_zigzag_with(2.0, target, p, gamma0, gamma_decay, rng)
}

/// [`simulate_two_agent_zigzag`] with expansion factor `g`.
pub fn simulate_two_agent_zigzag_with(
    g: f64,
    target: &TargetPlacement,
    p: FaultProb,
    gamma0: f64,
    gamma_decay: f64,
    rng: &mut RandomStream,
) -> Result<PairRun> {
    check_pair(p, gamma0, gamma_decay)?;
    ensure("g", g, g > 1.0 && g.is_finite(), "g > 1")?;
    let mut out = SimOutcome::default();
    let mut turns = Vec::new();
    pair_zigzag(
        &mut out,
        &mut turns,
        g,
        0.0,
        Direction::Right,
        p,
        gamma0,
        gamma_decay,
        target.position(),
        rng,
    );
    Ok(PairRun {
        outcome: out,
        turns,
        epsilon: 0.0,
        direction: Direction::Right,
    })
}

/// Two agents running the randomized zig-zag with `g = 1/W(1/e)` and
/// harvested randomness.
///
/// The Follower waits at the origin while the Leader harvests
/// `bit_budget + 1` amplified bits (the first picks the direction, the rest
/// form `epsilon`) with step `zeta = 2^-(bit_budget + 2)`, so the harvest
/// stays within 1/2 of the origin. The Leader then forces a turn against the
/// immobile Follower by distance doubling. Harvest and return time is in
/// `outcome.overhead`. Should the return pass over the target, the Leader
/// completes it and the pair walks to the target.
pub fn simulate_two_agent_randomized(
    target: &TargetPlacement,
    p: FaultProb,
    gamma0: f64,
    gamma_decay: f64,
    bit_budget: usize,
    rng: &mut RandomStream,
) -> Result<PairRun> {
    simulate_two_agent_randomized_with(
        target,
        p,
        gamma0,
        gamma_decay,
        bit_budget,
        RandomChoices::default(),
        rng,
    )
}

/// Randomized pair search with optional pinned choices. With both choices
/// pinned nothing is harvested.
pub fn simulate_two_agent_randomized_with(
    target: &TargetPlacement,
    p: FaultProb,
    gamma0: f64,
    gamma_decay: f64,
    bit_budget: usize,
    choices: RandomChoices,
    rng: &mut RandomStream,
) -> Result<PairRun> {
    check_pair(p, gamma0, gamma_decay)?;
    let g = lambert_reference().g;
    let x = target.position();
    let mut out = SimOutcome::default();
    let (epsilon, direction) = match (choices.epsilon, choices.direction) {
        (Some(e), Some(d)) => (
            ensure("epsilon", e, (0.0..1.0).contains(&e), "0 <= epsilon < 1")?,
            d,
        ),
        _ => {
            p.ensure_searchable()?;
            if bit_budget == 0 {
                return Err(Error::EmptyBits);
            }
            let plan = plan_amplifier(p.value(), 1e-3)?;
            let zeta = 0.5f64.powi(bit_budget as i32 + 2);
            let mut walker = Walker::new(Direction::Right, None);
            let harvest = harvest_on(&mut walker, &plan, bit_budget + 1, zeta, rng);
            return_on(&mut walker, p, harvest.final_distance, u64::MAX, rng);
            let overhead = walker.out.termination_time;
            out.push(Leg::halt(0.0, overhead), overhead);
            out.turn_attempts = walker.out.turn_attempts;
            out.overhead = overhead;
            let crossed = walker
                .out
                .legs
                .iter()
                .any(|l| leg_crossing_time(l.from, l.to, 1.0, x).is_some());
            if crossed {
                out.walk(0.0, x, x);
                return Ok(PairRun {
                    outcome: out,
                    turns: Vec::new(),
                    epsilon: 0.0,
                    direction: Direction::Right,
                });
            }
            let bit_dir = if harvest.bits[0] {
                Direction::Right
            } else {
                Direction::Left
            };
            let eps = uniform_from_bits(&harvest.bits[1..])?;
            (
                choices.epsilon.unwrap_or(eps),
                choices.direction.unwrap_or(bit_dir),
            )
        }
    };
    let mut turns = Vec::new();
    pair_zigzag(
        &mut out,
        &mut turns,
        g,
        epsilon,
        direction,
        p,
        gamma0,
        gamma_decay,
        x,
        rng,
    );
    Ok(PairRun {
        outcome: out,
        turns,
        epsilon,
        direction,
    })
}

/// Per-trial record of the wireless search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WirelessRun {
    /// Legs of the finder.
    pub outcome: SimOutcome,
    /// Time between the finder's two visits of the target.
    pub w: f64,
    /// Time between the first and second meeting of the agents.
    pub t: f64,
    /// Whether the non-finder's turn succeeded.
    pub turned: bool,
    /// Distance from the target at the first meeting (0 if the non-finder
    /// reached the target on its own).
    pub meeting_distance: f64,
}

/// Wireless two-agent search with follower speed `wireless_speed(p)`.
pub fn wireless_search(
    target: &TargetPlacement,
    p: FaultProb,
    gamma: f64,
    rng: &mut RandomStream,
) -> Result<WirelessRun> {
    p.ensure_searchable()?;
    wireless_search_with(target, p, gamma, wireless_speed(p.value())?, rng)
}

/// Wireless two-agent search with an arbitrary follower speed `s`.
///
/// The agents sweep in opposite directions. When one finds the target it
/// reports at once; the other attempts one turn and slows to `s`. The finder
/// overshoots by `gamma` and forces a turn against the target, then heads
/// for the other agent. At the meeting the other agent halts; the finder
/// overshoots by `gamma`, forces a turn against it, picks it up and both
/// walk to the target. Ends when both are at the target.
pub fn wireless_search_with(
    target: &TargetPlacement,
    p: FaultProb,
    gamma: f64,
    s: f64,
    rng: &mut RandomStream,
) -> Result<WirelessRun> {
    p.ensure_below_half()?;
    check_gamma(gamma)?;
    ensure("s", s, s > 0.0 && s < 1.0, "0 < s < 1")?;
    let x = target.position();
    let n = target.magnitude();
    let d = target.side();
    let mut out = SimOutcome::default();
    out.push(Leg::moving(0.0, x, 1.0), n);

    let other = AgentState::at(-x, -d);
    let (other, turned) = attempt_turn(other, p, rng);
    out.turn_attempts += 1;

    let (wrec, finder) = immobile_turn(&mut out, AgentState::at(x, d), x, gamma, p, rng)?;
    let w = wrec.elapsed;
    let other_pos = other.position + other.velocity() * s * w;
    let gap = d.sign() * (x - other_pos);
    if turned && gap <= 0.0 {
        // The non-finder reached the target before the finder came back.
        return Ok(WirelessRun {
            outcome: out,
            w,
            t: 0.0,
            turned,
            meeting_distance: 0.0,
        });
    }
    let closing = if turned { 1.0 + s } else { 1.0 - s };
    let tau = gap / closing;
    let meet = x - d.sign() * tau;
    out.push(Leg::moving(x, meet, 1.0), tau);
    if !turned {
        out.turn_attempts += turn_until_success(other, p, rng);
    }
    let finder = AgentState::at(meet, finder.direction);
    let (trec, _) = immobile_turn(&mut out, finder, meet, gamma, p, rng)?;
    out.push(Leg::moving(meet, x, 1.0), tau);
    Ok(WirelessRun {
        outcome: out,
        w,
        t: trec.elapsed,
        turned,
        meeting_distance: tau,
    })
}
