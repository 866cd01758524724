//! Unit-speed motion on the line and the faulty-turn primitive.
//!
//! Positions are piecewise linear in time and every event time is computed in
//! closed form; nothing here steps time.

use std::fmt;
use std::ops::Neg;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::rng::RandomStream;

/// Probability that a single turn attempt fails.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct FaultProb(f64);

impl FaultProb {
    /// Accepts `0 <= p <= 1`. Operations that need a finite expected
    /// termination time call [`FaultProb::ensure_searchable`].
    pub fn new(p: f64) -> Result<Self> {
        ensure("p", p, (0.0..=1.0).contains(&p), "0 <= p <= 1").map(FaultProb)
    }

    pub const ZERO: FaultProb = FaultProb(0.0);

    pub fn value(self) -> f64 {
        self.0
    }

    /// Success probability of one attempt.
    pub fn success(self) -> f64 {
        1.0 - self.0
    }

    /// Requires `0 < p < 1/2`.
    pub fn ensure_searchable(self) -> Result<Self> {
        ensure("p", self.0, self.0 > 0.0 && self.0 < 0.5, "0 < p < 1/2").map(FaultProb)
    }

    /// Requires `0 <= p < 1/2`.
    pub fn ensure_below_half(self) -> Result<Self> {
        ensure("p", self.0, self.0 >= 0.0 && self.0 < 0.5, "0 <= p < 1/2").map(FaultProb)
    }
}

impl fmt::Display for FaultProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Direction of travel; `Right` is increasing coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Left => -1.0,
            Direction::Right => 1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }

    /// Direction pointing from `from` towards `to`; `Right` when equal.
    pub fn towards(from: f64, to: f64) -> Self {
        if to < from {
            Direction::Left
        } else {
            Direction::Right
        }
    }

    pub fn of(x: f64) -> Self {
        Direction::towards(0.0, x)
    }
}

impl Neg for Direction {
    type Output = Direction;

    fn neg(self) -> Direction {
        self.opposite()
    }
}

/// Position, heading and speed of one agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub position: f64,
    pub direction: Direction,
    speed: f64,
}

impl AgentState {
    pub fn new(position: f64, direction: Direction, speed: f64) -> Result<Self> {
        ensure(
            "speed",
            speed,
            speed > 0.0 && speed <= 1.0,
            "0 < speed <= 1",
        )?;
        ensure("position", position, position.is_finite(), "finite")?;
        Ok(Self {
            position,
            direction,
            speed,
        })
    }

    /// Unit-speed agent.
    pub fn at(position: f64, direction: Direction) -> Self {
        Self {
            position,
            direction,
            speed: 1.0,
        }
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn with_speed(self, speed: f64) -> Result<Self> {
        Self::new(self.position, self.direction, speed)
    }

    /// Signed velocity.
    pub fn velocity(&self) -> f64 {
        self.direction.sign() * self.speed
    }

    /// State after moving for `duration` without turning.
    pub fn advance(&self, duration: f64) -> Result<Self> {
        // Rejects NaN as well.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(duration >= 0.0) {
            return Err(Error::NegativeDuration(duration));
        }
        Ok(Self {
            position: self.position + self.velocity() * duration,
            ..*self
        })
    }

    /// The same agent heading the other way. Not a fault-prone turn; only
    /// for harness bookkeeping and pick-ups.
    pub fn reversed(&self) -> Self {
        Self {
            direction: self.direction.opposite(),
            ..*self
        }
    }
}

/// One attempt to change direction. Fails with probability `p`; position and
/// speed never change.
///
/// The returned flag is for harnesses and oracles. Agent programs must not
/// branch on it: a p-faulty agent only learns the outcome from what it later
/// sees (origin, target, another agent).
pub fn attempt_turn(state: AgentState, p: FaultProb, rng: &mut RandomStream) -> (AgentState, bool) {
    let failed = rng.bernoulli(p.value());
    if failed {
        (state, false)
    } else {
        (state.reversed(), true)
    }
}

/// Time at which a leg from `from` to `to` at `speed` passes over `target`,
/// measured from the start of the leg. `None` when `target` lies outside the
/// closed segment.
pub fn leg_crossing_time(from: f64, to: f64, speed: f64, target: f64) -> Option<f64> {
    let (lo, hi) = if from <= to { (from, to) } else { (to, from) };
    if lo <= target && target <= hi {
        Some((target - from).abs() / speed)
    } else {
        None
    }
}

/// A straight piece of a trajectory. `speed == 0` marks a halt of the given
/// duration with `from == to`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub from: f64,
    pub to: f64,
    pub speed: f64,
    pub duration: f64,
}

impl Leg {
    pub fn moving(from: f64, to: f64, speed: f64) -> Self {
        Self {
            from,
            to,
            speed,
            duration: (to - from).abs() / speed,
        }
    }

    pub fn halt(at: f64, duration: f64) -> Self {
        Self {
            from: at,
            to: at,
            speed: 0.0,
            duration,
        }
    }

    /// Negated copy, for trajectories computed in a reflected frame.
    pub fn mirrored(&self) -> Self {
        Self {
            from: -self.from,
            to: -self.to,
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn advance_examples() {
        let s = AgentState::at(0.0, Direction::Right).advance(2.0).unwrap();
        assert_eq!(s.position, 2.0);
        let s = AgentState::new(1.0, Direction::Left, 0.5)
            .unwrap()
            .advance(2.0)
            .unwrap();
        assert_eq!(s.position, 0.0);
        let s = AgentState::at(-1.0, Direction::Right).advance(0.0).unwrap();
        assert_eq!(s.position, -1.0);
        assert_eq!(
            AgentState::at(0.0, Direction::Right).advance(-1.0),
            Err(Error::NegativeDuration(-1.0))
        );
    }

    #[test]
    fn crossing_examples() {
        assert_eq!(leg_crossing_time(0.0, 4.0, 1.0, 3.0), Some(3.0));
        assert_eq!(leg_crossing_time(0.0, 4.0, 1.0, 5.0), None);
        assert_eq!(leg_crossing_time(2.0, -2.0, 0.5, 0.0), Some(4.0));
        assert_eq!(leg_crossing_time(2.0, 2.0, 1.0, 2.0), Some(0.0));
    }

    #[test]
    fn turn_extremes() {
        let mut rng = RandomStream::new(3);
        let s = AgentState::at(1.5, Direction::Left);
        for _ in 0..100 {
            let (t, ok) = attempt_turn(s, FaultProb::ZERO, &mut rng);
            assert!(ok);
            assert_eq!(t.direction, Direction::Right);
            assert_eq!(t.position, 1.5);
            let (t, ok) = attempt_turn(s, FaultProb::new(1.0).unwrap(), &mut rng);
            assert!(!ok);
            assert_eq!(t, s);
        }
    }

    #[test]
    fn one_draw_per_attempt() {
        let mut rng = RandomStream::new(9);
        let p = FaultProb::new(0.3).unwrap();
        for i in 1..=50 {
            attempt_turn(AgentState::at(0.0, Direction::Right), p, &mut rng);
            assert_eq!(rng.position(), i);
        }
    }

    #[test]
    fn speed_and_probability_ranges() {
        assert!(AgentState::new(0.0, Direction::Right, 0.0).is_err());
        assert!(AgentState::new(0.0, Direction::Right, 1.5).is_err());
        assert!(FaultProb::new(-0.1).is_err());
        assert!(FaultProb::new(0.5).unwrap().ensure_searchable().is_err());
        assert!(FaultProb::new(0.0).unwrap().ensure_searchable().is_err());
        assert!(FaultProb::new(0.0).unwrap().ensure_below_half().is_ok());
        assert_eq!(-Direction::Left, Direction::Right);
        assert_eq!(-(-Direction::Left), Direction::Left);
    }
}
