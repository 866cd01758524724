//! Linear search on the infinite line by agents whose turns fail
//! independently with a known probability `p`.
//!
//! The crate simulates the single-agent zig-zag searches and the two-agent
//! protocols with exact event times, evaluates their expected termination
//! times exactly, and runs seeded Monte Carlo estimates that can be compared
//! against those exact values.

pub mod analysis;
pub mod bitforge;
pub mod error;
pub mod harness;
pub mod kinematics;
pub mod montecarlo;
pub mod oracle;
pub mod rng;
pub mod roots;
pub mod search;
pub mod two_agent;

pub use error::{Error, Result};
pub use kinematics::{attempt_turn, leg_crossing_time, AgentState, Direction, FaultProb, Leg};
pub use montecarlo::{Estimate, MomentAccumulator};
pub use rng::{derive_trial_seed, RandomStream};
pub use search::{SearchParams, SimOutcome, TargetPlacement};
