//! Scenario registry, Monte Carlo estimates, sweeps and verification suites.

pub mod sweep;
pub mod verify;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{lambert_reference, optimal_g_det, optimal_g_rand};
use crate::bitforge::{deterministic_simulates_randomized, HarvestSpec};
use crate::error::{ensure, Error, Result};
use crate::kinematics::FaultProb;
use crate::montecarlo::{run_trials, Estimate};
use crate::rng::RandomStream;
use crate::search::{
    default_fail_cap, deterministic_search, randomized_search, randomized_search_with,
    RandomChoices, SimOutcome, TargetPlacement,
};
use crate::two_agent::{
    simulate_two_agent_randomized, simulate_two_agent_zigzag_with, wireless_search,
    wireless_search_with,
};

pub use sweep::{sweep, SweepFormat, SweepRow, SweepSpec, CSV_HEADER};
pub use verify::{verify, Check, Suite, VerifyOptions, VerifyReport};

/// A simulated quantity that [`estimate`] can average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Deterministic single-agent search.
    Det,
    /// Randomized single-agent search with a uniform first direction.
    Rand,
    /// Randomized search whose first sweep heads to the target.
    RandToward,
    /// A deterministic agent simulating the randomized search with harvested
    /// bits.
    DetSimRand,
    /// Two agents simulating the fault-free zig-zag.
    PairZigzag,
    /// Two agents running the randomized zig-zag with harvested bits.
    PairRand,
    /// Two wireless agents, follower slowing down.
    Wireless,
    /// Closed-form curves only; no simulation.
    Figure1,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Det,
        Scenario::Rand,
        Scenario::RandToward,
        Scenario::DetSimRand,
        Scenario::PairZigzag,
        Scenario::PairRand,
        Scenario::Wireless,
        Scenario::Figure1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Det => "det",
            Scenario::Rand => "rand",
            Scenario::RandToward => "rand_toward",
            Scenario::DetSimRand => "det_sim_rand",
            Scenario::PairZigzag => "pair_zigzag",
            Scenario::PairRand => "pair_rand",
            Scenario::Wireless => "wireless",
            Scenario::Figure1 => "figure1",
        }
    }

    /// Whether [`estimate`] can run it.
    pub fn is_simulated(self) -> bool {
        self != Scenario::Figure1
    }

    /// Expansion factor used when none is given.
    pub fn default_g(self, p: f64) -> Result<f64> {
        match self {
            Scenario::Det => optimal_g_det(p),
            Scenario::Rand | Scenario::RandToward | Scenario::DetSimRand => optimal_g_rand(p),
            Scenario::PairZigzag | Scenario::Wireless | Scenario::Figure1 => Ok(2.0),
            Scenario::PairRand => Ok(lambert_reference().g),
        }
    }

    /// Whether the `g` parameter is used by the simulation.
    pub fn uses_g(self) -> bool {
        matches!(
            self,
            Scenario::Det
                | Scenario::Rand
                | Scenario::RandToward
                | Scenario::DetSimRand
                | Scenario::PairZigzag
        )
    }

    /// Whether the `gamma` parameter is used.
    pub fn uses_gamma(self) -> bool {
        matches!(
            self,
            Scenario::PairZigzag | Scenario::PairRand | Scenario::Wireless
        )
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

/// Inputs of one scenario run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub p: f64,
    /// Expansion factor; the scenario default when `None`.
    pub g: Option<f64>,
    /// Signed target position.
    pub target: f64,
    pub gamma: f64,
    pub gamma_decay: f64,
    /// Wireless follower speed; `wireless_speed(p)` when `None`.
    pub speed: Option<f64>,
    /// Single-agent failure cap; `default_fail_cap(p)` when `None`.
    pub fail_cap: Option<u32>,
    /// Bits of `epsilon` for the harvesting scenarios.
    pub bit_budget: usize,
}

impl ScenarioParams {
    pub fn new(p: f64, target: f64) -> Self {
        Self {
            p,
            g: None,
            target,
            gamma: 1e-3,
            gamma_decay: 0.5,
            speed: None,
            fail_cap: None,
            bit_budget: 32,
        }
    }

    pub fn with_g(self, g: f64) -> Self {
        Self { g: Some(g), ..self }
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        Self { gamma, ..self }
    }

    /// The expansion factor that will be used.
    pub fn resolved_g(&self, scenario: Scenario) -> Result<f64> {
        match self.g {
            Some(g) if scenario.uses_g() => Ok(g),
            _ => scenario.default_g(self.p),
        }
    }
}

/// One trial of `scenario`.
pub fn run_scenario(
    scenario: Scenario,
    params: &ScenarioParams,
    rng: &mut RandomStream,
) -> Result<SimOutcome> {
    let p = FaultProb::new(params.p)?;
    let target = TargetPlacement::at(params.target)?;
    let cap = params
        .fail_cap
        .unwrap_or_else(|| default_fail_cap(params.p));
    let g = params.resolved_g(scenario)?;
    match scenario {
        Scenario::Det => deterministic_search(g, p, &target, rng, cap),
        Scenario::Rand => randomized_search(g, p, &target, rng, cap),
        Scenario::RandToward => randomized_search_with(
            g,
            p,
            &target,
            rng,
            cap,
            RandomChoices::toward(target.side()),
        ),
        Scenario::DetSimRand => {
            let spec = HarvestSpec {
                n_bits: params.bit_budget,
                ..HarvestSpec::default()
            };
            deterministic_simulates_randomized(g, p, &target, rng, cap, &spec).map(|(o, _)| o)
        }
        Scenario::PairZigzag => {
            simulate_two_agent_zigzag_with(g, &target, p, params.gamma, params.gamma_decay, rng)
                .map(|r| r.outcome)
        }
        Scenario::PairRand => simulate_two_agent_randomized(
            &target,
            p,
            params.gamma,
            params.gamma_decay,
            params.bit_budget,
            rng,
        )
        .map(|r| r.outcome),
        Scenario::Wireless => match params.speed {
            Some(s) => wireless_search_with(&target, p, params.gamma, s, rng),
            None => wireless_search(&target, p, params.gamma, rng),
        }
        .map(|r| r.outcome),
        Scenario::Figure1 => Err(Error::UnknownScenario(format!(
            "{scenario} is not simulated"
        ))),
    }
}

/// Monte Carlo estimate of the termination time of `scenario`.
///
/// Trial `i` runs on `RandomStream::for_trial(master_seed, i)`, so the
/// result does not depend on `parallelism`. Parameter errors are reported
/// before any trial runs.
pub fn estimate(
    scenario: Scenario,
    params: &ScenarioParams,
    trials: u64,
    master_seed: u64,
    parallelism: Option<usize>,
) -> Result<Estimate> {
    ensure("trials", trials as f64, trials >= 2, ">= 2")?;
    run_scenario(
        scenario,
        params,
        &mut RandomStream::for_trial(master_seed, 0),
    )?;
    Ok(run_trials(trials, master_seed, parallelism, |rng| {
        let o = run_scenario(scenario, params, rng).expect("parameters validated");
        (o.termination_time, o.truncated)
    }))
}
