use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use faultsearch::analysis::{
    compute_thresholds, cr_theorem_det, cr_theorem_rand, cr_wireless, f_det, f_rand,
    lambert_reference, optimal_g_det, optimal_g_rand, wireless_speed,
};
use faultsearch::bitforge::{harvest_amplified, plan_amplifier, uniform_from_bits};
use faultsearch::harness::{
    estimate, sweep, verify, Scenario, ScenarioParams, Suite, SweepFormat, SweepSpec, VerifyOptions,
};
use faultsearch::{Error, RandomStream};

/// Linear search with faulty turns: closed forms, simulations, sweeps and
/// verification suites.
#[derive(Parser)]
#[command(name = "faultsearch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form ratios, optimal expansion factors and thresholds.
    Analyze {
        #[arg(long)]
        p: f64,
        /// Also evaluate the limit ratios at this expansion factor.
        #[arg(long)]
        g: Option<f64>,
    },
    /// Monte Carlo estimate of one scenario.
    Simulate {
        /// det, rand, rand_toward, det_sim_rand, pair_zigzag, pair_rand, wireless
        scenario: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        g: Option<f64>,
        /// Signed target position; defaults to g^(t + delta).
        #[arg(long, allow_hyphen_values = true)]
        target: Option<f64>,
        #[arg(long, default_value_t = 1)]
        t: u32,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long)]
        speed: Option<f64>,
        #[arg(long = "fail-cap")]
        fail_cap: Option<u32>,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        proto: ProtocolArgs,
    },
    /// Grid sweep written as CSV or JSON.
    Sweep {
        /// A scenario name or figure1.
        scenario: String,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        g: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        t: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        delta: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        gamma: Vec<f64>,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Runs verification suites; exit code 1 if any check fails.
    Verify {
        /// appendix_c, appendix_d, block_inverse, thresholds, figure1, lemma7,
        /// theorem5, bits, or all.
        suite: String,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Harvests amplified random bits near the origin.
    Bits {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 32)]
        bits: usize,
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
        #[arg(long, default_value_t = 1e-9)]
        zeta: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; FAULTSEARCH_THREADS or all cores when absent.
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Args)]
struct ProtocolArgs {
    #[arg(long, default_value_t = 1e-3)]
    gamma: f64,
    #[arg(long = "gamma-decay", default_value_t = 0.5)]
    gamma_decay: f64,
}

/// Rounds to 12 significant digits.
fn sig12(x: f64) -> Value {
    format!("{x:.11e}")
        .parse::<f64>()
        .ok()
        .and_then(serde_json::Number::from_f64)
        .map_or(Value::Null, Value::Number)
}

fn opt12(x: Result<f64, Error>) -> Value {
    x.map_or(Value::Null, sig12)
}

fn print(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

enum Failure {
    Usage(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn analyze(p: f64, g: Option<f64>) -> Result<(), Failure> {
    let th = compute_thresholds();
    let lam = lambert_reference();
    let mut m = Map::new();
    m.insert("p".into(), sig12(p));
    m.insert("g_det".into(), sig12(optimal_g_det(p)?));
    m.insert("cr_theorem_det".into(), sig12(cr_theorem_det(p)?));
    m.insert("g_rand".into(), sig12(optimal_g_rand(p)?));
    m.insert("cr_theorem_rand".into(), sig12(cr_theorem_rand(p)?));
    m.insert("wireless_speed".into(), sig12(wireless_speed(p)?));
    m.insert("cr_wireless".into(), sig12(cr_wireless(p)?));
    if let Some(g) = g {
        m.insert("g".into(), sig12(g));
        m.insert("f_det".into(), opt12(f_det(g, p)));
        m.insert("f_rand".into(), opt12(f_rand(g, p)));
    }
    m.insert(
        "thresholds".into(),
        json!({
            "p_det_g2": sig12(th.p_det_g2),
            "p0": sig12(th.p0),
            "p_det_cr9": sig12(th.p_det_cr9),
            "p_rand_cr9": sig12(th.p_rand_cr9),
            "p_wireless_459": sig12(th.p_wireless_459),
        }),
    );
    m.insert(
        "fault_free_randomized".into(),
        json!({ "g": sig12(lam.g), "cr": sig12(lam.cr) }),
    );
    print(&Value::Object(m));
    Ok(())
}

fn parse_suites(name: &str) -> Result<Vec<Suite>, Failure> {
    if name == "all" {
        Ok(Suite::ALL.to_vec())
    } else {
        Ok(vec![name.parse::<Suite>()?])
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze { p, g } => analyze(p, g),
        Command::Simulate {
            scenario,
            p,
            g,
            target,
            t,
            delta,
            speed,
            fail_cap,
            mc,
            proto,
        } => {
            let scenario: Scenario = scenario.parse()?;
            let mut params = ScenarioParams::new(p, 1.0);
            params.g = g;
            params.speed = speed;
            params.fail_cap = fail_cap;
            params.gamma = proto.gamma;
            params.gamma_decay = proto.gamma_decay;
            let base = params.resolved_g(scenario)?;
            params.target = target.unwrap_or_else(|| base.powf(t as f64 + delta));
            let est = estimate(scenario, &params, mc.trials, mc.seed, mc.parallelism)?;
            let n = params.target.abs();
            print(&json!({
                "scenario": scenario.name(),
                "p": sig12(p),
                "g": sig12(base),
                "target": sig12(params.target),
                "mean": sig12(est.mean),
                "stderr": sig12(est.stderr),
                "ci95": [sig12(est.ci95.0), sig12(est.ci95.1)],
                "ratio": sig12(est.mean / n),
                "n_trials": est.n_trials,
                "n_truncated": est.n_truncated,
                "master_seed": est.master_seed,
            }));
            Ok(())
        }
        Command::Sweep {
            scenario,
            p,
            g,
            t,
            delta,
            gamma,
            format,
            out,
            mc,
        } => {
            let spec = SweepSpec {
                scenario: scenario.parse()?,
                ps: p,
                gs: g,
                ts: t,
                deltas: delta,
                gammas: gamma,
                trials: mc.trials,
                seed: mc.seed,
                parallelism: mc.parallelism,
                format: format.parse::<SweepFormat>()?,
                out: out.clone(),
            };
            let rows = sweep(&spec)?;
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
            Ok(())
        }
        Command::Verify { suite, mc } => {
            let opts = VerifyOptions {
                trials: mc.trials,
                seed: mc.seed,
                parallelism: mc.parallelism,
            };
            let mut reports = Vec::new();
            let mut ok = true;
            for s in parse_suites(&suite)? {
                let r = verify(s, &opts)?;
                ok &= r.passed;
                reports.push(serde_json::to_value(&r).expect("serializable"));
            }
            print(&Value::Array(reports));
            if ok {
                Ok(())
            } else {
                Err(Failure::Verification)
            }
        }
        Command::Bits {
            p,
            bits,
            tolerance,
            zeta,
            seed,
        } => {
            let plan = plan_amplifier(p, tolerance)?;
            let h = harvest_amplified(&plan, bits, zeta, &mut RandomStream::new(seed))?;
            let s: String = h.bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
            print(&json!({
                "p": sig12(p),
                "attempts_per_bit": plan.k,
                "bias": sig12(plan.bias()),
                "bits": s,
                "uniform": sig12(uniform_from_bits(&h.bits)?),
                "elapsed": sig12(h.elapsed),
                "max_excursion": sig12(h.max_excursion),
            }));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
