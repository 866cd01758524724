//! Parameter sweeps written as CSV or JSON.
//!
//! Every row carries the same columns in the same order ([`CSV_HEADER`]).
//! A value that does not apply to a scenario is an empty CSV cell and a JSON
//! `null`. Floats are written with 12 significant digits.

use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{estimate, Scenario, ScenarioParams};
use crate::analysis::{
    cr_wireless, cr_wireless_at_speed, det_curve, f_det, f_rand, lambert_reference, rand_curve,
};
use crate::error::{Error, Result};
use crate::oracle::{
    expected_time_det_closed, expected_time_rand_exact, expected_time_rand_unconditioned,
};

pub const CSV_HEADER: [&str; 24] = [
    "scenario",
    "p",
    "g",
    "t",
    "delta",
    "n",
    "gamma",
    "trials",
    "seed",
    "mean",
    "stderr",
    "ci95_lo",
    "ci95_hi",
    "n_truncated",
    "ratio",
    "exact_time",
    "exact_ratio",
    "cr_limit",
    "cr_theorem_det",
    "cr_theorem_rand",
    "scaled_cr_det",
    "scaled_cr_rand",
    "g_det",
    "g_rand",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepFormat {
    Csv,
    Json,
}

impl FromStr for SweepFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(SweepFormat::Csv),
            "json" => Ok(SweepFormat::Json),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// A grid of cells, one per combination of `ps x gs x ts x deltas x
/// gammas`. The target of a cell is `g^(t + delta)` on the right. Empty
/// `gs` or `gammas` mean the scenario default. Every cell uses the same
/// master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub scenario: Scenario,
    pub ps: Vec<f64>,
    pub gs: Vec<f64>,
    pub ts: Vec<u32>,
    pub deltas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub parallelism: Option<usize>,
    pub format: SweepFormat,
    pub out: PathBuf,
}

/// One output row. Field order matches [`CSV_HEADER`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scenario: String,
    pub p: f64,
    pub g: Option<f64>,
    pub t: Option<u32>,
    pub delta: Option<f64>,
    pub n: Option<f64>,
    pub gamma: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
    pub ci95_lo: Option<f64>,
    pub ci95_hi: Option<f64>,
    pub n_truncated: Option<u64>,
    pub ratio: Option<f64>,
    pub exact_time: Option<f64>,
    pub exact_ratio: Option<f64>,
    pub cr_limit: Option<f64>,
    pub cr_theorem_det: Option<f64>,
    pub cr_theorem_rand: Option<f64>,
    pub scaled_cr_det: Option<f64>,
    pub scaled_cr_rand: Option<f64>,
    pub g_det: Option<f64>,
    pub g_rand: Option<f64>,
}

enum Cell {
    Text(String),
    Float(Option<f64>),
    Int(Option<u64>),
}

fn fmt_float(x: f64) -> String {
    format!("{x:.11e}")
}

impl SweepRow {
    fn analytic(scenario: Scenario, p: f64) -> Self {
        let det = det_curve(p).ok();
        let rand = rand_curve(p).ok();
        SweepRow {
            scenario: scenario.name().to_string(),
            p,
            g: None,
            t: None,
            delta: None,
            n: None,
            gamma: None,
            trials: None,
            seed: None,
            mean: None,
            stderr: None,
            ci95_lo: None,
            ci95_hi: None,
            n_truncated: None,
            ratio: None,
            exact_time: None,
            exact_ratio: None,
            cr_limit: None,
            cr_theorem_det: det.map(|c| c.cr),
            cr_theorem_rand: rand.map(|c| c.cr),
            scaled_cr_det: det.map(|c| c.cr_scaled),
            scaled_cr_rand: rand.map(|c| c.cr_scaled),
            g_det: det.map(|c| c.g_star),
            g_rand: rand.map(|c| c.g_star),
        }
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Text(self.scenario.clone()),
            Cell::Float(Some(self.p)),
            Cell::Float(self.g),
            Cell::Int(self.t.map(u64::from)),
            Cell::Float(self.delta),
            Cell::Float(self.n),
            Cell::Float(self.gamma),
            Cell::Int(self.trials),
            Cell::Int(self.seed),
            Cell::Float(self.mean),
            Cell::Float(self.stderr),
            Cell::Float(self.ci95_lo),
            Cell::Float(self.ci95_hi),
            Cell::Int(self.n_truncated),
            Cell::Float(self.ratio),
            Cell::Float(self.exact_time),
            Cell::Float(self.exact_ratio),
            Cell::Float(self.cr_limit),
            Cell::Float(self.cr_theorem_det),
            Cell::Float(self.cr_theorem_rand),
            Cell::Float(self.scaled_cr_det),
            Cell::Float(self.scaled_cr_rand),
            Cell::Float(self.g_det),
            Cell::Float(self.g_rand),
        ]
    }

    fn check_finite(&self) -> Result<()> {
        for (name, cell) in CSV_HEADER.iter().zip(self.cells()) {
            if let Cell::Float(Some(x)) = cell {
                if !x.is_finite() {
                    return Err(Error::NonFinite(name.to_string()));
                }
            }
        }
        Ok(())
    }

    /// CSV fields in header order.
    pub fn csv_fields(&self) -> Vec<String> {
        self.cells()
            .into_iter()
            .map(|c| match c {
                Cell::Text(s) => s,
                Cell::Float(x) => x.map(fmt_float).unwrap_or_default(),
                Cell::Int(x) => x.map(|v| v.to_string()).unwrap_or_default(),
            })
            .collect()
    }

    /// JSON object with the CSV header as keys.
    pub fn json_object(&self) -> Map<String, Value> {
        CSV_HEADER
            .iter()
            .zip(self.cells())
            .map(|(k, c)| {
                let v = match c {
                    Cell::Text(s) => Value::String(s),
                    Cell::Float(x) => x
                        .and_then(|x| fmt_float(x).parse::<f64>().ok())
                        .and_then(serde_json::Number::from_f64)
                        .map_or(Value::Null, Value::Number),
                    Cell::Int(x) => x.map_or(Value::Null, |v| Value::Number(v.into())),
                };
                (k.to_string(), v)
            })
            .collect()
    }
}

/// Exact expected time of a simulated cell, where an oracle exists.
fn exact_time(scenario: Scenario, g: f64, p: f64, t: u32, delta: f64, n: f64) -> Option<f64> {
    match scenario {
        Scenario::Det => expected_time_det_closed(g, p, t, n).ok().map(|e| e.value),
        Scenario::Rand => expected_time_rand_unconditioned(g, p, t, delta, n)
            .ok()
            .map(|e| e.value),
        Scenario::RandToward => expected_time_rand_exact(g, p, t, delta, n)
            .ok()
            .map(|e| e.value),
        _ => None,
    }
}

/// Limit competitive ratio the scenario is expected to approach.
fn cr_limit(scenario: Scenario, g: f64, p: f64, speed: Option<f64>) -> Option<f64> {
    match scenario {
        Scenario::Det => f_det(g, p).ok(),
        Scenario::Rand | Scenario::RandToward | Scenario::DetSimRand => f_rand(g, p).ok(),
        Scenario::PairZigzag => Some(1.0 + 2.0 * g * g / (g - 1.0)),
        Scenario::PairRand => Some(lambert_reference().cr),
        Scenario::Wireless => match speed {
            Some(s) => cr_wireless_at_speed(p, s).ok(),
            None => cr_wireless(p).ok(),
        },
        Scenario::Figure1 => None,
    }
}

/// Computes every row of `spec` in grid order.
pub fn sweep_rows(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.ps.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if spec.scenario == Scenario::Figure1 {
        let rows: Vec<SweepRow> = spec
            .ps
            .iter()
            .map(|&p| SweepRow::analytic(spec.scenario, p))
            .collect();
        return Ok(rows);
    }
    if spec.ts.is_empty() || spec.deltas.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let gs: Vec<Option<f64>> = if spec.gs.is_empty() {
        vec![None]
    } else {
        spec.gs.iter().copied().map(Some).collect()
    };
    let gammas: Vec<Option<f64>> = if spec.gammas.is_empty() {
        vec![None]
    } else {
        spec.gammas.iter().copied().map(Some).collect()
    };
    let mut rows = Vec::new();
    for &p in &spec.ps {
        for &g_in in &gs {
            for &t in &spec.ts {
                for &delta in &spec.deltas {
                    for &gamma in &gammas {
                        let mut params = ScenarioParams::new(p, 1.0);
                        params.g = g_in;
                        if let Some(gm) = gamma {
                            params.gamma = gm;
                        }
                        let g = params.resolved_g(spec.scenario)?;
                        let n = g.powf(t as f64 + delta);
                        params.target = n;
                        let est = estimate(
                            spec.scenario,
                            &params,
                            spec.trials,
                            spec.seed,
                            spec.parallelism,
                        )?;
                        let exact = exact_time(spec.scenario, g, p, t, delta, n);
                        let mut row = SweepRow::analytic(spec.scenario, p);
                        row.g = spec.scenario.uses_g().then_some(g);
                        row.t = Some(t);
                        row.delta = Some(delta);
                        row.n = Some(n);
                        row.gamma = spec.scenario.uses_gamma().then_some(params.gamma);
                        row.trials = Some(spec.trials);
                        row.seed = Some(spec.seed);
                        row.mean = Some(est.mean);
                        row.stderr = Some(est.stderr);
                        row.ci95_lo = Some(est.ci95.0);
                        row.ci95_hi = Some(est.ci95.1);
                        row.n_truncated = Some(est.n_truncated);
                        row.ratio = Some(est.mean / n);
                        row.exact_time = exact;
                        row.exact_ratio = exact.map(|e| e / n);
                        row.cr_limit = cr_limit(spec.scenario, g, p, params.speed);
                        rows.push(row);
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// Renders rows as CSV text.
pub fn to_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.csv_fields())?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Renders rows as a JSON array of flat objects.
pub fn to_json(rows: &[SweepRow]) -> Result<String> {
    let arr = Value::Array(
        rows.iter()
            .map(|r| Value::Object(r.json_object()))
            .collect(),
    );
    let mut s = serde_json::to_string_pretty(&arr)?;
    s.push('\n');
    Ok(s)
}

/// Runs the sweep and writes it to `spec.out`. Nothing is written when the
/// grid is empty, a cell fails, or a value is not finite.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let rows = sweep_rows(spec)?;
    for r in &rows {
        r.check_finite()?;
    }
    let text = match spec.format {
        SweepFormat::Csv => to_csv(&rows)?,
        SweepFormat::Json => to_json(&rows)?,
    };
    fs::write(&spec.out, text)?;
    Ok(rows)
}
