//! Plan execution: one run per (axis value, scheme, seed), aggregated into
//! per-(axis value, scheme) mean and standard-error rows.

use serde::{Deserialize, Serialize};

use sixdma::scene::generate_scenario;
use sixdma::solver::{run_paths, run_scheme};

use crate::plan::ExperimentPlan;

/// One run's record. Metric fields are absent when the run failed; the
/// failure reason is kept for the JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub scheme: String,
    pub axis_name: String,
    pub axis_value: String,
    pub seed: u64,
    pub wsr_bps_hz: Option<f64>,
    pub outer_iters: Option<usize>,
    pub wall_ms: Option<f64>,
    pub per_ut_rates: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// Aggregate over the seeds of one (axis value, scheme) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub scheme: String,
    pub axis_name: String,
    pub axis_value: String,
    /// "mean" or "stderr".
    pub kind: String,
    pub wsr_bps_hz: Option<f64>,
    pub outer_iters: Option<f64>,
    pub wall_ms: Option<f64>,
    pub per_ut_rates: Vec<f64>,
}

/// Full result table of one plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Results {
    pub axis_name: String,
    /// Largest UT count across the plan; fixes the per-UT column count.
    pub max_uts: usize,
    pub rows: Vec<Row>,
    pub aggregates: Vec<Aggregate>,
}

/// Executes every (axis value, scheme, seed) combination in deterministic
/// order. A failed run is recorded with its reason and the plan continues.
pub fn run_plan(plan: &ExperimentPlan) -> Result<Results, sixdma::Error> {
    plan.validate()?;
    let axis_name = plan.axis.name().to_string();
    let mut rows = Vec::new();
    let mut max_uts = 0;

    for value in &plan.axis_values {
        let (scenario_cfg, solver_cfg) = plan.apply_axis(value)?;
        max_uts = max_uts.max(scenario_cfg.num_uts);
        for scheme in &plan.schemes {
            for &seed in &plan.seeds {
                let mut cfg = scenario_cfg.clone();
                cfg.rng_seed = seed;
                let outcome = generate_scenario(&cfg).and_then(|scenario| {
                    let paths = run_paths(&scenario, seed);
                    run_scheme(*scheme, &scenario, &paths, &solver_cfg, seed)
                });
                let row = match outcome {
                    Ok(metrics) => Row {
                        scheme: scheme.name().into(),
                        axis_name: axis_name.clone(),
                        axis_value: value.clone(),
                        seed,
                        wsr_bps_hz: Some(metrics.wsr),
                        outer_iters: Some(metrics.outer_iterations),
                        wall_ms: Some(metrics.wall_ms),
                        per_ut_rates: metrics.per_ut_rates,
                        error: None,
                    },
                    Err(err) => Row {
                        scheme: scheme.name().into(),
                        axis_name: axis_name.clone(),
                        axis_value: value.clone(),
                        seed,
                        wsr_bps_hz: None,
                        outer_iters: None,
                        wall_ms: None,
                        per_ut_rates: Vec::new(),
                        error: Some(err.to_string()),
                    },
                };
                rows.push(row);
            }
        }
    }

    let aggregates = aggregate(&rows, plan);
    Ok(Results {
        axis_name,
        max_uts,
        rows,
        aggregates,
    })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn stderr(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

fn aggregate(rows: &[Row], plan: &ExperimentPlan) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for value in &plan.axis_values {
        for scheme in &plan.schemes {
            let cell: Vec<&Row> = rows
                .iter()
                .filter(|r| {
                    r.axis_value == *value
                        && r.scheme == scheme.name()
                        && r.wsr_bps_hz.is_some()
                })
                .collect();
            if cell.is_empty() {
                continue;
            }
            let wsr: Vec<f64> = cell.iter().map(|r| r.wsr_bps_hz.unwrap()).collect();
            let iters: Vec<f64> = cell.iter().map(|r| r.outer_iters.unwrap() as f64).collect();
            let wall: Vec<f64> = cell.iter().map(|r| r.wall_ms.unwrap()).collect();
            let ut_count = cell.iter().map(|r| r.per_ut_rates.len()).max().unwrap_or(0);
            let rate_mean: Vec<f64> = (0..ut_count)
                .map(|k| mean(&cell.iter().map(|r| r.per_ut_rates[k]).collect::<Vec<_>>()))
                .collect();
            let rate_stderr: Vec<f64> = (0..ut_count)
                .map(|k| stderr(&cell.iter().map(|r| r.per_ut_rates[k]).collect::<Vec<_>>()))
                .collect();
            out.push(Aggregate {
                scheme: scheme.name().into(),
                axis_name: plan.axis.name().into(),
                axis_value: value.clone(),
                kind: "mean".into(),
                wsr_bps_hz: Some(mean(&wsr)),
                outer_iters: Some(mean(&iters)),
                wall_ms: Some(mean(&wall)),
                per_ut_rates: rate_mean,
            });
            out.push(Aggregate {
                scheme: scheme.name().into(),
                axis_name: plan.axis.name().into(),
                axis_value: value.clone(),
                kind: "stderr".into(),
                wsr_bps_hz: Some(stderr(&wsr)),
                outer_iters: Some(stderr(&iters)),
                wall_ms: Some(stderr(&wall)),
                per_ut_rates: rate_stderr,
            });
        }
    }
    out
}
