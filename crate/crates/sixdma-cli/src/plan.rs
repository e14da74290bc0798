//! Plan files: a human-readable TOML key-value format whose keys mirror the
//! standard simulation-parameter names.
//!
//! ```toml
//! # scenario
//! m = 8                  # number of APs
//! k = 6                  # number of UTs
//! l = 5                  # paths per link
//! fc_ghz = 2.4           # carrier frequency; lambda_m is derived from it
//! lambda_m = 0.125       # explicit wavelength wins over fc_ghz
//! region_side_lambda = 2.0
//! rician_factor = 10.0
//! noise_dbm = -80.0
//! power_dbm = 10.0
//!
//! # solver
//! eps1 = 1e-3
//! eps2 = 1e-3
//! eps3 = 1e-2
//! max_outer = 200
//! mode = "uni"           # uni | dual
//! offline_realizations = 20
//! es_positions = 2197
//! es_orientations = 1728
//! prv_error_var = 0.0
//!
//! # experiment
//! axis = "num_uts"       # num_uts | num_aps | tx_power_dbm | prv_error_var | mode
//! axis_values = ["4", "6", "8"]
//! schemes = ["6dma", "fa"]
//! seeds = [0, 1, 2]
//! output = "results.csv"
//! format = "csv"         # csv | json
//! ```
//!
//! Every scenario/solver key is optional and falls back to the defaults
//! above; `axis_values`, `schemes`, and `seeds` must be non-empty.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use sixdma::channel::Polarization;
use sixdma::scene::ScenarioConfig;
use sixdma::solver::{Scheme, SolverConfig};
use sixdma::Error;

use crate::emit::Format;

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// The sweep axis of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    NumUts,
    NumAps,
    TxPowerDbm,
    PrvErrorVar,
    Mode,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::NumUts => "num_uts",
            SweepAxis::NumAps => "num_aps",
            SweepAxis::TxPowerDbm => "tx_power_dbm",
            SweepAxis::PrvErrorVar => "prv_error_var",
            SweepAxis::Mode => "mode",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "num_uts" => Ok(SweepAxis::NumUts),
            "num_aps" => Ok(SweepAxis::NumAps),
            "tx_power_dbm" => Ok(SweepAxis::TxPowerDbm),
            "prv_error_var" => Ok(SweepAxis::PrvErrorVar),
            "mode" => Ok(SweepAxis::Mode),
            other => Err(Error::InvalidConfig(format!("unknown sweep axis '{other}'"))),
        }
    }
}

/// A fully resolved experiment plan.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub scenario: ScenarioConfig,
    pub solver: SolverConfig,
    pub axis: SweepAxis,
    pub axis_values: Vec<String>,
    pub schemes: Vec<Scheme>,
    pub seeds: Vec<u64>,
    pub output: PathBuf,
    pub format: Format,
}

impl ExperimentPlan {
    /// Applies one axis value to a (scenario, solver) pair.
    pub fn apply_axis(&self, value: &str) -> Result<(ScenarioConfig, SolverConfig), Error> {
        let mut scenario = self.scenario.clone();
        let mut solver = self.solver;
        match self.axis {
            SweepAxis::NumUts => scenario.num_uts = parse_num(value, "num_uts")? as usize,
            SweepAxis::NumAps => scenario.num_aps = parse_num(value, "num_aps")? as usize,
            SweepAxis::TxPowerDbm => scenario.tx_power_dbm = parse_num(value, "tx_power_dbm")?,
            SweepAxis::PrvErrorVar => solver.prv_error_var = parse_num(value, "prv_error_var")?,
            SweepAxis::Mode => solver.mode = value.parse()?,
        }
        Ok((scenario, solver))
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.axis_values.is_empty() {
            return Err(Error::InvalidConfig("axis_values must be non-empty".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("schemes must be non-empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("seeds must be non-empty".into()));
        }
        for value in &self.axis_values {
            self.apply_axis(value)?;
        }
        Ok(())
    }

    /// Resolves the output path: a `SIXDMA_OUTPUT_DIR` environment variable,
    /// when set, overrides the directory part.
    pub fn resolved_output(&self) -> PathBuf {
        match std::env::var_os("SIXDMA_OUTPUT_DIR") {
            Some(dir) => {
                let name = self.output.file_name().unwrap_or(self.output.as_os_str());
                PathBuf::from(dir).join(name)
            }
            None => self.output.clone(),
        }
    }
}

fn parse_num(value: &str, what: &str) -> Result<f64, Error> {
    value
        .parse::<f64>()
        .map_err(|_| Error::InvalidConfig(format!("axis value '{value}' is not a number ({what})")))
}

/// Raw TOML surface of a plan file; every key optional except the experiment
/// lists.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    m: Option<usize>,
    k: Option<usize>,
    l: Option<usize>,
    fc_ghz: Option<f64>,
    lambda_m: Option<f64>,
    region_side_lambda: Option<f64>,
    rician_factor: Option<f64>,
    noise_dbm: Option<f64>,
    power_dbm: Option<f64>,
    weights: Option<Vec<f64>>,
    hotspot_fraction: Option<f64>,

    eps1: Option<f64>,
    eps2: Option<f64>,
    eps3: Option<f64>,
    max_outer: Option<usize>,
    max_inner_position: Option<usize>,
    max_inner_orientation: Option<usize>,
    mode: Option<String>,
    offline_realizations: Option<usize>,
    es_positions: Option<usize>,
    es_orientations: Option<usize>,
    es_max_sweeps: Option<usize>,
    prv_error_var: Option<f64>,

    axis: Option<String>,
    axis_values: Option<Vec<String>>,
    schemes: Option<Vec<String>>,
    seeds: Option<Vec<u64>>,
    output: Option<PathBuf>,
    format: Option<String>,
}

/// Loads a plan from a TOML file.
pub fn load_plan(path: &Path) -> Result<ExperimentPlan, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    parse_plan(&text)
}

/// Parses a plan from TOML text.
pub fn parse_plan(text: &str) -> Result<ExperimentPlan, Error> {
    let file: PlanFile =
        toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("plan syntax: {e}")))?;
    plan_from_file(file)
}

fn plan_from_file(file: PlanFile) -> Result<ExperimentPlan, Error> {
    let mut scenario = ScenarioConfig::default();
    if let Some(m) = file.m {
        scenario.num_aps = m;
    }
    if let Some(k) = file.k {
        scenario.num_uts = k;
    }
    if let Some(l) = file.l {
        scenario.paths_per_link = l;
    }
    // Explicit wavelength wins; otherwise derive it from the carrier.
    if let Some(lambda) = file.lambda_m {
        scenario.wavelength = lambda;
    } else if let Some(fc) = file.fc_ghz {
        scenario.wavelength = SPEED_OF_LIGHT / (fc * 1e9);
    }
    if let Some(a) = file.region_side_lambda {
        scenario.region_side = a;
    }
    if let Some(chi) = file.rician_factor {
        scenario.rician_factor = chi;
    }
    if let Some(n) = file.noise_dbm {
        scenario.noise_dbm = n;
    }
    if let Some(p) = file.power_dbm {
        scenario.tx_power_dbm = p;
    }
    if let Some(w) = file.weights {
        scenario.weights = w;
    }
    if let Some(f) = file.hotspot_fraction {
        scenario.hotspot_fraction = f;
    }

    let mut solver = SolverConfig::default();
    if let Some(v) = file.eps1 {
        solver.eps1 = v;
    }
    if let Some(v) = file.eps2 {
        solver.eps2 = v;
    }
    if let Some(v) = file.eps3 {
        solver.eps3 = v;
    }
    if let Some(v) = file.max_outer {
        solver.max_outer = v;
    }
    if let Some(v) = file.max_inner_position {
        solver.max_inner_position = v;
    }
    if let Some(v) = file.max_inner_orientation {
        solver.max_inner_orientation = v;
    }
    if let Some(v) = file.mode {
        solver.mode = v.parse::<Polarization>()?;
    }
    if let Some(v) = file.offline_realizations {
        solver.offline_realizations = v;
    }
    if let Some(v) = file.es_positions {
        solver.es_positions = v;
    }
    if let Some(v) = file.es_orientations {
        solver.es_orientations = v;
    }
    if let Some(v) = file.es_max_sweeps {
        solver.es_max_sweeps = v;
    }
    if let Some(v) = file.prv_error_var {
        solver.prv_error_var = v;
    }

    let axis = file.axis.as_deref().unwrap_or("num_uts").parse()?;
    let axis_values = file
        .axis_values
        .unwrap_or_else(|| vec![scenario.num_uts.to_string()]);
    let schemes = file
        .schemes
        .unwrap_or_else(|| vec!["6dma".into(), "fa".into()])
        .iter()
        .map(|s| s.parse::<Scheme>())
        .collect::<Result<Vec<_>, _>>()?;
    // Plans average 100 seeded realizations per point unless told otherwise;
    // trim the list for desk-scale runs.
    let seeds = file.seeds.unwrap_or_else(|| (0..100).collect());
    let format = match file.format.as_deref() {
        None | Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        Some(other) => {
            return Err(Error::InvalidConfig(format!(
                "unknown output format '{other}' (expected 'csv' or 'json')"
            )))
        }
    };

    let plan = ExperimentPlan {
        scenario,
        solver,
        axis,
        axis_values,
        schemes,
        seeds,
        output: file.output.unwrap_or_else(|| PathBuf::from("results.csv")),
        format,
    };
    plan.validate()?;
    Ok(plan)
}
