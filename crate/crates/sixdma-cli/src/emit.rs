//! Table output. CSV columns are fixed:
//! `scheme,axis_name,axis_value,seed,wsr_bps_hz,outer_iters,wall_ms,rate_ut1..rate_utN`
//! with N the largest UT count in the plan; shorter rows leave trailing rate
//! cells empty. Aggregate rows are flagged through the `seed` column, which
//! carries `mean` or `stderr` instead of a number. The JSON format mirrors
//! the same data and round-trips byte-exactly.

use std::io::Write;
use std::path::Path;

use sixdma::Error;

use crate::run::Results;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidConfig(format!("unknown format '{other}'"))),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Renders the fixed-column CSV, runs first, aggregates after.
pub fn to_csv(results: &Results) -> String {
    let mut out = String::new();
    out.push_str("scheme,axis_name,axis_value,seed,wsr_bps_hz,outer_iters,wall_ms");
    for k in 0..results.max_uts {
        out.push_str(&format!(",rate_ut{}", k + 1));
    }
    out.push('\n');

    for row in &results.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}",
            row.scheme,
            row.axis_name,
            row.axis_value,
            row.seed,
            opt(row.wsr_bps_hz),
            row.outer_iters.map(|i| i.to_string()).unwrap_or_default(),
            opt(row.wall_ms),
        ));
        for k in 0..results.max_uts {
            out.push(',');
            if let Some(rate) = row.per_ut_rates.get(k) {
                out.push_str(&rate.to_string());
            }
        }
        out.push('\n');
    }
    for agg in &results.aggregates {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}",
            agg.scheme,
            agg.axis_name,
            agg.axis_value,
            agg.kind,
            opt(agg.wsr_bps_hz),
            opt(agg.outer_iters),
            opt(agg.wall_ms),
        ));
        for k in 0..results.max_uts {
            out.push(',');
            if let Some(rate) = agg.per_ut_rates.get(k) {
                out.push_str(&rate.to_string());
            }
        }
        out.push('\n');
    }
    out
}

/// Renders the JSON mirror of the table.
pub fn to_json(results: &Results) -> String {
    serde_json::to_string_pretty(results).expect("results serialize")
}

/// Writes the results to `path` in the requested format.
pub fn emit(results: &Results, format: Format, path: &Path) -> Result<(), Error> {
    let text = match format {
        Format::Csv => to_csv(results),
        Format::Json => to_json(results),
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::InvalidConfig(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    let mut file = std::fs::File::create(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot write {}: {e}", path.display())))?;
    file.write_all(text.as_bytes())
        .map_err(|e| Error::InvalidConfig(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}
