//! `sixdma` CLI: `run` executes a plan file, `solve` runs one scheme on one
//! scenario, `trace` dumps the per-iteration record of a single solve. Errors
//! exit nonzero with a machine-readable JSON object on stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sixdma::scene::{generate_scenario, ScenarioConfig};
use sixdma::solver::{run_paths, run_scheme, Scheme, SolverConfig};

use sixdma_cli::{emit, plan, run_plan};

#[derive(Parser)]
#[command(
    name = "sixdma",
    about = "Movable-antenna multi-AP sum-rate experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment plan file and write the results table.
    Run {
        /// Plan file (TOML).
        plan: PathBuf,
        /// Override the plan's output path.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Override the plan's output format (csv|json).
        #[arg(long)]
        format: Option<String>,
        /// Override the plan's seed list (comma-separated).
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Override the plan's scheme list (comma-separated).
        #[arg(long, value_delimiter = ',')]
        schemes: Option<Vec<String>>,
    },
    /// Solve a single scenario and print the metrics as JSON.
    Solve(SolveArgs),
    /// Solve a single scenario and print the full solve trace as JSON.
    Trace {
        #[command(flatten)]
        args: SolveArgs,
        /// Write the trace here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// Scheme: 6dma | 6dma-position | 6dma-orientation | fa | es | offline-6dma
    #[arg(long, default_value = "6dma")]
    scheme: String,
    /// Run seed (scenario, channels, initialization).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of APs.
    #[arg(short, default_value_t = 8)]
    m: usize,
    /// Number of UTs.
    #[arg(short, default_value_t = 6)]
    k: usize,
    /// Paths per link.
    #[arg(short, default_value_t = 5)]
    l: usize,
    /// Polarization mode: uni | dual.
    #[arg(long, default_value = "uni")]
    mode: String,
    /// Transmit power per UT in dBm.
    #[arg(long, default_value_t = 10.0)]
    power_dbm: f64,
    /// Noise power in dBm.
    #[arg(long, default_value_t = -80.0)]
    noise_dbm: f64,
    /// Variance of the PRV estimation error used during optimization.
    #[arg(long, default_value_t = 0.0)]
    prv_error_var: f64,
    /// Maximum outer iterations.
    #[arg(long, default_value_t = 200)]
    max_outer: usize,
}

impl SolveArgs {
    fn configs(&self) -> Result<(ScenarioConfig, SolverConfig, Scheme), sixdma::Error> {
        let scenario = ScenarioConfig {
            num_aps: self.m,
            num_uts: self.k,
            paths_per_link: self.l,
            tx_power_dbm: self.power_dbm,
            noise_dbm: self.noise_dbm,
            rng_seed: self.seed,
            ..Default::default()
        };
        let solver = SolverConfig {
            mode: self.mode.parse()?,
            prv_error_var: self.prv_error_var,
            max_outer: self.max_outer,
            ..Default::default()
        };
        let scheme = self.scheme.parse()?;
        Ok((scenario, solver, scheme))
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", serde_json::json!({ "error": err.to_string() }));
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), sixdma::Error> {
    match cli.command {
        Command::Run {
            plan: plan_path,
            output,
            format,
            seeds,
            schemes,
        } => {
            let mut plan = plan::load_plan(&plan_path)?;
            if let Some(output) = output {
                plan.output = output;
            }
            if let Some(format) = format {
                plan.format = format.parse()?;
            }
            if let Some(seeds) = seeds {
                plan.seeds = seeds;
            }
            if let Some(schemes) = schemes {
                plan.schemes = schemes
                    .iter()
                    .map(|s| s.parse())
                    .collect::<Result<Vec<_>, _>>()?;
            }
            plan.validate()?;
            let results = run_plan(&plan)?;
            let path = plan.resolved_output();
            emit(&results, plan.format, &path)?;
            println!("wrote {} ({} rows)", path.display(), results.rows.len());
            Ok(())
        }
        Command::Solve(args) => {
            let (scenario_cfg, solver_cfg, scheme) = args.configs()?;
            let scenario = generate_scenario(&scenario_cfg)?;
            let paths = run_paths(&scenario, args.seed);
            let metrics = run_scheme(scheme, &scenario, &paths, &solver_cfg, args.seed)?;
            println!(
                "{}",
                serde_json::json!({
                    "scheme": scheme.name(),
                    "seed": args.seed,
                    "m": scenario_cfg.num_aps,
                    "k": scenario_cfg.num_uts,
                    "l": scenario_cfg.paths_per_link,
                    "power_dbm": scenario_cfg.tx_power_dbm,
                    "prv_error_var": solver_cfg.prv_error_var,
                    "mode": solver_cfg.mode.to_string(),
                    "wsr_bps_hz": metrics.wsr,
                    "initial_wsr_bps_hz": metrics.initial_wsr,
                    "per_ut_rates": metrics.per_ut_rates,
                    "outer_iters": metrics.outer_iterations,
                    "wall_ms": metrics.wall_ms,
                })
            );
            Ok(())
        }
        Command::Trace { args, output } => {
            let (scenario_cfg, solver_cfg, scheme) = args.configs()?;
            let scenario = generate_scenario(&scenario_cfg)?;
            let paths = run_paths(&scenario, args.seed);
            let metrics = run_scheme(scheme, &scenario, &paths, &solver_cfg, args.seed)?;
            let text = metrics.trace.to_json();
            match output {
                Some(path) => std::fs::write(&path, text).map_err(|e| {
                    sixdma::Error::InvalidConfig(format!("cannot write {}: {e}", path.display()))
                })?,
                None => println!("{text}"),
            }
            Ok(())
        }
    }
}
