//! Solve one seeded scenario with the full scheme and print the convergence
//! trace.
//!
//! Run with: cargo run --release --example solve_once

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sixdma::channel::Polarization;
use sixdma::scene::{generate_scenario, ScenarioConfig};
use sixdma::solver::{ao_solve, initialize, run_paths, SolverConfig};

fn main() -> Result<(), sixdma::Error> {
    let seed = 3;
    let scenario = generate_scenario(&ScenarioConfig {
        rng_seed: seed,
        ..Default::default()
    })?;
    let paths = run_paths(&scenario, seed);

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let init = initialize(&scenario, &paths, Polarization::Uni, &mut rng);
    let solved = ao_solve(&scenario, &paths, &SolverConfig::default(), init)?;

    let trace = &solved.trace.wsr;
    println!("outer iterations: {}", solved.trace.outer_iterations());
    println!(
        "weighted sum rate: {:.2} -> {:.2} bps/Hz",
        trace[0],
        trace.last().unwrap()
    );
    for (t, wsr) in trace.iter().enumerate().step_by(10) {
        println!("  iter {t:3}: {wsr:.3}");
    }
    Ok(())
}
