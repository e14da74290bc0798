//! Experiment harness for the `sixdma` library: loads a plan (base scenario
//! plus one sweep axis, a scheme list, and a seed list), runs every
//! (axis value, scheme, seed) combination deterministically, and emits a
//! plot-ready table as CSV or JSON.

pub mod emit;
pub mod plan;
pub mod run;

pub use emit::{emit, Format};
pub use plan::{ExperimentPlan, SweepAxis};
pub use run::{run_plan, Aggregate, Results, Row};
