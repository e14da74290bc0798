//! Alternating optimization of antenna positions, orientations, and MMSE
//! combining, plus the offline statistical-CSI variant and the benchmark
//! schemes used in experiments.
//!
//! One outer iteration sweeps the APs twice: a position pass (projected MM
//! ascent per AP) and an orientation pass (Stiefel conjugate gradient per
//! AP). After each per-AP block the affected channel rows are rebuilt, the
//! combiner is refreshed with the MMSE solution, and the FP auxiliaries are
//! reset to their closed-form optima, which keeps the weighted sum rate
//! non-decreasing across the whole run. The offline mode runs the identical
//! loop over a set of channel realizations with all subproblem objectives
//! averaged, producing poses that are then held fixed out of sample.

mod es;

pub use es::{es_baseline, orientation_grid, position_grid};

use std::time::Instant;

use nalgebra::{DMatrix, DVector, Matrix3xX, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::aom_opt::{optimize_orientation, CgOptions, OrientationProblem, OrientationTerm};
use crate::apv_opt::{optimize_position, PositionProblem, PositionTerm};
use crate::channel::{
    assemble, channel_coeff_pol, gain_matrix, AntennaPose, ChannelMatrix, Polarization,
};
use crate::receiver::{ap_coeffs, mmse_combiner, per_ut_sinrs, rates, wsr, CombinerMatrix, FpState};
use crate::scene::{derive_seed, sample_all_paths, PathSets, Scenario};
use crate::{Complex, Error, Result};

/// Optimization scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Full alternating position + orientation optimization.
    SixDma,
    /// Position optimization only, orientation fixed to the FA frame.
    PositionOnly,
    /// Orientation optimization only, position fixed at the region corner.
    OrientationOnly,
    /// Fixed antenna: no optimization at all.
    Fa,
    /// Alternating selection over discrete position/orientation grids.
    Es,
    /// Offline design over Monte Carlo channel realizations.
    OfflineSixDma,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::SixDma,
        Scheme::PositionOnly,
        Scheme::OrientationOnly,
        Scheme::Fa,
        Scheme::Es,
        Scheme::OfflineSixDma,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::SixDma => "6dma",
            Scheme::PositionOnly => "6dma-position",
            Scheme::OrientationOnly => "6dma-orientation",
            Scheme::Fa => "fa",
            Scheme::Es => "es",
            Scheme::OfflineSixDma => "offline-6dma",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .iter()
            .copied()
            .find(|scheme| scheme.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scheme '{s}'")))
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Solver thresholds and caps. Defaults use the standard convergence
/// thresholds (1e-3 for both inner loops, 1e-2 for the outer loop) and the
/// 13^3-position / 12^3-orientation search grids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Inner position-loop convergence threshold.
    pub eps1: f64,
    /// Inner orientation-loop convergence threshold.
    pub eps2: f64,
    /// Outer loop convergence threshold on the weighted sum rate.
    pub eps3: f64,
    /// Maximum outer iterations.
    pub max_outer: usize,
    /// Maximum position-subproblem iterations per call.
    pub max_inner_position: usize,
    /// Maximum orientation-subproblem iterations per call.
    pub max_inner_orientation: usize,
    pub mode: Polarization,
    /// Monte Carlo realizations for the offline design.
    pub offline_realizations: usize,
    /// Discrete position count for the selection baseline (cube per AP).
    pub es_positions: usize,
    /// Discrete orientation count for the selection baseline (cube per AP).
    pub es_orientations: usize,
    /// Cap on full alternating-selection sweeps.
    pub es_max_sweeps: usize,
    /// Variance of the complex Gaussian PRV estimation error used during
    /// pose optimization; evaluation always uses the true PRVs.
    pub prv_error_var: f64,
    /// Forward-difference step of the orientation gradient.
    pub fd_step: f64,
    /// Run the per-step monotonicity checks (cheap; leave on).
    pub check_invariants: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps1: 1e-3,
            eps2: 1e-3,
            eps3: 1e-2,
            max_outer: 200,
            max_inner_position: 200,
            max_inner_orientation: 200,
            mode: Polarization::Uni,
            offline_realizations: 20,
            es_positions: 13usize.pow(3),
            es_orientations: 12usize.pow(3),
            es_max_sweeps: 50,
            prv_error_var: 0.0,
            fd_step: 1e-6,
            check_invariants: true,
        }
    }
}

/// Per-run record of the optimization: enough to audit convergence and replay
/// the pose evolution.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SolveTrace {
    /// Weighted sum rate per outer iteration (index 0 = initialization),
    /// averaged over realizations in offline mode. Non-decreasing.
    pub wsr: Vec<f64>,
    /// Per-UT rates per outer iteration (first realization).
    pub per_ut_rates: Vec<Vec<f64>>,
    /// Pose snapshot per outer iteration.
    pub poses: Vec<Vec<AntennaPose>>,
    /// FP auxiliary snapshot per outer iteration (first realization).
    pub fp_states: Vec<FpState>,
    /// Objective trace of every position subproblem call, in call order.
    pub position_inner: Vec<Vec<f64>>,
    /// Objective trace of every orientation subproblem call, in call order.
    pub orientation_inner: Vec<Vec<f64>>,
    /// Wall-clock milliseconds spent in the position phase per outer
    /// iteration.
    pub position_ms: Vec<f64>,
    /// Wall-clock milliseconds spent in the orientation phase per outer
    /// iteration.
    pub orientation_ms: Vec<f64>,
    /// Final collective channel matrix (first realization), row-major with
    /// `[re, im]` entries, for debugging.
    pub final_channel: Vec<Vec<[f64; 2]>>,
}

impl SolveTrace {
    pub fn outer_iterations(&self) -> usize {
        self.wsr.len().saturating_sub(1)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

/// Poses, per-realization combiners, and the trace of one solve.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub poses: Vec<AntennaPose>,
    pub combiners: Vec<CombinerMatrix>,
    pub trace: SolveTrace,
}

const STREAM_INIT: u64 = 2;
const STREAM_CHANNEL: u64 = 3;
const STREAM_OFFLINE: u64 = 4;
const STREAM_PRV_NOISE: u64 = 5;

/// Draws `count` i.i.d. path realizations from the scenario's channel
/// distribution (fixed geometry, fresh path responses and field vectors).
pub fn sample_realizations(
    scenario: &Scenario,
    count: usize,
    rng: &mut ChaCha12Rng,
) -> Vec<PathSets> {
    (0..count).map(|_| sample_all_paths(scenario, rng)).collect()
}

/// Standard instantaneous path sets of a run, seeded from the run seed.
pub fn run_paths(scenario: &Scenario, seed: u64) -> PathSets {
    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, STREAM_CHANNEL));
    sample_all_paths(scenario, &mut rng)
}

/// The fixed-antenna pose: region corner with the face normal along +x and
/// the polarization vector along +y (plus +z for the second branch).
pub fn fa_poses(scenario: &Scenario, mode: Polarization) -> Vec<AntennaPose> {
    scenario
        .regions
        .iter()
        .map(|region| match mode {
            Polarization::Uni => AntennaPose::uni(region.min, Vector3::x(), Vector3::y()),
            Polarization::Dual => {
                AntennaPose::dual(region.min, Vector3::x(), Vector3::y(), Vector3::z())
            }
        })
        .collect()
}

/// Random initialization: position uniform in each moving region; face
/// normal pointing at a uniformly chosen UT's line of sight; polarization
/// vector set to that UT's LoS field vector projected orthogonal to the
/// normal and renormalized. Dual mode adds the right-handed completion
/// `v2 = u x v1`.
pub fn initialize(
    scenario: &Scenario,
    paths: &PathSets,
    mode: Polarization,
    rng: &mut ChaCha12Rng,
) -> Vec<AntennaPose> {
    let k_total = scenario.config.num_uts;
    scenario
        .regions
        .iter()
        .enumerate()
        .map(|(m, region)| {
            let position = Vector3::new(
                rng.random_range(region.min.x..=region.max.x),
                rng.random_range(region.min.y..=region.max.y),
                rng.random_range(region.min.z..=region.max.z),
            );
            let (u, v) = loop {
                let k = rng.random_range(0..k_total);
                let set = &paths[(m, k)];
                let u = set.wave_vector(0);
                let e = set.field[0];
                let residual = e - u * u.dot(&e);
                if residual.norm() > 1e-9 {
                    break (u, residual.normalize());
                }
            };
            match mode {
                Polarization::Uni => AntennaPose::uni(position, u, v),
                Polarization::Dual => AntennaPose::dual(position, u, v, u.cross(&v)),
            }
        })
        .collect()
}

/// Read-only view of one realization's state, as consumed by the subproblem
/// builders.
pub struct LinkState<'a> {
    pub paths: &'a PathSets,
    pub h: &'a ChannelMatrix,
    pub w: &'a CombinerMatrix,
    pub alpha: &'a DVector<f64>,
    pub beta: &'a DVector<Complex>,
}

/// Mutable per-realization state of a solve.
struct RealizationState<'a> {
    paths: &'a PathSets,
    h: ChannelMatrix,
    w: CombinerMatrix,
    alpha: DVector<f64>,
    beta: DVector<Complex>,
}

impl<'a> RealizationState<'a> {
    fn new(
        paths: &'a PathSets,
        poses: &[AntennaPose],
        lambda: f64,
        mode: Polarization,
        noise: f64,
        weights: &[f64],
    ) -> Result<Self> {
        let h = assemble(poses, paths, lambda, mode)?;
        let w = mmse_combiner(&h, noise)?;
        let alpha = crate::receiver::update_alpha(&h, &w, noise);
        let beta = crate::receiver::update_beta(&h, &w, &alpha, weights, noise);
        Ok(Self {
            paths,
            h,
            w,
            alpha,
            beta,
        })
    }

    /// Rebuilds the channel rows of AP `m`, refreshes the MMSE combiner, and
    /// resets the FP auxiliaries. With `check` on, verifies that the refresh
    /// did not lower any UT's SINR.
    fn refresh_ap(
        &mut self,
        m: usize,
        pose: &AntennaPose,
        lambda: f64,
        mode: Polarization,
        noise: f64,
        weights: &[f64],
        check: bool,
    ) -> Result<()> {
        let m_total = self.paths.num_aps();
        for (p, row) in mode.rows_of(m, m_total).into_iter().enumerate() {
            for k in 0..self.paths.num_uts() {
                self.h[(row, k)] = channel_coeff_pol(pose, &self.paths[(m, k)], lambda, p);
            }
        }
        let before = if check {
            Some(per_ut_sinrs(&self.h, &self.w, noise))
        } else {
            None
        };
        self.w = mmse_combiner(&self.h, noise)?;
        if let Some(before) = before {
            let after = per_ut_sinrs(&self.h, &self.w, noise);
            for k in 0..before.len() {
                if after[k] < before[k] * (1.0 - 1e-9) - 1e-12 {
                    return Err(Error::MonotonicityViolation {
                        context: "combiner refresh",
                        iter: k,
                        prev: before[k],
                        curr: after[k],
                    });
                }
            }
        }
        self.alpha = crate::receiver::update_alpha(&self.h, &self.w, noise);
        self.beta = crate::receiver::update_beta(&self.h, &self.w, &self.alpha, weights, noise);
        Ok(())
    }

    fn fp_state(&self) -> FpState {
        FpState {
            alpha: self.alpha.as_slice().to_vec(),
            beta: self.beta.as_slice().to_vec(),
        }
    }

    fn view(&self) -> LinkState<'_> {
        LinkState {
            paths: self.paths,
            h: &self.h,
            w: &self.w,
            alpha: &self.alpha,
            beta: &self.beta,
        }
    }
}

fn mean_wsr(states: &[RealizationState<'_>], weights: &[f64], noise: f64) -> f64 {
    states
        .iter()
        .map(|s| wsr(&s.h, &s.w, weights, noise))
        .sum::<f64>()
        / states.len() as f64
}

/// Builds the position subproblem for AP `m`: the extraction of the
/// transformed objective restricted to that AP's channel entries, at the
/// current orientation, averaged over the given realizations.
pub fn position_subproblem(
    m: usize,
    pose: &AntennaPose,
    states: &[LinkState<'_>],
    scenario: &Scenario,
    mode: Polarization,
    weights: &[f64],
) -> PositionProblem {
    let rows = mode.rows_of(m, scenario.config.num_aps);
    let lambda = scenario.config.wavelength;
    let share = 1.0 / states.len() as f64;
    let mut terms = Vec::new();
    for state in states {
        let coeffs = ap_coeffs(&rows, state.h, state.w, state.alpha, state.beta, weights);
        for k in 0..state.paths.num_uts() {
            let set = &state.paths[(m, k)];
            let l_total = set.len();
            let mut gain_prv = DMatrix::<Complex>::zeros(l_total, rows.len());
            for p in 0..rows.len() {
                let g = gain_matrix(&pose.normal(), &pose.polarization_vector(p), set, lambda);
                for l in 0..l_total {
                    gain_prv[(l, p)] = set.prv[l] * g[l];
                }
            }
            let c = coeffs.c.row(k).transpose();
            terms.push(PositionTerm::new(
                set.wave_vectors(),
                gain_prv,
                c,
                coeffs.v.clone(),
                share,
            ));
        }
    }
    PositionProblem {
        terms,
        lambda,
        region: scenario.regions[m],
    }
}

/// Builds the orientation subproblem for AP `m` at the current position,
/// averaged over the given realizations.
pub fn orientation_subproblem(
    m: usize,
    pose: &AntennaPose,
    states: &[LinkState<'_>],
    scenario: &Scenario,
    mode: Polarization,
    weights: &[f64],
) -> OrientationProblem {
    let rows = mode.rows_of(m, scenario.config.num_aps);
    let lambda = scenario.config.wavelength;
    let share = 1.0 / states.len() as f64;
    let mut terms = Vec::new();
    for state in states {
        let coeffs = ap_coeffs(&rows, state.h, state.w, state.alpha, state.beta, weights);
        for k in 0..state.paths.num_uts() {
            let set = &state.paths[(m, k)];
            let base: Vec<Complex> = (0..set.len())
                .map(|l| {
                    let phase =
                        -std::f64::consts::TAU * set.wave_vector(l).dot(&pose.position) / lambda;
                    Complex::from_polar(1.0, phase)
                        * set.prv[l]
                        * (lambda / (4.0 * std::f64::consts::PI * set.distance))
                })
                .collect();
            let c: Vec<Complex> = coeffs.c.row(k).iter().copied().collect();
            terms.push(OrientationTerm::new(
                set.wave_vectors(),
                set.field.clone(),
                base,
                c,
                coeffs.v.clone(),
                share,
            ));
        }
    }
    OrientationProblem { terms }
}

/// Alternating optimization over one or more channel realizations. With a
/// single realization this is the instantaneous-CSI solver; with several it
/// is the offline statistical-CSI design (all subproblem objectives averaged
/// with equal weights, per-realization MMSE combining).
fn ao_core(
    scenario: &Scenario,
    realizations: &[PathSets],
    cfg: &SolverConfig,
    mut poses: Vec<AntennaPose>,
    move_positions: bool,
    move_orientations: bool,
) -> Result<SolveOutput> {
    if realizations.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one channel realization is required".into(),
        ));
    }
    let lambda = scenario.config.wavelength;
    let noise = scenario.config.normalized_noise();
    let weights = scenario.config.weights_or_ones();
    let m_total = scenario.config.num_aps;
    for (pose, region) in poses.iter().zip(&scenario.regions) {
        pose.validate(region)?;
    }

    let mut states = realizations
        .iter()
        .map(|paths| RealizationState::new(paths, &poses, lambda, cfg.mode, noise, &weights))
        .collect::<Result<Vec<_>>>()?;

    let mut trace = SolveTrace::default();
    let mut current = mean_wsr(&states, &weights, noise);
    trace.wsr.push(current);
    trace
        .per_ut_rates
        .push(rates(&states[0].h, &states[0].w, noise).as_slice().to_vec());
    trace.poses.push(poses.clone());
    trace.fp_states.push(states[0].fp_state());

    for _ in 0..cfg.max_outer {
        let position_start = Instant::now();
        if move_positions {
            for m in 0..m_total {
                let views: Vec<LinkState<'_>> = states.iter().map(|s| s.view()).collect();
                let problem =
                    position_subproblem(m, &poses[m], &views, scenario, cfg.mode, &weights);
                let result =
                    optimize_position(&problem, &poses[m].position, cfg.eps1, cfg.max_inner_position);
                trace.position_inner.push(result.trace);
                poses[m].position = result.position;
                for state in &mut states {
                    state.refresh_ap(
                        m,
                        &poses[m],
                        lambda,
                        cfg.mode,
                        noise,
                        &weights,
                        cfg.check_invariants,
                    )?;
                }
            }
        }
        trace
            .position_ms
            .push(position_start.elapsed().as_secs_f64() * 1e3);

        let orientation_start = Instant::now();
        if move_orientations {
            for m in 0..m_total {
                let views: Vec<LinkState<'_>> = states.iter().map(|s| s.view()).collect();
                let problem =
                    orientation_subproblem(m, &poses[m], &views, scenario, cfg.mode, &weights);
                let options = CgOptions {
                    eps: cfg.eps2,
                    max_iters: cfg.max_inner_orientation,
                    fd_step: cfg.fd_step,
                    ..Default::default()
                };
                let result =
                    optimize_orientation(|a| problem.objective(a), &poses[m].orientation, &options);
                trace.orientation_inner.push(result.trace);
                poses[m].orientation = result.orientation;
                for state in &mut states {
                    state.refresh_ap(
                        m,
                        &poses[m],
                        lambda,
                        cfg.mode,
                        noise,
                        &weights,
                        cfg.check_invariants,
                    )?;
                }
            }
        }
        trace
            .orientation_ms
            .push(orientation_start.elapsed().as_secs_f64() * 1e3);

        let next = mean_wsr(&states, &weights, noise);
        trace.wsr.push(next);
        trace
            .per_ut_rates
            .push(rates(&states[0].h, &states[0].w, noise).as_slice().to_vec());
        trace.poses.push(poses.clone());
        trace.fp_states.push(states[0].fp_state());

        let improvement = next - current;
        if cfg.check_invariants && improvement < -1e-9 * (1.0 + next.abs()) {
            return Err(Error::MonotonicityViolation {
                context: "outer weighted sum rate",
                iter: trace.outer_iterations(),
                prev: current,
                curr: next,
            });
        }
        current = next;
        if improvement < cfg.eps3 {
            break;
        }
    }

    trace.final_channel = dump_channel(&states[0].h);
    Ok(SolveOutput {
        poses,
        combiners: states.into_iter().map(|s| s.w).collect(),
        trace,
    })
}

fn dump_channel(h: &ChannelMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..h.nrows())
        .map(|r| (0..h.ncols()).map(|c| [h[(r, c)].re, h[(r, c)].im]).collect())
        .collect()
}

/// Instantaneous-CSI alternating optimization (positions, orientations, and
/// combiner) from the given initial poses.
pub fn ao_solve(
    scenario: &Scenario,
    paths: &PathSets,
    cfg: &SolverConfig,
    init_poses: Vec<AntennaPose>,
) -> Result<SolveOutput> {
    ao_core(scenario, std::slice::from_ref(paths), cfg, init_poses, true, true)
}

/// Offline statistical-CSI design over `realizations`; the returned poses
/// are meant to be held fixed while only the combiner adapts per channel.
pub fn offline_solve(
    scenario: &Scenario,
    realizations: &[PathSets],
    cfg: &SolverConfig,
    init_poses: Vec<AntennaPose>,
) -> Result<SolveOutput> {
    ao_core(scenario, realizations, cfg, init_poses, true, true)
}

/// Metrics of one scheme run on one scenario instance. Rates are always
/// evaluated against the true path sets with MMSE combining, regardless of
/// any PRV error injected during optimization.
#[derive(Debug, Clone)]
pub struct RunMetrics {
    pub scheme: Scheme,
    /// Final weighted sum rate, bps/Hz.
    pub wsr: f64,
    /// Weighted sum rate of the scheme's own initialization.
    pub initial_wsr: f64,
    pub per_ut_rates: Vec<f64>,
    pub outer_iterations: usize,
    pub wall_ms: f64,
    pub poses: Vec<AntennaPose>,
    pub trace: SolveTrace,
}

fn evaluate(
    scenario: &Scenario,
    paths: &PathSets,
    poses: &[AntennaPose],
    mode: Polarization,
) -> Result<(f64, Vec<f64>)> {
    let noise = scenario.config.normalized_noise();
    let weights = scenario.config.weights_or_ones();
    let h = assemble(poses, paths, scenario.config.wavelength, mode)?;
    let w = mmse_combiner(&h, noise)?;
    Ok((
        wsr(&h, &w, &weights, noise),
        rates(&h, &w, noise).as_slice().to_vec(),
    ))
}

/// Runs one scheme on one scenario instance. `seed` controls every random
/// choice of the run (initialization, offline training set, PRV error), so
/// identical inputs reproduce identical metrics.
pub fn run_scheme(
    scheme: Scheme,
    scenario: &Scenario,
    paths: &PathSets,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<RunMetrics> {
    let start = Instant::now();
    let mode = cfg.mode;
    let mut init_rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, STREAM_INIT));

    // Path sets seen by the optimizer: perturbed when a PRV error variance is
    // configured, the true ones otherwise.
    let opt_paths = if cfg.prv_error_var > 0.0 {
        let mut noise_rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, STREAM_PRV_NOISE));
        paths.perturb_prv(cfg.prv_error_var, &mut noise_rng)
    } else {
        paths.clone()
    };

    let (output, init_poses): (SolveOutput, Vec<AntennaPose>) = match scheme {
        Scheme::Fa => {
            let poses = fa_poses(scenario, mode);
            let fixed = SolverConfig {
                max_outer: 0,
                ..*cfg
            };
            let output = ao_core(
                scenario,
                std::slice::from_ref(paths),
                &fixed,
                poses.clone(),
                false,
                false,
            )?;
            (output, poses)
        }
        Scheme::SixDma => {
            let poses = initialize(scenario, &opt_paths, mode, &mut init_rng);
            let output = ao_core(
                scenario,
                std::slice::from_ref(&opt_paths),
                cfg,
                poses.clone(),
                true,
                true,
            )?;
            (output, poses)
        }
        Scheme::PositionOnly => {
            let fixed = fa_poses(scenario, mode);
            let mut poses = initialize(scenario, &opt_paths, mode, &mut init_rng);
            for (pose, fa) in poses.iter_mut().zip(&fixed) {
                pose.orientation = fa.orientation.clone();
            }
            let output = ao_core(
                scenario,
                std::slice::from_ref(&opt_paths),
                cfg,
                poses.clone(),
                true,
                false,
            )?;
            (output, poses)
        }
        Scheme::OrientationOnly => {
            let mut poses = initialize(scenario, &opt_paths, mode, &mut init_rng);
            for (pose, region) in poses.iter_mut().zip(&scenario.regions) {
                pose.position = region.min;
            }
            let output = ao_core(
                scenario,
                std::slice::from_ref(&opt_paths),
                cfg,
                poses.clone(),
                false,
                true,
            )?;
            (output, poses)
        }
        Scheme::Es => {
            let poses = fa_poses(scenario, mode);
            let output = es_baseline(scenario, &opt_paths, cfg, poses.clone())?;
            (output, poses)
        }
        Scheme::OfflineSixDma => {
            if cfg.offline_realizations == 0 {
                return Err(Error::InvalidConfig(
                    "offline design needs at least one training realization".into(),
                ));
            }
            let mut train_rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, STREAM_OFFLINE));
            let mut training = sample_realizations(scenario, cfg.offline_realizations, &mut train_rng);
            if cfg.prv_error_var > 0.0 {
                let mut noise_rng =
                    ChaCha12Rng::seed_from_u64(derive_seed(seed, STREAM_PRV_NOISE));
                training = training
                    .into_iter()
                    .map(|p| p.perturb_prv(cfg.prv_error_var, &mut noise_rng))
                    .collect();
            }
            let poses = initialize(scenario, &training[0], mode, &mut init_rng);
            let output = offline_solve(scenario, &training, cfg, poses.clone())?;
            (output, poses)
        }
    };

    let (final_wsr, per_ut) = evaluate(scenario, paths, &output.poses, mode)?;
    let (init_wsr, _) = evaluate(scenario, paths, &init_poses, mode)?;

    Ok(RunMetrics {
        scheme,
        wsr: final_wsr,
        initial_wsr: init_wsr,
        per_ut_rates: per_ut,
        outer_iterations: output.trace.outer_iterations(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        poses: output.poses,
        trace: output.trace,
    })
}

/// Frame type used by the solver: 3 rows, dynamic columns.
pub type OrientationFrame = Matrix3xX<f64>;
