//! Alternating-selection baseline over discrete pose grids.
//!
//! Full exhaustive search over the joint pose space is hopeless, so each AP's
//! position and orientation are selected alternately from uniform grids with
//! the other APs frozen, sweeping until a full pass changes nothing. Ties
//! break toward the incumbent, so the weighted sum rate never decreases.

use nalgebra::{Matrix3xX, Vector3};

use crate::channel::{assemble, channel_coeff_pol, AntennaPose, Polarization};
use crate::receiver::{mmse_combiner, rates, wsr};
use crate::scene::{BoxRegion, PathSets, Scenario};
use crate::solver::{SolveOutput, SolveTrace, SolverConfig};
use crate::Result;

/// Uniform position grid over a moving region with `round(count^(1/3))`
/// points per axis (a single point sits at the region corner).
pub fn position_grid(region: &BoxRegion, count: usize) -> Vec<Vector3<f64>> {
    let n = per_axis(count);
    let coords = |axis: usize| -> Vec<f64> {
        (0..n)
            .map(|i| {
                if n == 1 {
                    region.min[axis]
                } else {
                    region.min[axis]
                        + (region.max[axis] - region.min[axis]) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    };
    let (xs, ys, zs) = (coords(0), coords(1), coords(2));
    let mut grid = Vec::with_capacity(n * n * n);
    for &x in &xs {
        for &y in &ys {
            for &z in &zs {
                grid.push(Vector3::new(x, y, z));
            }
        }
    }
    grid
}

/// Uniform orientation grid over Z-Y-Z Euler angles mapped to the first
/// `1 + branches` columns of the rotation matrix; `round(count^(1/3))` points
/// per angle. A single point yields the identity frame.
pub fn orientation_grid(count: usize, mode: Polarization) -> Vec<Matrix3xX<f64>> {
    let n = per_axis(count);
    let cols = mode.frame_columns();
    let mut grid = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let rot = crate::aom_opt::euler_zyz(
                    std::f64::consts::TAU * i as f64 / n as f64,
                    std::f64::consts::PI * j as f64 / n as f64,
                    std::f64::consts::TAU * k as f64 / n as f64,
                );
                let columns: Vec<Vector3<f64>> =
                    (0..cols).map(|c| rot.column(c).into()).collect();
                grid.push(Matrix3xX::from_columns(&columns));
            }
        }
    }
    grid
}

fn per_axis(count: usize) -> usize {
    ((count.max(1) as f64).cbrt().round() as usize).max(1)
}

/// Alternating selection of each AP's position and orientation over the
/// configured grids, starting from `start_poses`.
pub fn es_baseline(
    scenario: &Scenario,
    paths: &PathSets,
    cfg: &SolverConfig,
    start_poses: Vec<AntennaPose>,
) -> Result<SolveOutput> {
    let lambda = scenario.config.wavelength;
    let noise = scenario.config.normalized_noise();
    let weights = scenario.config.weights_or_ones();
    let m_total = scenario.config.num_aps;
    let mode = cfg.mode;

    let mut poses = start_poses;
    let mut h = assemble(&poses, paths, lambda, mode)?;
    let mut w = mmse_combiner(&h, noise)?;
    let mut current = wsr(&h, &w, &weights, noise);

    let mut trace = SolveTrace::default();
    let push_snapshot = |trace: &mut SolveTrace,
                             value: f64,
                             h: &crate::channel::ChannelMatrix,
                             w: &crate::receiver::CombinerMatrix,
                             poses: &[AntennaPose]| {
        trace.wsr.push(value);
        trace.per_ut_rates.push(rates(h, w, noise).as_slice().to_vec());
        trace.poses.push(poses.to_vec());
    };
    push_snapshot(&mut trace, current, &h, &w, &poses);

    let rotations = orientation_grid(cfg.es_orientations, mode);

    // Evaluates a candidate pose for AP m without committing it.
    let try_pose = |h: &crate::channel::ChannelMatrix,
                    m: usize,
                    pose: &AntennaPose|
     -> Result<(crate::channel::ChannelMatrix, crate::receiver::CombinerMatrix, f64)> {
        let mut h_cand = h.clone();
        for (p, row) in mode.rows_of(m, m_total).into_iter().enumerate() {
            for k in 0..paths.num_uts() {
                h_cand[(row, k)] = channel_coeff_pol(pose, &paths[(m, k)], lambda, p);
            }
        }
        let w_cand = mmse_combiner(&h_cand, noise)?;
        let val = wsr(&h_cand, &w_cand, &weights, noise);
        Ok((h_cand, w_cand, val))
    };

    for _ in 0..cfg.es_max_sweeps {
        let mut changed = false;
        for m in 0..m_total {
            // Position selection with orientation frozen.
            let mut best = (current, None);
            for q in position_grid(&scenario.regions[m], cfg.es_positions) {
                let candidate = AntennaPose {
                    position: q,
                    orientation: poses[m].orientation.clone(),
                };
                let (h_cand, w_cand, val) = try_pose(&h, m, &candidate)?;
                if val > best.0 {
                    best = (val, Some((candidate, h_cand, w_cand)));
                }
            }
            if let (val, Some((pose, h_new, w_new))) = best {
                poses[m] = pose;
                h = h_new;
                w = w_new;
                current = val;
                changed = true;
            }

            // Orientation selection with position frozen.
            let mut best = (current, None);
            for rot in &rotations {
                let candidate = AntennaPose {
                    position: poses[m].position,
                    orientation: rot.clone(),
                };
                let (h_cand, w_cand, val) = try_pose(&h, m, &candidate)?;
                if val > best.0 {
                    best = (val, Some((candidate, h_cand, w_cand)));
                }
            }
            if let (val, Some((pose, h_new, w_new))) = best {
                poses[m] = pose;
                h = h_new;
                w = w_new;
                current = val;
                changed = true;
            }
        }
        push_snapshot(&mut trace, current, &h, &w, &poses);
        if !changed {
            break;
        }
    }

    trace.final_channel = (0..h.nrows())
        .map(|r| (0..h.ncols()).map(|c| [h[(r, c)].re, h[(r, c)].im]).collect())
        .collect();
    Ok(SolveOutput {
        poses,
        combiners: vec![w],
        trace,
    })
}
