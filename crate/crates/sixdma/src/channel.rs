//! Channel synthesis: antenna pose + path set -> complex channel coefficient.
//!
//! The coefficient for one link is `f(q)^H G(A) a`, where `f(q)` is the
//! position-dependent field-response vector (unit-modulus phases), `G(A)` the
//! diagonal per-path gain matrix set by the orientation, and `a` the
//! path-response vector at the AP reference point. A per-path gain combines
//! free-space loss with the effective aperture projection of the face normal
//! and the squared polarization match, under the square root.

use nalgebra::{DMatrix, DVector, Matrix3xX, Vector3};
use serde::{Deserialize, Serialize};

use crate::scene::{BoxRegion, PathSet, PathSets};
use crate::{Complex, Error, Result};

/// Antenna polarization mode. Dual-polarized antennas contribute two rows per
/// AP to the collective channel matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    Uni,
    Dual,
}

impl Polarization {
    /// Polarization branches per antenna.
    pub fn branches(self) -> usize {
        match self {
            Polarization::Uni => 1,
            Polarization::Dual => 2,
        }
    }

    /// Orientation frame columns: `[u, v]` or `[u, v1, v2]`.
    pub fn frame_columns(self) -> usize {
        1 + self.branches()
    }

    /// Channel-matrix rows owned by AP `m` out of `num_aps`.
    pub fn rows_of(self, m: usize, num_aps: usize) -> Vec<usize> {
        match self {
            Polarization::Uni => vec![m],
            Polarization::Dual => vec![m, num_aps + m],
        }
    }
}

impl std::str::FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uni" => Ok(Polarization::Uni),
            "dual" => Ok(Polarization::Dual),
            other => Err(Error::InvalidConfig(format!(
                "unknown polarization mode '{other}' (expected 'uni' or 'dual')"
            ))),
        }
    }
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Polarization::Uni => "uni",
            Polarization::Dual => "dual",
        })
    }
}

/// One AP's 6DMA state: position inside its moving region plus an orthonormal
/// orientation frame. Column 0 is the face normal `u`; the remaining column(s)
/// are receive polarization vectors in the antenna plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntennaPose {
    #[serde(with = "crate::serde_util::vec3")]
    pub position: Vector3<f64>,
    #[serde(with = "crate::serde_util::mat3x_cols")]
    pub orientation: Matrix3xX<f64>,
}

impl AntennaPose {
    pub fn uni(position: Vector3<f64>, u: Vector3<f64>, v: Vector3<f64>) -> Self {
        Self {
            position,
            orientation: Matrix3xX::from_columns(&[u, v]),
        }
    }

    pub fn dual(
        position: Vector3<f64>,
        u: Vector3<f64>,
        v1: Vector3<f64>,
        v2: Vector3<f64>,
    ) -> Self {
        Self {
            position,
            orientation: Matrix3xX::from_columns(&[u, v1, v2]),
        }
    }

    /// Face normal `u`.
    pub fn normal(&self) -> Vector3<f64> {
        self.orientation.column(0).into()
    }

    /// Receive polarization vector of branch `p` (0-based).
    pub fn polarization_vector(&self, p: usize) -> Vector3<f64> {
        self.orientation.column(1 + p).into()
    }

    /// `||A^T A - I||_F`; zero for a valid pose.
    pub fn orthonormality_defect(&self) -> f64 {
        orthonormality_defect(&self.orientation)
    }

    pub fn validate(&self, region: &BoxRegion) -> Result<()> {
        if !region.contains(&self.position) {
            return Err(Error::InvalidConfig(
                "antenna position outside its moving region".into(),
            ));
        }
        if self.orthonormality_defect() > 1e-10 {
            return Err(Error::InvalidConfig(
                "orientation frame is not orthonormal".into(),
            ));
        }
        Ok(())
    }
}

/// `||A^T A - I||_F` for an arbitrary frame.
pub fn orthonormality_defect(a: &Matrix3xX<f64>) -> f64 {
    let gram = a.transpose() * a;
    let n = gram.nrows();
    (gram - DMatrix::<f64>::identity(n, n)).norm()
}

/// Collective uplink channel matrix (`M x K`, or `2M x K` dual-polarized).
pub type ChannelMatrix = DMatrix<Complex>;

/// Field-response vector of a position: entry `l` is
/// `exp(j 2 pi d(psi_l)^T q / lambda)`. Every entry has unit modulus.
pub fn frv(q: &Vector3<f64>, paths: &PathSet, lambda: f64) -> DVector<Complex> {
    DVector::from_iterator(
        paths.len(),
        (0..paths.len()).map(|l| Complex::from_polar(1.0, frv_phase(q, paths, l, lambda))),
    )
}

#[inline]
fn frv_phase(q: &Vector3<f64>, paths: &PathSet, l: usize, lambda: f64) -> f64 {
    std::f64::consts::TAU * paths.wave_vector(l).dot(q) / lambda
}

/// Effective aperture loss `max(d^T u, 0)`: the projection of the antenna
/// face normal onto the arrival direction, zero for back incidence.
#[inline]
pub fn aperture_loss(u: &Vector3<f64>, d: &Vector3<f64>) -> f64 {
    d.dot(u).max(0.0)
}

/// Polarization loss `|e^T v|^2` between the incident field vector and the
/// receive polarization vector.
#[inline]
pub fn polarization_loss(v: &Vector3<f64>, e: &Vector3<f64>) -> f64 {
    let ip = e.dot(v);
    ip * ip
}

/// Diagonal of the per-path gain matrix for the plane frame `(u, v)`:
/// entry `l` is `lambda / (4 pi d_km) * sqrt(aperture * polarization)`.
pub fn gain_matrix(
    u: &Vector3<f64>,
    v: &Vector3<f64>,
    paths: &PathSet,
    lambda: f64,
) -> DVector<f64> {
    DVector::from_iterator(
        paths.len(),
        (0..paths.len()).map(|l| gain_entry(u, v, paths, l, lambda)),
    )
}

#[inline]
fn gain_entry(u: &Vector3<f64>, v: &Vector3<f64>, paths: &PathSet, l: usize, lambda: f64) -> f64 {
    let d = paths.wave_vector(l);
    let g = aperture_loss(u, &d) * polarization_loss(v, &paths.field[l]);
    lambda / (4.0 * std::f64::consts::PI * paths.distance) * g.sqrt()
}

/// Channel coefficient of polarization branch `p` for one link:
/// `sum_l conj(f_l(q)) g_l a_l`.
pub fn channel_coeff_pol(pose: &AntennaPose, paths: &PathSet, lambda: f64, p: usize) -> Complex {
    let u = pose.normal();
    let v = pose.polarization_vector(p);
    let mut h = Complex::ZERO;
    for l in 0..paths.len() {
        let g = gain_entry(&u, &v, paths, l, lambda);
        h += Complex::from_polar(1.0, -frv_phase(&pose.position, paths, l, lambda))
            * g
            * paths.prv[l];
    }
    h
}

/// Uni-polarized channel coefficient `f(q)^H G(A) a`.
pub fn channel_coeff(pose: &AntennaPose, paths: &PathSet, lambda: f64) -> Complex {
    channel_coeff_pol(pose, paths, lambda, 0)
}

/// Assembles the collective channel matrix from all poses and path sets.
/// Uni-polarized: `H[m, k]` is the coefficient of link (k, m). Dual-polarized:
/// rows `m` use frame `[u, v1]`, rows `M + m` use `[u, v2]`.
pub fn assemble(
    poses: &[AntennaPose],
    paths: &PathSets,
    lambda: f64,
    mode: Polarization,
) -> Result<ChannelMatrix> {
    let m_total = paths.num_aps();
    let k_total = paths.num_uts();
    if poses.len() != m_total {
        return Err(Error::DimensionMismatch(format!(
            "{} poses for {} APs",
            poses.len(),
            m_total
        )));
    }
    for pose in poses {
        if pose.orientation.ncols() != mode.frame_columns() {
            return Err(Error::DimensionMismatch(format!(
                "orientation has {} columns; {mode} mode needs {}",
                pose.orientation.ncols(),
                mode.frame_columns()
            )));
        }
    }
    let branches = mode.branches();
    let mut h = DMatrix::zeros(branches * m_total, k_total);
    for m in 0..m_total {
        for k in 0..k_total {
            for p in 0..branches {
                h[(p * m_total + m, k)] = channel_coeff_pol(&poses[m], &paths[(m, k)], lambda, p);
            }
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{generate_scenario, sample_all_paths, wave_vector, ScenarioConfig};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

    fn test_paths(l: usize, seed: u64) -> (PathSet, f64) {
        let cfg = ScenarioConfig {
            num_aps: 1,
            num_uts: 1,
            paths_per_link: l,
            rng_seed: seed,
            ..Default::default()
        };
        let scn = generate_scenario(&cfg).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let paths = sample_all_paths(&scn, &mut rng);
        (paths[(0, 0)].clone(), cfg.wavelength)
    }

    fn single_path(theta: f64, phi: f64, a: Complex, distance: f64) -> PathSet {
        let d = wave_vector(theta, phi);
        let (b1, _) = crate::scene::plane_basis(&d);
        PathSet {
            elevation: vec![theta],
            azimuth: vec![phi],
            prv: vec![a],
            field: vec![b1],
            distance,
        }
    }

    #[test]
    fn frv_reference_point_is_all_ones() {
        let (paths, lambda) = test_paths(5, 1);
        let f = frv(&Vector3::zeros(), &paths, lambda);
        for z in f.iter() {
            assert_relative_eq!(z.re, 1.0, epsilon = 1e-14);
            assert_relative_eq!(z.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn frv_half_wavelength_phase() {
        let lambda = 0.125;
        let paths = single_path(0.0, 0.0, Complex::ONE, 10.0);
        let f = frv(&Vector3::new(lambda / 2.0, 0.0, 0.0), &paths, lambda);
        assert_relative_eq!(f[0].re, -1.0, epsilon = 1e-12);
        assert_relative_eq!(f[0].im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn frv_entries_have_unit_modulus() {
        let (paths, lambda) = test_paths(5, 2);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..50 {
            let q = Vector3::new(
                rng.random_range(0.0..0.25),
                rng.random_range(0.0..0.25),
                rng.random_range(0.0..0.25),
            );
            for z in frv(&q, &paths, lambda).iter() {
                assert_relative_eq!(z.norm(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn frv_translation_multiplies_phases() {
        let (paths, lambda) = test_paths(4, 4);
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let q = Vector3::new(0.01, 0.02, 0.03);
        let delta = Vector3::new(
            rng.random_range(-0.05..0.05),
            rng.random_range(-0.05..0.05),
            rng.random_range(-0.05..0.05),
        );
        let f0 = frv(&q, &paths, lambda);
        let f1 = frv(&(q + delta), &paths, lambda);
        for l in 0..paths.len() {
            let shift = Complex::from_polar(
                1.0,
                std::f64::consts::TAU * paths.wave_vector(l).dot(&delta) / lambda,
            );
            assert!((f1[l] - f0[l] * shift).norm() < 1e-12);
        }
    }

    #[test]
    fn aperture_loss_cases() {
        let d = Vector3::new(1.0, 0.0, 0.0);
        assert_relative_eq!(aperture_loss(&d, &d), 1.0);
        assert_relative_eq!(aperture_loss(&-d, &d), 0.0);
        // 60 degrees off boresight
        let u = Vector3::new(0.5, 3f64.sqrt() / 2.0, 0.0);
        assert_relative_eq!(aperture_loss(&u, &d), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn polarization_loss_cases() {
        let e = Vector3::new(0.0, 1.0, 0.0);
        assert_relative_eq!(polarization_loss(&e, &e), 1.0);
        assert_relative_eq!(polarization_loss(&Vector3::new(0.0, 0.0, 1.0), &e), 0.0);
        // |e^T v| = 0.5 -> 0.25
        let v = Vector3::new(3f64.sqrt() / 2.0, 0.5, 0.0);
        assert_relative_eq!(polarization_loss(&v, &e), 0.25, epsilon = 1e-14);
    }

    #[test]
    fn gain_back_incidence_is_zero() {
        let paths = single_path(0.0, 0.0, Complex::ONE, 10.0);
        let u = Vector3::new(-1.0, 0.0, 0.0);
        let g = gain_matrix(&u, &paths.field[0], &paths, 0.125);
        assert_eq!(g[0], 0.0);
    }

    #[test]
    fn gain_unity_at_matched_pose_and_reference_distance() {
        let lambda = 0.125;
        let d_km = lambda / FOUR_PI;
        let paths = single_path(0.3, -0.7, Complex::ONE, d_km);
        let u = paths.wave_vector(0);
        let g = gain_matrix(&u, &paths.field[0], &paths, lambda);
        assert_relative_eq!(g[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn gain_halves_when_distance_doubles() {
        let (mut paths, lambda) = test_paths(3, 6);
        let u = paths.wave_vector(0);
        let v = paths.field[0];
        let g1 = gain_matrix(&u, &v, &paths, lambda);
        paths.distance *= 2.0;
        let g2 = gain_matrix(&u, &v, &paths, lambda);
        for l in 0..paths.len() {
            assert_relative_eq!(g2[l], g1[l] / 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn gain_entries_bounded_by_free_space_loss() {
        let (paths, lambda) = test_paths(5, 7);
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        for _ in 0..20 {
            let u = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            )
            .normalize();
            let v = crate::scene::plane_basis(&u).0;
            let g = gain_matrix(&u, &v, &paths, lambda);
            let cap = lambda / (FOUR_PI * paths.distance);
            for l in 0..paths.len() {
                assert!(g[l] >= 0.0 && g[l] <= cap + 1e-15);
            }
        }
    }

    #[test]
    fn coeff_reduces_to_prv_at_unit_gain() {
        let lambda = 0.125;
        let a = Complex::new(0.3, -0.4);
        let paths = single_path(0.5, 1.1, a, lambda / FOUR_PI);
        let pose = AntennaPose::uni(Vector3::zeros(), paths.wave_vector(0), paths.field[0]);
        let h = channel_coeff(&pose, &paths, lambda);
        assert!((h - a).norm() < 1e-12);
    }

    #[test]
    fn coeff_zero_when_all_paths_back_incident() {
        // All arrivals from the +x half-space; a face normal at -x sees
        // nothing.
        let lambda = 0.125;
        let angles = [(0.1, 0.2), (-0.3, 0.5), (0.4, -0.4)];
        let mut elevation = Vec::new();
        let mut azimuth = Vec::new();
        let mut field = Vec::new();
        for (theta, phi) in angles {
            elevation.push(theta);
            azimuth.push(phi);
            field.push(crate::scene::plane_basis(&wave_vector(theta, phi)).0);
        }
        let paths = PathSet {
            elevation,
            azimuth,
            prv: vec![Complex::new(1.0, 0.5); 3],
            field,
            distance: 20.0,
        };
        assert!(paths.wave_vectors().iter().all(|d| d.x > 0.0));
        let u = Vector3::new(-1.0, 0.0, 0.0);
        let pose = AntennaPose::uni(Vector3::zeros(), u, Vector3::y());
        assert_eq!(channel_coeff(&pose, &paths, lambda), Complex::ZERO);
    }

    #[test]
    fn coeff_matches_direct_sum_oracle() {
        let (paths, lambda) = test_paths(5, 10);
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..20 {
            let q = Vector3::new(
                rng.random_range(0.0..0.25),
                rng.random_range(0.0..0.25),
                rng.random_range(0.0..0.25),
            );
            let u = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            )
            .normalize();
            let v = crate::scene::plane_basis(&u).0;
            let pose = AntennaPose::uni(q, u, v);
            let h = channel_coeff(&pose, &paths, lambda);

            // Independent term-by-term sum.
            let mut oracle = Complex::ZERO;
            for l in 0..paths.len() {
                let d = paths.wave_vector(l);
                let g = lambda / (FOUR_PI * paths.distance)
                    * (d.dot(&u).max(0.0) * paths.field[l].dot(&v).powi(2)).sqrt();
                let phase = -std::f64::consts::TAU * d.dot(&q) / lambda;
                oracle += Complex::from_polar(1.0, phase) * g * paths.prv[l];
            }
            assert!((h - oracle).norm() < 1e-12);
        }
    }

    #[test]
    fn coeff_magnitude_invariant_to_position_single_path() {
        let lambda = 0.125;
        let paths = single_path(0.2, 0.4, Complex::new(0.7, 0.1), 25.0);
        let u = paths.wave_vector(0);
        let v = paths.field[0];
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let h0 = channel_coeff(&AntennaPose::uni(Vector3::zeros(), u, v), &paths, lambda);
        for _ in 0..10 {
            let q = Vector3::new(
                rng.random_range(0.0..0.25),
                rng.random_range(0.0..0.25),
                rng.random_range(0.0..0.25),
            );
            let h = channel_coeff(&AntennaPose::uni(q, u, v), &paths, lambda);
            assert_relative_eq!(h.norm(), h0.norm(), epsilon = 1e-12);
        }
    }

    #[test]
    fn assemble_single_link_reduces_to_coeff() {
        let cfg = ScenarioConfig {
            num_aps: 1,
            num_uts: 1,
            paths_per_link: 3,
            rng_seed: 21,
            ..Default::default()
        };
        let scn = generate_scenario(&cfg).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(22);
        let paths = sample_all_paths(&scn, &mut rng);
        let pose = AntennaPose::uni(
            Vector3::new(0.01, 0.02, 0.03),
            Vector3::x(),
            Vector3::y(),
        );
        let h = assemble(
            std::slice::from_ref(&pose),
            &paths,
            cfg.wavelength,
            Polarization::Uni,
        )
        .unwrap();
        assert_eq!(h.nrows(), 1);
        assert_eq!(h.ncols(), 1);
        assert_eq!(h[(0, 0)], channel_coeff(&pose, &paths[(0, 0)], cfg.wavelength));
    }

    #[test]
    fn assemble_dual_stacks_polarizations() {
        let cfg = ScenarioConfig {
            num_aps: 2,
            num_uts: 2,
            paths_per_link: 3,
            rng_seed: 31,
            ..Default::default()
        };
        let scn = generate_scenario(&cfg).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(32);
        let paths = sample_all_paths(&scn, &mut rng);
        let poses: Vec<_> = (0..2)
            .map(|_| {
                AntennaPose::dual(
                    Vector3::new(0.05, 0.05, 0.05),
                    Vector3::x(),
                    Vector3::y(),
                    Vector3::z(),
                )
            })
            .collect();
        let h = assemble(&poses, &paths, cfg.wavelength, Polarization::Dual).unwrap();
        assert_eq!(h.nrows(), 4);
        for m in 0..2 {
            for k in 0..2 {
                let h1 = channel_coeff_pol(&poses[m], &paths[(m, k)], cfg.wavelength, 0);
                let h2 = channel_coeff_pol(&poses[m], &paths[(m, k)], cfg.wavelength, 1);
                assert_eq!(h[(m, k)], h1);
                assert_eq!(h[(2 + m, k)], h2);
            }
        }
    }

    #[test]
    fn assemble_dual_second_branch_vanishes_when_cross_polarized() {
        // Every field vector equals e0; choosing v2 orthogonal to e0 zeroes
        // the second-polarization rows.
        let lambda = 0.125;
        let d = wave_vector(0.0, 0.0);
        let e0 = Vector3::new(0.0, 1.0, 0.0);
        let set = PathSet {
            elevation: vec![0.0],
            azimuth: vec![0.0],
            prv: vec![Complex::new(0.5, 0.5)],
            field: vec![e0],
            distance: 10.0,
        };
        let paths = PathSets::new(1, 1, vec![set]).unwrap();
        let pose = AntennaPose::dual(Vector3::zeros(), d, e0, d.cross(&e0));
        let h = assemble(std::slice::from_ref(&pose), &paths, lambda, Polarization::Dual).unwrap();
        assert!(h[(0, 0)].norm() > 0.0);
        assert_eq!(h[(1, 0)], Complex::ZERO);
    }

    #[test]
    fn assemble_permutation_covariance() {
        let cfg = ScenarioConfig {
            num_aps: 2,
            num_uts: 3,
            paths_per_link: 2,
            rng_seed: 41,
            ..Default::default()
        };
        let scn = generate_scenario(&cfg).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let paths = sample_all_paths(&scn, &mut rng);
        let poses: Vec<_> = (0..2)
            .map(|_| AntennaPose::uni(Vector3::zeros(), Vector3::x(), Vector3::y()))
            .collect();
        let h = assemble(&poses, &paths, cfg.wavelength, Polarization::Uni).unwrap();

        // Swap UTs 0 and 2 in the path table; columns must swap identically.
        let perm = [2usize, 1, 0];
        let mut sets = Vec::new();
        for m in 0..2 {
            for k in perm {
                sets.push(paths[(m, k)].clone());
            }
        }
        let swapped = PathSets::new(2, 3, sets).unwrap();
        let h2 = assemble(&poses, &swapped, cfg.wavelength, Polarization::Uni).unwrap();
        assert_eq!(h.column(0), h2.column(2));
        assert_eq!(h.column(2), h2.column(0));
        assert_eq!(h.column(1), h2.column(1));
    }

    #[test]
    fn orthonormality_defect_detects_bad_frames() {
        let good = AntennaPose::uni(Vector3::zeros(), Vector3::x(), Vector3::y());
        assert!(good.orthonormality_defect() < 1e-15);
        let bad = AntennaPose::uni(Vector3::zeros(), Vector3::x(), Vector3::x());
        assert!(bad.orthonormality_defect() > 0.5);
    }
}
