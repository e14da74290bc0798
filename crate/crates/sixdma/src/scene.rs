//! Reproducible random deployments and per-link multipath descriptions.
//!
//! A [`Scenario`] holds the fixed geometry of one experiment: AP reference
//! points on a ring, user terminals drawn into two hotspot discs plus a
//! uniform remainder, scatterer positions for the non-line-of-sight paths,
//! and one cubic antenna moving region per AP. [`sample_paths`] then draws
//! the Rician path-response vector and per-path polarization field vectors
//! for a single (UT, AP) link.
//!
//! All angles are radians, all distances meters. Angles of arrival are
//! expressed in each AP's local frame, whose axes are taken parallel to the
//! global frame at the AP reference point (one vertex of the moving region).
//! Everything is deterministic given the configured seed.

use nalgebra::Vector3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Complex, Error, Result};

/// Arrival direction for elevation `theta` and azimuth `phi`:
/// `[cos(theta)cos(phi), cos(theta)sin(phi), sin(theta)]`. Unit norm for any
/// input.
pub fn wave_vector(theta: f64, phi: f64) -> Vector3<f64> {
    Vector3::new(
        theta.cos() * phi.cos(),
        theta.cos() * phi.sin(),
        theta.sin(),
    )
}

/// Elevation/azimuth of a unit direction, inverse of [`wave_vector`].
pub fn direction_angles(dir: &Vector3<f64>) -> (f64, f64) {
    let theta = dir.z.clamp(-1.0, 1.0).asin();
    let phi = dir.y.atan2(dir.x);
    (theta, phi)
}

/// Ground-plane hotspot disc holding a share of the user terminals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HotspotDisc {
    pub center: [f64; 2],
    pub radius: f64,
}

impl HotspotDisc {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        dx * dx + dy * dy <= self.radius * self.radius
    }
}

/// Axis-aligned cuboid, used for the scatterer volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cuboid {
    #[serde(with = "crate::serde_util::vec3")]
    pub min: Vector3<f64>,
    #[serde(with = "crate::serde_util::vec3")]
    pub max: Vector3<f64>,
}

impl Cuboid {
    pub fn is_valid(&self) -> bool {
        self.min.x < self.max.x && self.min.y < self.max.y && self.min.z < self.max.z
    }
}

/// One AP's cubic antenna moving region in its local frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    #[serde(with = "crate::serde_util::vec3")]
    pub min: Vector3<f64>,
    #[serde(with = "crate::serde_util::vec3")]
    pub max: Vector3<f64>,
}

impl BoxRegion {
    pub fn contains(&self, q: &Vector3<f64>) -> bool {
        (0..3).all(|i| q[i] >= self.min[i] && q[i] <= self.max[i])
    }

    /// Componentwise clamp onto the region.
    pub fn clamp(&self, q: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(
            q.x.clamp(self.min.x, self.max.x),
            q.y.clamp(self.min.y, self.max.y),
            q.z.clamp(self.min.z, self.max.z),
        )
    }

    pub fn center(&self) -> Vector3<f64> {
        (self.min + self.max) * 0.5
    }
}

/// Full experiment configuration. Defaults mirror the standard simulation
/// setup: 8 APs, 6 UTs, 5 paths per link, 2.4 GHz carrier (0.125 m
/// wavelength), a `2λ` cubic moving region, Rician factor 10, -80 dBm noise,
/// and 10 dBm transmit power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Number of APs (M).
    pub num_aps: usize,
    /// Number of user terminals (K).
    pub num_uts: usize,
    /// Paths per (UT, AP) link (L), identical for every link.
    pub paths_per_link: usize,
    /// Carrier wavelength in meters.
    pub wavelength: f64,
    /// Rician factor (linear LoS-to-NLoS power ratio).
    pub rician_factor: f64,
    /// Side of each cubic moving region, in multiples of the wavelength.
    pub region_side: f64,
    /// Average noise power in dBm.
    pub noise_dbm: f64,
    /// Per-UT transmit power in dBm.
    pub tx_power_dbm: f64,
    /// Per-UT rate weights; empty means all ones.
    pub weights: Vec<f64>,
    /// Two disjoint hotspot discs on the ground plane.
    pub hotspots: [HotspotDisc; 2],
    /// Fraction of UTs drawn inside the hotspots.
    pub hotspot_fraction: f64,
    /// Scatterer volume for NLoS paths.
    pub scatterer_volume: Cuboid,
    /// Radius of the AP ring.
    pub ap_ring_radius: f64,
    /// Height of the AP reference points.
    pub ap_height: f64,
    /// Height of the UT antennas.
    pub ut_height: f64,
    /// Half side of the square deployment area for non-hotspot UTs.
    pub deployment_half_extent: f64,
    /// Seed for all scenario-level randomness.
    pub rng_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            num_aps: 8,
            num_uts: 6,
            paths_per_link: 5,
            wavelength: 0.125,
            rician_factor: 10.0,
            region_side: 2.0,
            noise_dbm: -80.0,
            tx_power_dbm: 10.0,
            weights: Vec::new(),
            hotspots: [
                HotspotDisc {
                    center: [-20.0, -20.0],
                    radius: 5.0,
                },
                HotspotDisc {
                    center: [20.0, 20.0],
                    radius: 5.0,
                },
            ],
            hotspot_fraction: 0.8,
            scatterer_volume: Cuboid {
                min: Vector3::new(-50.0, -50.0, 0.0),
                max: Vector3::new(50.0, 50.0, 20.0),
            },
            ap_ring_radius: 40.0,
            ap_height: 5.0,
            ut_height: 1.5,
            deployment_half_extent: 50.0,
            rng_seed: 0,
        }
    }
}

impl ScenarioConfig {
    /// Noise power normalized by the transmit power, `sigma^2 / p` in linear
    /// scale.
    pub fn normalized_noise(&self) -> f64 {
        10f64.powf((self.noise_dbm - self.tx_power_dbm) / 10.0)
    }

    /// Moving-region side in meters.
    pub fn region_side_m(&self) -> f64 {
        self.region_side * self.wavelength
    }

    /// Per-UT weights, defaulting to all ones when unset.
    pub fn weights_or_ones(&self) -> Vec<f64> {
        if self.weights.is_empty() {
            vec![1.0; self.num_uts]
        } else {
            self.weights.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_aps == 0 || self.num_uts == 0 || self.paths_per_link == 0 {
            return Err(Error::InvalidConfig(
                "num_aps, num_uts, and paths_per_link must all be at least 1".into(),
            ));
        }
        if !(self.wavelength > 0.0) {
            return Err(Error::InvalidConfig("wavelength must be positive".into()));
        }
        if !(self.rician_factor > 0.0) {
            return Err(Error::InvalidConfig(
                "rician_factor must be positive".into(),
            ));
        }
        if !(self.region_side > 0.0) {
            return Err(Error::InvalidConfig("region_side must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.hotspot_fraction) {
            return Err(Error::InvalidConfig(
                "hotspot_fraction must lie in [0, 1]".into(),
            ));
        }
        if !self.weights.is_empty() {
            if self.weights.len() != self.num_uts {
                return Err(Error::InvalidConfig(format!(
                    "got {} weights for {} UTs",
                    self.weights.len(),
                    self.num_uts
                )));
            }
            if self.weights.iter().any(|w| !(*w > 0.0)) {
                return Err(Error::InvalidConfig(
                    "weights must be strictly positive".into(),
                ));
            }
        }
        let [a, b] = self.hotspots;
        let dx = a.center[0] - b.center[0];
        let dy = a.center[1] - b.center[1];
        if (dx * dx + dy * dy).sqrt() < a.radius + b.radius {
            return Err(Error::InvalidConfig(
                "hotspot sub-regions must not overlap".into(),
            ));
        }
        if !self.scatterer_volume.is_valid() {
            return Err(Error::InvalidConfig(
                "scatterer_volume must satisfy min < max per axis".into(),
            ));
        }
        Ok(())
    }
}

/// Multipath description of one (UT, AP) link: per-path angles of arrival,
/// the complex path-response vector at the AP reference point, per-path unit
/// field (polarization) vectors orthogonal to their arrival directions, and
/// the link distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    pub elevation: Vec<f64>,
    pub azimuth: Vec<f64>,
    #[serde(with = "crate::serde_util::complex_list")]
    pub prv: Vec<Complex>,
    #[serde(with = "crate::serde_util::vec3_list")]
    pub field: Vec<Vector3<f64>>,
    pub distance: f64,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.prv.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prv.is_empty()
    }

    pub fn wave_vector(&self, l: usize) -> Vector3<f64> {
        wave_vector(self.elevation[l], self.azimuth[l])
    }

    pub fn wave_vectors(&self) -> Vec<Vector3<f64>> {
        (0..self.len()).map(|l| self.wave_vector(l)).collect()
    }
}

/// Path sets for every (AP, UT) pair, indexed as `paths[(m, k)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSets {
    num_aps: usize,
    num_uts: usize,
    sets: Vec<PathSet>,
}

impl PathSets {
    /// Builds a path table from `num_aps * num_uts` sets in AP-major order.
    pub fn new(num_aps: usize, num_uts: usize, sets: Vec<PathSet>) -> Result<Self> {
        if sets.len() != num_aps * num_uts {
            return Err(Error::DimensionMismatch(format!(
                "{} path sets for {num_aps} APs x {num_uts} UTs",
                sets.len()
            )));
        }
        Ok(Self {
            num_aps,
            num_uts,
            sets,
        })
    }

    pub fn num_aps(&self) -> usize {
        self.num_aps
    }

    pub fn num_uts(&self) -> usize {
        self.num_uts
    }

    /// Returns a copy with every path-response vector replaced by `a - n`,
    /// `n ~ CN(0, error_var)` i.i.d. per entry. Used for the imperfect-CSI
    /// experiments; geometry and field vectors are untouched.
    pub fn perturb_prv(&self, error_var: f64, rng: &mut ChaCha12Rng) -> PathSets {
        let mut out = self.clone();
        if error_var <= 0.0 {
            return out;
        }
        let comp = Normal::new(0.0, (error_var / 2.0).sqrt()).expect("valid std");
        for set in &mut out.sets {
            for a in &mut set.prv {
                *a -= Complex::new(comp.sample(rng), comp.sample(rng));
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for PathSets {
    type Output = PathSet;

    fn index(&self, (m, k): (usize, usize)) -> &PathSet {
        &self.sets[m * self.num_uts + k]
    }
}

/// Generated deployment geometry; immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub config: ScenarioConfig,
    #[serde(with = "crate::serde_util::vec3_list")]
    pub ap_positions: Vec<Vector3<f64>>,
    #[serde(with = "crate::serde_util::vec3_list")]
    pub ut_positions: Vec<Vector3<f64>>,
    /// `scatterers[k]` holds the L-1 scatterer positions feeding UT k's NLoS
    /// paths, shared across APs.
    #[serde(with = "crate::serde_util::vec3_list2")]
    pub scatterers: Vec<Vec<Vector3<f64>>>,
    pub regions: Vec<BoxRegion>,
}

impl Scenario {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }
}

/// Mixes a base seed with a stream tag so that independent random streams
/// (scenario, channels, initialization, ...) never overlap.
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = base ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sample_in_disc(disc: &HotspotDisc, rng: &mut ChaCha12Rng) -> (f64, f64) {
    let r = disc.radius * rng.random::<f64>().sqrt();
    let t = rng.random_range(0.0..std::f64::consts::TAU);
    (disc.center[0] + r * t.cos(), disc.center[1] + r * t.sin())
}

/// Draws the deployment for `cfg`. APs sit on a ring (deterministic); UTs
/// fall in a hotspot with probability `hotspot_fraction` (the disc chosen
/// uniformly) and uniformly outside both discs otherwise; scatterers are
/// uniform in the configured cuboid.
pub fn generate_scenario(cfg: &ScenarioConfig) -> Result<Scenario> {
    cfg.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(cfg.rng_seed, STREAM_SCENARIO));

    let ap_positions: Vec<Vector3<f64>> = (0..cfg.num_aps)
        .map(|m| {
            let angle = std::f64::consts::TAU * m as f64 / cfg.num_aps as f64;
            Vector3::new(
                cfg.ap_ring_radius * angle.cos(),
                cfg.ap_ring_radius * angle.sin(),
                cfg.ap_height,
            )
        })
        .collect();

    let mut ut_positions = Vec::with_capacity(cfg.num_uts);
    for _ in 0..cfg.num_uts {
        let (x, y) = if rng.random::<f64>() < cfg.hotspot_fraction {
            let disc = &cfg.hotspots[rng.random_range(0..2usize)];
            sample_in_disc(disc, &mut rng)
        } else {
            let e = cfg.deployment_half_extent;
            let mut attempts = 0;
            loop {
                let x = rng.random_range(-e..e);
                let y = rng.random_range(-e..e);
                if !cfg.hotspots.iter().any(|h| h.contains(x, y)) {
                    break (x, y);
                }
                attempts += 1;
                if attempts > 10_000 {
                    return Err(Error::InvalidConfig(
                        "hotspots cover the whole deployment area".into(),
                    ));
                }
            }
        };
        ut_positions.push(Vector3::new(x, y, cfg.ut_height));
    }

    let vol = &cfg.scatterer_volume;
    let scatterers: Vec<Vec<Vector3<f64>>> = (0..cfg.num_uts)
        .map(|_| {
            (0..cfg.paths_per_link.saturating_sub(1))
                .map(|_| {
                    Vector3::new(
                        rng.random_range(vol.min.x..vol.max.x),
                        rng.random_range(vol.min.y..vol.max.y),
                        rng.random_range(vol.min.z..vol.max.z),
                    )
                })
                .collect()
        })
        .collect();

    let side = cfg.region_side_m();
    let regions = vec![
        BoxRegion {
            min: Vector3::zeros(),
            max: Vector3::new(side, side, side),
        };
        cfg.num_aps
    ];

    Ok(Scenario {
        config: cfg.clone(),
        ap_positions,
        ut_positions,
        scatterers,
        regions,
    })
}

const STREAM_SCENARIO: u64 = 1;

/// Unit vector drawn uniformly from the plane orthogonal to `d`.
fn random_field_vector(d: &Vector3<f64>, rng: &mut ChaCha12Rng) -> Vector3<f64> {
    let basis = plane_basis(d);
    let t = rng.random_range(0.0..std::f64::consts::TAU);
    basis.0 * t.cos() + basis.1 * t.sin()
}

/// Orthonormal basis of the plane orthogonal to unit vector `d`.
pub fn plane_basis(d: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    // Cross against the axis least aligned with d to avoid degeneracy.
    let axis = if d.x.abs() <= d.y.abs() && d.x.abs() <= d.z.abs() {
        Vector3::x()
    } else if d.y.abs() <= d.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let b1 = d.cross(&axis).normalize();
    let b2 = d.cross(&b1);
    (b1, b2)
}

/// Draws the multipath description of link (UT `k`, AP `m`). Path 0 is the
/// line-of-sight path with its angles fixed by AP/UT geometry; paths `1..L`
/// arrive from UT k's scatterers. The LoS path response is `CN(0, chi/(1+chi))`
/// and each NLoS response `CN(0, 1/((L-1)(chi+1)))`, so the expected total
/// power is one for L > 1. Each field vector is uniform on the circle of unit
/// vectors orthogonal to its arrival direction.
pub fn sample_paths(scenario: &Scenario, k: usize, m: usize, rng: &mut ChaCha12Rng) -> PathSet {
    let cfg = &scenario.config;
    let chi = cfg.rician_factor;
    let l_total = cfg.paths_per_link;
    let ap = &scenario.ap_positions[m];
    let ut = &scenario.ut_positions[k];

    let mut elevation = Vec::with_capacity(l_total);
    let mut azimuth = Vec::with_capacity(l_total);
    let mut prv = Vec::with_capacity(l_total);
    let mut field = Vec::with_capacity(l_total);

    let los_var = chi / (1.0 + chi);
    let nlos_var = if l_total > 1 {
        1.0 / ((l_total as f64 - 1.0) * (chi + 1.0))
    } else {
        0.0
    };

    for l in 0..l_total {
        let dir = if l == 0 {
            (ut - ap).normalize()
        } else {
            (scenario.scatterers[k][l - 1] - ap).normalize()
        };
        let (theta, phi) = direction_angles(&dir);
        // Reconstructed wave vector, so the stored angles and field vector
        // are exactly orthogonal.
        let d = wave_vector(theta, phi);
        let var = if l == 0 { los_var } else { nlos_var };
        let comp = Normal::new(0.0, (var / 2.0).sqrt()).expect("valid std");
        elevation.push(theta);
        azimuth.push(phi);
        prv.push(Complex::new(comp.sample(rng), comp.sample(rng)));
        field.push(random_field_vector(&d, rng));
    }

    PathSet {
        elevation,
        azimuth,
        prv,
        field,
        distance: (ut - ap).norm(),
    }
}

/// Draws path sets for every (AP, UT) pair, AP-major order.
pub fn sample_all_paths(scenario: &Scenario, rng: &mut ChaCha12Rng) -> PathSets {
    let m_total = scenario.config.num_aps;
    let k_total = scenario.config.num_uts;
    let mut sets = Vec::with_capacity(m_total * k_total);
    for m in 0..m_total {
        for k in 0..k_total {
            sets.push(sample_paths(scenario, k, m, rng));
        }
    }
    PathSets {
        num_aps: m_total,
        num_uts: k_total,
        sets,
    }
}
