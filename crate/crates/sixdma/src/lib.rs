//! Uplink weighted-sum-rate optimization for multi-AP networks whose access
//! points carry six-dimensional movable antennas (6DMAs): antennas whose 3D
//! position inside a local box and 3D orientation frame are both adjustable.
//!
//! The crate is organized around one pipeline:
//!
//! - [`scene`] draws reproducible deployments (APs, user terminals, hotspots,
//!   scatterers) and the per-link multipath descriptions.
//! - [`channel`] maps an antenna pose and a path set to a complex channel
//!   coefficient, and assembles the collective channel matrix for
//!   uni-polarized or dual-polarized antennas.
//! - [`receiver`] provides MMSE combining, SINR/rate evaluation, and the
//!   fractional-programming reformulation shared by both pose optimizers.
//! - [`apv_opt`] optimizes one antenna's position with a
//!   majorization-minimization surrogate and projected gradient steps.
//! - [`aom_opt`] optimizes one antenna's orientation on the Stiefel manifold
//!   with conjugate gradient, QR retraction, and Armijo line search.
//! - [`solver`] alternates the two block optimizers with MMSE combining,
//!   supports offline (statistical-CSI) design, dual polarization, and the
//!   benchmark schemes used in experiments.
//!
//! See the `book/` guide in the repository for worked narrative chapters; the
//! `sixdma` CLI (separate crate) drives parameter sweeps over this library.

pub mod aom_opt;
pub mod apv_opt;
pub mod channel;
mod error;
pub mod receiver;
pub mod scene;
pub mod solver;
pub(crate) mod serde_util;

pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type Complex = num_complex::Complex64;
