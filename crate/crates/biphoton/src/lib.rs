//! Wave-optics simulation of the transverse two-photon amplitude of SPDC
//! photon pairs in one transverse dimension, with propagation through
//! lens/free-space systems and three entanglement quantifiers: the Fedorov
//! ratio, the SVD Schmidt number, and the inversion-interferometer visibility
//! estimator.
//!
//! Everything is a pure function of immutable inputs; states are safe to share
//! across threads for parallel parameter sweeps.

// validation deliberately writes `!(x > 0.0)` so NaN fails closed
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amplitude;
pub mod error;
pub mod grid;
pub mod interferometer;
pub mod measures;
pub mod optics;
pub mod schmidt;
pub mod spdc;

pub use amplitude::{Distribution1D, Photon, TwoPhotonAmplitude};
pub use error::{Error, Result};
pub use grid::{Axis, Domain};

/// Cap the worker threads of the linear-algebra backend. Sweep-level
/// parallelism is the caller's business (rayon); this only affects the
/// factorizations inside.
pub fn set_worker_threads(n: usize) {
    faer::set_global_parallelism(faer::Par::rayon(n));
}
