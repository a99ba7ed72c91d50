//! Topology-aware contrastive graph classification.
//!
//! The crate is `no_std` (with `alloc`) and carries every numerical piece of
//! the pipeline:
//!
//! * [`graph`]: graphs, datasets, degree one-hot features, closeness centrality.
//! * [`spectral`]: combinatorial Laplacian, dense symmetric eigensolver, heat
//!   kernel signatures and a matrix-exponential cross-check.
//! * [`filtration`]: quantile thresholds and clique-lifted sublevel filtrations.
//! * [`persistence`]: boundary-matrix reduction over GF(2), union-find for
//!   dimension 0, Betti curves.
//! * [`vectorize`]: fixed-length topological vectors and z-score standardization.
//! * [`autodiff`]: a small reverse-mode tape over dense 2-D arrays, Adam, and
//!   a finite-difference gradient checker.
//! * [`model`], [`loss`], [`train`]: the dual-view network, its losses, and the
//!   cross-validated training harness.
//!
//! IO, file formats and the command-line front end live in the `topoclasp`
//! crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod autodiff;
mod error;
pub mod filtration;
pub mod graph;
pub mod loss;
mod math;
pub mod model;
pub mod persistence;
pub mod spectral;
pub mod train;
pub mod vectorize;

pub use error::{Error, Result};
