//! Set-indexed Gaussian processes on the rectangles of [0,1]^N.
//!
//! The crate simulates set-indexed Brownian motion, fractional Brownian
//! motion and the stationary Ornstein–Uhlenbeck process over finite families
//! of anchored rectangles, estimates Hölder regularity exponents in four
//! senses (pointwise, local, nested-pair/C-class, pointwise-continuity), and
//! checks the structural properties of indexing collections that drive those
//! regularity results: discretization-exponent fit, gap bounds, minimality,
//! admissibility, covering numbers, and the lower-layers counterexample.
//!
//! Modules:
//! - [`geometry`]: exact measures, distances, dyadic approximation, left
//!   neighbourhoods, lower layers;
//! - [`gaussian`]: covariance kernels, PSD-repaired factorization, joint
//!   sampling, inclusion–exclusion increments, the unboundedness demo;
//! - [`flows`]: increasing paths through the collection and the
//!   measure-parametrized projection onto one-parameter processes;
//! - [`regularity`]: exponent estimators and the moment-criterion harness;
//! - [`analysis`]: indexing-collection diagnostics.

pub mod analysis;
pub mod error;
pub mod flows;
pub mod gaussian;
pub mod geometry;
pub mod regularity;
pub mod rng;

pub use error::{Error, Result};
