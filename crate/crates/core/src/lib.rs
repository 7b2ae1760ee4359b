//! Natural dimension of continuous piecewise-linear iterated function systems.
//!
//! Two independent routes to the natural pressure are provided: direct
//! enumeration of cylinder lengths ([`pressure`]) and the spectral radius of
//! the matrix attached to the Markov diagram ([`markov`]). The [`orbit`]
//! module builds the orbit graph of critical points and searches the
//! generated self-similar system for exact overlaps, and [`lab`] runs
//! perturbation experiments on top of all of it.

mod error;

pub mod config;
pub mod exec;
pub mod export;
pub mod ifs;
pub mod lab;
pub mod markov;
pub mod number;
pub mod orbit;
pub mod pressure;
pub mod systems;

pub use error::{Error, Result, Violation};
pub use exec::{Budget, Exec};
pub use ifs::{
    attractor_cover, cplifs_distance, cylinder, generated_self_similar, validate, Branch, Closeness, Cplifs,
    Interval, PlMap, RawMap, SimilarityMap,
};
pub use number::Number;

/// Tolerance for point coincidence.
pub const EQ_TOL: f64 = 1e-9;
