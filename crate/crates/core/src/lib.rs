//! Structure-preserving finite-difference solvers for the exponential
//! p-Laplacian crystal surface model on uniform Neumann grids in one and
//! two dimensions.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the common `f64` case.

pub mod error;
pub mod grid;
pub mod linalg;
pub mod operators;
pub mod scalar;
pub mod elliptic;
pub(crate) mod coupled;
pub mod stationary;
pub mod evolution;
pub mod verification;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Grid64 = grid::Grid<f64>;
pub type NodeField64 = grid::NodeField<f64>;
pub type EdgeField64 = grid::EdgeField<f64>;
pub type Params64 = operators::Params<f64>;
pub type SolverOptions64 = elliptic::SolverOptions<f64>;
pub type StationaryState64 = stationary::StationaryState<f64>;
pub type StationaryOptions64 = stationary::StationaryOptions<f64>;
pub type StationaryReport64 = stationary::StationaryReport<f64>;
pub type EvolutionConfig64 = evolution::EvolutionConfig<f64>;
pub type EvolutionRun64 = evolution::EvolutionRun<f64>;
pub type StepLedger64 = evolution::StepLedger<f64>;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
