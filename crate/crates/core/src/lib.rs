//! Covariance-distance analysis of molecular-dynamics trajectories.
//!
//! The crate turns per-particle time series (velocities, positions, or dipole
//! components) into block-Toeplitz covariance descriptors, measures Frobenius
//! distances between system states, embeds the resulting distance matrix with
//! PCA, and correlates the leading component with independently estimated
//! diffusion coefficients. A desk-scale Lennard-Jones engine produces the
//! trajectories and the diffusion estimates.
//!
//! All numerical code is generic over the scalar type through [`scalar::Real`]
//! (implemented for `f32` and `f64`); concrete `f64` aliases for the main
//! domain types live at the crate root.

pub mod covariance;
pub mod distance;
pub mod embedding;
pub mod error;
pub mod io;
pub mod linalg;
pub mod mdengine;
pub mod scalar;
pub mod timeseries;

pub use error::{Error, Result};
pub use scalar::Real;

/// Concrete aliases for the default working precision.
pub type ParticleSeries64 = timeseries::ParticleSeries<f64>;
pub type SegmentMatrix64 = timeseries::SegmentMatrix<f64>;
pub type NormalizationRecord64 = timeseries::NormalizationRecord<f64>;
pub type BlockToeplitzCov64 = covariance::BlockToeplitzCov<f64>;
pub type SpdDiagnostics64 = covariance::SpdDiagnostics<f64>;
pub type StateDescriptor64 = distance::StateDescriptor<f64>;
pub type DistanceMatrix64 = distance::DistanceMatrix<f64>;
pub type DistanceHistogram64 = distance::DistanceHistogram<f64>;
pub type Embedding64 = embedding::Embedding<f64>;
pub type LinearFit64 = embedding::LinearFit<f64>;
pub type SimConfig64 = mdengine::SimConfig<f64>;

/// Single-precision aliases, for when memory outweighs accuracy.
pub type ParticleSeries32 = timeseries::ParticleSeries<f32>;
pub type SegmentMatrix32 = timeseries::SegmentMatrix<f32>;
pub type BlockToeplitzCov32 = covariance::BlockToeplitzCov<f32>;
pub type DistanceMatrix32 = distance::DistanceMatrix<f32>;
