//! Graph-signal estimators for recovering a random graph signal `x` from
//! nonlinear measurements `y = g(L, x) + w`.
//!
//! The crate is organized around a [`SpectralGraph`] (Laplacian plus its
//! eigendecomposition), parametrized graph filters ([`FilterSpec`]), training
//! moments ([`SampleMoments`]) and the fitted affine estimators
//! ([`LinearEstimator`]). The [`power`] module carries the AC power-flow
//! measurement model and the priors used in the experiments.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` / `*32` aliases below name the common instantiations.

pub mod audit;
pub mod error;
pub mod estimators;
pub mod filters;
pub mod graph;
pub mod linalg;
pub mod model;
pub mod moments;
pub mod power;
pub mod rng;
mod scalar;

pub use error::{Error, Result};
pub use estimators::{FittedGspEstimator, LinearEstimator};
pub use filters::{FilterSpec, FrequencyResponse};
pub use graph::{Cutoff, ReducedSpectrum, SpectralGraph, VertexMap, WeightedGraph};
pub use model::{Measurement, MeasurementModel, NoiseModel, Prior};
pub use moments::{SampleMoments, TrainingSet};
pub use scalar::Scalar;

pub use nalgebra::{DMatrix, DVector};

pub type WeightedGraph64 = WeightedGraph<f64>;
pub type WeightedGraph32 = WeightedGraph<f32>;
pub type SpectralGraph64 = SpectralGraph<f64>;
pub type SpectralGraph32 = SpectralGraph<f32>;
pub type FilterSpec64 = FilterSpec<f64>;
pub type FilterSpec32 = FilterSpec<f32>;
pub type SampleMoments64 = SampleMoments<f64>;
pub type SampleMoments32 = SampleMoments<f32>;
pub type LinearEstimator64 = LinearEstimator<f64>;
pub type LinearEstimator32 = LinearEstimator<f32>;
pub type MeasurementModel64 = MeasurementModel<f64>;
pub type MeasurementModel32 = MeasurementModel<f32>;
pub type AcGridModel64 = power::AcGridModel<f64>;
pub type AcGridModel32 = power::AcGridModel<f32>;
