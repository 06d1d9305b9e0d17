//! Endogenous grid-exit sampling of jump diffusions: limit laws of the
//! sampling error, path simulators, the observation scheme, realized
//! variance estimators and a Monte Carlo validation harness.
//!
//! The numerical core is generic over [`scalar::Real`] (`f32` or `f64`).
//! The aliases below fix the scalar type to `f64`; the `*32` variants use
//! `f32`.

pub mod error;
pub mod estimators;
pub mod limit_law;
pub mod model;
pub mod path_sim;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod scheme;
pub mod tabulate;
pub mod validation;

pub use error::{Error, Result};
pub use path_sim::SchemeKind;
pub use scalar::Real;
pub use scheme::Cause;

pub type ModelSpec = model::ModelSpec<f64>;
pub type Curve = model::Curve<f64>;
pub type JumpSpec = model::JumpSpec<f64>;
pub type JumpSizeLaw = model::JumpSizeLaw<f64>;
pub type JumpRecord = model::JumpRecord<f64>;
pub type GridScheme = scheme::GridScheme<f64>;
pub type SampledPath = scheme::SampledPath<f64>;
pub type InternalPath = path_sim::InternalPath<f64>;
pub type LimitLaws = limit_law::LimitLaws<f64>;
pub type EtaDistribution = limit_law::EtaDistribution<f64>;
pub type ExitTimeDistribution = limit_law::ExitTimeDistribution<f64>;
pub type RenewalAgeDistribution = limit_law::RenewalAgeDistribution<f64>;
pub type QVDecomposition = estimators::QVDecomposition<f64>;
pub type StandardizedStat = estimators::StandardizedStat<f64>;
pub type Experiment = validation::Experiment<f64>;

pub type ModelSpec32 = model::ModelSpec<f32>;
pub type GridScheme32 = scheme::GridScheme<f32>;
pub type SampledPath32 = scheme::SampledPath<f32>;
pub type InternalPath32 = path_sim::InternalPath<f32>;
pub type LimitLaws32 = limit_law::LimitLaws<f32>;
pub type EtaDistribution32 = limit_law::EtaDistribution<f32>;
pub type ExitTimeDistribution32 = limit_law::ExitTimeDistribution<f32>;
