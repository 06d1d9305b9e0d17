//! Limit laws of the grid-exit scheme: the overshoot density `h`, the exit
//! time law `F`, the renewal age law `G` and the confined Brownian kernel.

mod eta;
mod exit_time;
mod kernel;
mod renewal;
pub mod series;

use std::sync::Arc;

pub use eta::{eval_h, eval_h_cdf, eval_h_closed, EtaDistribution};
pub use exit_time::ExitTimeDistribution;
pub use kernel::{confined_cdf, confined_kernel, confined_quantile, sample_confined_position, series_switch_gap};
pub use renewal::RenewalAgeDistribution;

use crate::error::Result;
use crate::scalar::Real;

/// Default absolute tolerance of every series and quadrature.
pub const DEFAULT_TOL: f64 = 1e-8;

/// All dimensionless tables, built once and shared read-only by workers.
#[derive(Debug, Clone)]
pub struct LimitLaws<T> {
    pub tol: T,
    pub eta: EtaDistribution<T>,
    pub renewal: RenewalAgeDistribution<T>,
}

impl<T: Real> LimitLaws<T> {
    pub fn build(tol: T) -> Result<Self> {
        Ok(Self { tol, eta: EtaDistribution::build(tol)?, renewal: RenewalAgeDistribution::unit(tol)? })
    }

    pub fn shared(tol: T) -> Result<Arc<Self>> {
        Self::build(tol).map(Arc::new)
    }

    /// The unit exit-time law (`c_half = σ = 1`).
    pub fn exit(&self) -> &ExitTimeDistribution<T> {
        self.renewal.exit_law()
    }
}
