//! Monte Carlo harness: replications, the limit sampler, KS distances and
//! convergence sweeps.

mod harness;
mod ks;
mod limit;

pub use harness::{
    convergence_sweep, ks_trend_ok, replicate, run_replications, EpsSummary, Experiment, ReplicationRecord, Thresholds,
    ValidationReport, MIN_REPLICATIONS,
};
pub use ks::{empirical_cdf, ks_one_sample, ks_two_sample};
pub use limit::{draw_limit, gaussian_variance, limit_variance, sample_limit, LimitSample};
