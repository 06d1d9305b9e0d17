//! Realized variance over the observation times, the true quadratic
//! variation and the standardized error statistic.

use crate::error::{config, Result};
use crate::model::{JumpRecord, ModelSpec};
use crate::path_sim::InternalPath;
use crate::scalar::Real;
use crate::scheme::{GridScheme, SampledPath};

/// `[X,X]_t` split into `∫₀ᵗ σ² ds` and `Σ ΔX²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QVDecomposition<T> {
    pub continuous: T,
    pub jump: T,
    pub total: T,
}

/// `ε⁻¹ (RV_t − [X,X]_t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardizedStat<T> {
    pub value: T,
    pub horizon: T,
    pub grid: GridScheme<T>,
}

/// Sum of squared increments over observations in `(0, t]`.
pub fn realized_variance<T: Real>(sampled: &SampledPath<T>, t: T) -> T {
    let obs = &sampled.observations;
    let mut rv = T::zero();
    for w in obs.windows(2) {
        if w[1].time > t {
            break;
        }
        let d = w[1].value - w[0].value;
        rv = rv + d * d;
    }
    rv
}

pub fn quadratic_variation<T: Real>(spec: &ModelSpec<T>, jumps: &[JumpRecord<T>], t: T) -> QVDecomposition<T> {
    let continuous = spec.integrated_variance(t);
    let jump = jumps.iter().filter(|j| j.time <= t).map(|j| j.size * j.size).sum();
    QVDecomposition { continuous, jump, total: continuous + jump }
}

pub fn standardized_stat<T: Real>(
    sampled: &SampledPath<T>,
    spec: &ModelSpec<T>,
    jumps: &[JumpRecord<T>],
    t: T,
    grid: &GridScheme<T>,
) -> StandardizedStat<T> {
    let rv = realized_variance(sampled, t);
    let qv = quadratic_variation(spec, jumps, t);
    StandardizedStat { value: (rv - qv.total) / grid.eps, horizon: t, grid: *grid }
}

/// `ε⁻¹ ([X,X]_t − [X,X]_{τ⁻(t)})`.
pub fn boundary_term<T: Real>(sampled: &SampledPath<T>, spec: &ModelSpec<T>, jumps: &[JumpRecord<T>], t: T) -> T {
    let tau = sampled.last_observation(t.min(sampled.horizon)).time;
    let a = quadratic_variation(spec, jumps, t).total;
    let b = quadratic_variation(spec, jumps, tau).total;
    (a - b) / sampled.grid.eps
}

/// Realized variance from `X_{j/n}`, `j = 1..⌊nt⌋`, and `√n (RV − QV)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquidistantRv<T> {
    pub rv: T,
    pub standardized: T,
}

/// Equidistant realized variance; the path must have a point at or
/// within `1e-9/n` before every `j/n`, and no gap wider than `1/n`.
pub fn equidistant_rv<T: Real>(path: &InternalPath<T>, spec: &ModelSpec<T>, n: usize, t: T) -> Result<EquidistantRv<T>> {
    if n == 0 {
        return Err(config("n must be positive"));
    }
    let nf = T::from_usize_lossy(n);
    let step = T::one() / nf;
    let slack = step * T::lit(1e-9);
    let m = (t * nf + T::lit(1e-9)).floor().to_usize().unwrap_or(0);
    let pts = &path.points;
    if pts.windows(2).any(|w| w[1].time - w[0].time > step + slack) {
        return Err(config("path resolution is coarser than 1/n"));
    }
    let mut rv = T::zero();
    let mut prev = pts[0].value;
    let mut k = 0usize;
    for j in 1..=m {
        let target = T::from_usize_lossy(j) * step + slack;
        while k + 1 < pts.len() && pts[k + 1].time <= target {
            k += 1;
        }
        let v = pts[k].value;
        rv = rv + (v - prev) * (v - prev);
        prev = v;
    }
    let end = T::from_usize_lossy(m) * step;
    let qv = quadratic_variation(spec, &path.jumps, end).total;
    Ok(EquidistantRv { rv, standardized: nf.sqrt() * (rv - qv) })
}
