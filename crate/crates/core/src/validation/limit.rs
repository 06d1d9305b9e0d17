use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::limit_law::EtaDistribution;
use crate::model::{JumpRecord, ModelSpec};
use crate::scalar::Real;

/// One draw of the limit `Ũ_t + Ṽ_t` given the jumps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitSample<T> {
    pub gaussian: T,
    pub jump_part: T,
    pub total: T,
}

/// Variance `(2/3) c² ∫₀ᵗ σ²` of the Gaussian component.
pub fn gaussian_variance<T: Real>(spec: &ModelSpec<T>, t: T, c: T) -> T {
    T::lit(2.0 / 3.0) * c * c * spec.integrated_variance(t)
}

/// Conditional variance `(2/3) c² [X,X]_t` of the limit.
pub fn limit_variance<T: Real>(spec: &ModelSpec<T>, jumps: &[JumpRecord<T>], t: T, c: T) -> T {
    let jv: T = jumps.iter().filter(|j| j.time <= t).map(|j| j.size * j.size).sum();
    T::lit(2.0 / 3.0) * c * c * (spec.integrated_variance(t) + jv)
}

/// One draw with an independent Gaussian and independent `η_p` per jump.
pub fn draw_limit<T: Real, R: Rng + ?Sized>(
    spec: &ModelSpec<T>,
    jumps: &[JumpRecord<T>],
    t: T,
    c: T,
    eta: &EtaDistribution<T>,
    rng: &mut R,
) -> LimitSample<T> {
    let sd = gaussian_variance(spec, t, c).sqrt();
    let z: f64 = StandardNormal.sample(rng);
    let gaussian = sd * T::lit(z);
    let mut jump_part = T::zero();
    for j in jumps.iter().filter(|j| j.time <= t) {
        jump_part = jump_part + T::lit(2.0) * j.size * c * eta.sample(rng);
    }
    LimitSample { gaussian, jump_part, total: gaussian + jump_part }
}

/// `r` draws of `Z̃_t` for a fixed jump scenario.
pub fn sample_limit<T: Real, R: Rng + ?Sized>(
    spec: &ModelSpec<T>,
    jumps: &[JumpRecord<T>],
    t: T,
    c: T,
    r: usize,
    eta: &EtaDistribution<T>,
    rng: &mut R,
) -> Vec<T> {
    (0..r).map(|_| draw_limit(spec, jumps, t, c, eta, rng).total).collect()
}
