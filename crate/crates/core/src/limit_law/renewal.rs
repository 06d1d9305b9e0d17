use rand::Rng;

use super::exit_time::ExitTimeDistribution;
use super::series;
use crate::error::Result;
use crate::quadrature;
use crate::scalar::Real;
use crate::tabulate::{ExpTail, TabulatedCdf, TABLE_NODES};

const UNIT_TABLE_END: f64 = 16.0;

/// Stationary age law `G(z) = (σ²/c²) ∫₀ᶻ (1 − F(u)) du` of the renewal
/// process of grid exits.
#[derive(Debug, Clone)]
pub struct RenewalAgeDistribution<T> {
    exit: ExitTimeDistribution<T>,
    table: TabulatedCdf<T>,
}

/// `∫₀ᶻ P(S > u) du` for the unit law by adaptive quadrature, split at the
/// series switch.
fn integrated_survival<T: Real>(z: T, tol: T) -> T {
    let sw = T::lit(series::Z_SWITCH);
    let stol = tol * T::lit(1e-2);
    if z <= sw {
        return quadrature::integrate(|u| series::exit_survival_unit(u, stol), T::zero(), z, tol).value;
    }
    let head = quadrature::integrate(|u| series::exit_survival_unit(u, stol), T::zero(), sw, tol * T::lit(0.5));
    let body = quadrature::integrate(|u| series::exit_survival_spectral(u, stol), sw, z, tol * T::lit(0.5));
    head.value + body.value
}

impl<T: Real> RenewalAgeDistribution<T> {
    pub fn new(exit: ExitTimeDistribution<T>) -> Result<Self> {
        let tol = exit.tol();
        let end = T::lit(UNIT_TABLE_END);
        let step = end / T::from_usize_lossy(TABLE_NODES - 1);
        let x: Vec<T> = (0..TABLE_NODES).map(|i| T::from_usize_lossy(i) * step).collect();
        let stol = tol * T::lit(1e-3);
        let panel_tol = tol * T::lit(1e-4);
        let mut cdf = Vec::with_capacity(TABLE_NODES);
        let mut acc = T::zero();
        cdf.push(acc);
        for w in x.windows(2) {
            let q = quadrature::integrate(|u| series::exit_survival_unit(u, stol), w[0], w[1], panel_tol);
            acc = acc + q.value;
            cdf.push(acc.min(T::one()));
        }
        let slope: Vec<T> = x.iter().map(|&z| series::exit_survival_unit(z, stol)).collect();
        let rate = T::PI() * T::PI() / T::lit(8.0);
        let table = TabulatedCdf::new(x, cdf, Some(slope), Some(ExpTail { rate }))?;
        Ok(Self { exit, table })
    }

    pub fn unit(tol: T) -> Result<Self> {
        Self::new(ExitTimeDistribution::unit(tol)?)
    }

    pub fn exit_law(&self) -> &ExitTimeDistribution<T> {
        &self.exit
    }

    /// `G(z)` by adaptive quadrature on `1 − F`.
    pub fn cdf(&self, z: T) -> Result<T> {
        self.exit.survival(z)?;
        if z.is_infinite() {
            return Ok(T::one());
        }
        let s = self.exit.time_scale();
        Ok(integrated_survival(z / s, self.exit.tol()).min(T::one()))
    }

    /// `G(∞)`, which must be 1.
    pub fn total_mass(&self) -> T {
        let tol = self.exit.tol();
        let sw = T::lit(series::Z_SWITCH);
        integrated_survival(sw, tol * T::lit(0.5))
            + quadrature::integrate_to_infinity(|u| series::exit_survival_spectral(u, tol * T::lit(1e-2)), sw, tol * T::lit(0.5)).value
    }

    pub fn table(&self) -> &TabulatedCdf<T> {
        &self.table
    }

    /// Draws a dimensionless age.
    #[inline]
    pub fn sample_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.table.sample(rng)
    }

    /// Draws an age in the time units of the underlying exit law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.sample_unit(rng) * self.exit.time_scale()
    }
}
