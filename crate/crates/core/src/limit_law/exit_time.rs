use rand::Rng;

use super::series;
use crate::error::{config, domain, Result};
use crate::quadrature;
use crate::scalar::Real;
use crate::tabulate::{ExpTail, TabulatedCdf, TABLE_NODES};

/// Right end of the unit exit-time table. `P(S > 12) ≈ 4.7e-7`; beyond it
/// the single-mode exponential tail is exact to double precision.
const UNIT_TABLE_END: f64 = 12.0;

/// Law of the first exit time of `σW` from `[-c_half, c_half]`, `W_0 = 0`.
///
/// Internally everything is expressed through the unit law
/// (`c_half = σ = 1`) at the dimensionless time `σ² z / c_half²`.
#[derive(Debug, Clone)]
pub struct ExitTimeDistribution<T> {
    c_half: T,
    sigma: T,
    tol: T,
    table: TabulatedCdf<T>,
}

impl<T: Real> ExitTimeDistribution<T> {
    pub fn new(c_half: T, sigma: T, tol: T) -> Result<Self> {
        if !(c_half > T::zero() && c_half.is_finite()) {
            return Err(config("barrier half-width must be positive"));
        }
        if !(sigma > T::zero() && sigma.is_finite()) {
            return Err(config("sigma must be positive"));
        }
        if !(tol > T::zero()) {
            return Err(config("tolerance must be positive"));
        }
        let end = T::lit(UNIT_TABLE_END);
        let step = end / T::from_usize_lossy(TABLE_NODES - 1);
        let x: Vec<T> = (0..TABLE_NODES).map(|i| T::from_usize_lossy(i) * step).collect();
        let stol = tol * T::lit(1e-3);
        let cdf: Vec<T> = x.iter().map(|&z| series::exit_cdf_unit(z, stol)).collect();
        let slope: Vec<T> = x.iter().map(|&z| series::exit_density_unit(z, stol)).collect();
        let rate = T::PI() * T::PI() / T::lit(8.0);
        let table = TabulatedCdf::new(x, cdf, Some(slope), Some(ExpTail { rate }))?;
        Ok(Self { c_half, sigma, tol, table })
    }

    /// The dimensionless law: half-width 1, unit volatility.
    pub fn unit(tol: T) -> Result<Self> {
        Self::new(T::one(), T::one(), tol)
    }

    pub fn c_half(&self) -> T {
        self.c_half
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn tol(&self) -> T {
        self.tol
    }

    /// `c_half² / σ²`, the time scale of the law.
    pub fn time_scale(&self) -> T {
        self.c_half * self.c_half / (self.sigma * self.sigma)
    }

    fn check_time(z: T) -> Result<()> {
        if z.is_nan() || z < T::zero() {
            return Err(domain(format!("exit time argument must be >= 0, got {z}")));
        }
        Ok(())
    }

    /// `F(z)` from the series (not the table).
    pub fn cdf(&self, z: T) -> Result<T> {
        Self::check_time(z)?;
        if z.is_infinite() {
            return Ok(T::one());
        }
        Ok(series::exit_cdf_unit(z / self.time_scale(), self.tol))
    }

    /// `1 - F(z)`.
    pub fn survival(&self, z: T) -> Result<T> {
        Self::check_time(z)?;
        if z.is_infinite() {
            return Ok(T::zero());
        }
        Ok(series::exit_survival_unit(z / self.time_scale(), self.tol))
    }

    pub fn density(&self, z: T) -> Result<T> {
        Self::check_time(z)?;
        let s = self.time_scale();
        Ok(series::exit_density_unit(z / s, self.tol) / s)
    }

    /// Mean computed as `∫₀^∞ (1 - F)`, split at the series switch.
    pub fn mean_from_survival(&self) -> T {
        let tol = self.tol * T::lit(0.1);
        let sw = T::lit(series::Z_SWITCH);
        let head = quadrature::integrate(|u| series::exit_survival_unit(u, tol * T::lit(0.1)), T::zero(), sw, tol * T::lit(0.5));
        let tail = quadrature::integrate_to_infinity(|u| series::exit_survival_spectral(u, tol * T::lit(0.1)), sw, tol * T::lit(0.5));
        (head.value + tail.value) * self.time_scale()
    }

    /// Interpolated CDF from the sampling table.
    pub fn table_cdf(&self, z: T) -> T {
        self.table.cdf(z / self.time_scale())
    }

    pub fn table(&self) -> &TabulatedCdf<T> {
        &self.table
    }

    /// Draws a dimensionless (`c_half = σ = 1`) exit time.
    #[inline]
    pub fn sample_unit_time<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.table.sample(rng)
    }

    /// Draws an exit time of this law by inverse CDF.
    #[inline]
    pub fn sample_time<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.sample_unit_time(rng) * self.time_scale()
    }

    /// Draws `(exit time, exit side)`; the side is ±1 with equal probability
    /// and independent of the time.
    #[inline]
    pub fn sample_exit<R: Rng + ?Sized>(&self, rng: &mut R) -> (T, i8) {
        let t = self.sample_time(rng);
        let side = if rng.random::<bool>() { 1 } else { -1 };
        (t, side)
    }

    /// Draws an exit of `σW` from `[-c_half, c_half]` reusing this law's
    /// table for arbitrary half-width and volatility.
    #[inline]
    pub fn sample_exit_scaled<R: Rng + ?Sized>(&self, rng: &mut R, c_half: T, sigma: T) -> (T, i8) {
        let t = self.sample_unit_time(rng) * c_half * c_half / (sigma * sigma);
        let side = if rng.random::<bool>() { 1 } else { -1 };
        (t, side)
    }
}
