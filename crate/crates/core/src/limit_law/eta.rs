use rand::Rng;

use super::series;
use crate::error::{domain, Result};
use crate::quadrature;
use crate::scalar::Real;
use crate::tabulate::{TabulatedCdf, TABLE_NODES};

/// `∫_{z*}^∞ e^{-λ_j z} dz` weights for the eigenfunction tail of the CDF of
/// the time-integrated kernel.
fn cdf_time_tail<T: Real>(y: T, tol: T) -> T {
    let z = T::lit(series::Z_SWITCH);
    let mut sum = T::zero();
    for j in 0..10_000usize {
        let k = T::from_usize_lossy(2 * j + 1);
        let lambda = k * k * T::PI() * T::PI() / T::lit(8.0);
        let sign = if j % 2 == 0 { T::one() } else { -T::one() };
        let w = T::lit(2.0) / (k * T::PI()) * (-lambda * z).exp() / lambda;
        sum = sum + w * ((k * T::FRAC_PI_2() * y).sin() + sign);
        if w * T::lit(2.0) < tol * T::lit(0.25) {
            break;
        }
    }
    sum
}

/// Time integral over `(0, z*]` of `f(z)` where the image series has a
/// `z^{-1/2}` singularity at the origin; the map `z = s²` removes it.
fn head_integral<T: Real, F: Fn(T) -> T>(f: F, tol: T) -> T {
    let end = T::lit(series::Z_SWITCH).sqrt();
    quadrature::integrate(|s: T| T::lit(2.0) * s * f(s * s), T::zero(), end, tol).value
}

/// Overshoot density `h(y) = ∫₀^∞ Σ_m (φ_z(y−4m) − φ_z(y+2+4m)) dz` on
/// `[-1, 1]`, zero outside.
///
/// The time integral is split at the series switch: adaptive quadrature on
/// the image series below it, termwise exact integration of the eigenfunction
/// series above it.
pub fn eval_h<T: Real>(y: T, tol: T) -> Result<T> {
    if !y.is_finite() {
        return Err(domain("eval_h: non-finite argument"));
    }
    if !(tol > T::zero()) {
        return Err(domain("eval_h: tolerance must be positive"));
    }
    if y.abs() >= T::one() {
        return Ok(T::zero());
    }
    let half = tol * T::lit(0.5);
    let stol = tol * T::lit(1e-3);
    let head = head_integral(|z| series::kernel_images(z, y, stol), half);
    let tail = series::kernel_time_tail(T::lit(series::Z_SWITCH), y, stol);
    Ok((head + tail).max(T::zero()))
}

/// `∫_{-1}^{y} h`, computed the same way from the kernel CDF.
pub fn eval_h_cdf<T: Real>(y: T, tol: T) -> Result<T> {
    if !y.is_finite() {
        return Err(domain("eval_h_cdf: non-finite argument"));
    }
    if y <= -T::one() {
        return Ok(T::zero());
    }
    let y = y.min(T::one());
    let half = tol * T::lit(0.5);
    let stol = tol * T::lit(1e-3);
    let head = head_integral(|z| series::kernel_cdf_images(z, y, stol), half);
    let tail = cdf_time_tail(y, stol);
    Ok((head + tail).max(T::zero()).min(T::one()))
}

/// Closed-form candidate `1 − |y|` on `[-1, 1]`.
#[inline]
pub fn eval_h_closed<T: Real>(y: T) -> T {
    if y.abs() <= T::one() {
        T::one() - y.abs()
    } else {
        T::zero()
    }
}

#[inline]
fn closed_quantile<T: Real>(u: T) -> T {
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    if u < half {
        -T::one() + (two * u).sqrt()
    } else {
        T::one() - (two * (T::one() - u)).sqrt()
    }
}

/// Tabulated law of η with its verification against the closed form.
#[derive(Debug, Clone)]
pub struct EtaDistribution<T> {
    tol: T,
    grid: Vec<T>,
    density: Vec<T>,
    table: TabulatedCdf<T>,
    max_closed_deviation: T,
    closed_form_verified: bool,
}

impl<T: Real> EtaDistribution<T> {
    /// Tabulates `h` and its CDF on the 4097-point grid over `[-1, 1]`.
    ///
    /// The closed form becomes the sampler only if it agrees with the series
    /// evaluation to within `10·tol` on every node.
    pub fn build(tol: T) -> Result<Self> {
        if !(tol > T::zero()) {
            return Err(domain("tolerance must be positive"));
        }
        let n = TABLE_NODES;
        let step = T::lit(2.0) / T::from_usize_lossy(n - 1);
        let grid: Vec<T> = (0..n).map(|i| -T::one() + T::from_usize_lossy(i) * step).collect();
        let mut density = Vec::with_capacity(n);
        let mut cdf = Vec::with_capacity(n);
        for &y in &grid {
            density.push(eval_h(y, tol)?);
            cdf.push(eval_h_cdf(y, tol)?);
        }
        // Enforce storage invariants exactly at the ends and monotonicity in between.
        cdf[0] = T::zero();
        cdf[n - 1] = T::one();
        for i in 1..n {
            if cdf[i] < cdf[i - 1] {
                cdf[i] = cdf[i - 1];
            }
        }
        let max_closed_deviation = grid
            .iter()
            .zip(&density)
            .map(|(&y, &h)| (h - eval_h_closed(y)).abs())
            .fold(T::zero(), T::max);
        let closed_form_verified = max_closed_deviation <= T::lit(10.0) * tol;
        let table = TabulatedCdf::new(grid.clone(), cdf, Some(density.clone()), None)?;
        Ok(Self { tol, grid, density, table, max_closed_deviation, closed_form_verified })
    }

    pub fn tol(&self) -> T {
        self.tol
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn density_values(&self) -> &[T] {
        &self.density
    }

    pub fn table(&self) -> &TabulatedCdf<T> {
        &self.table
    }

    pub fn max_closed_deviation(&self) -> T {
        self.max_closed_deviation
    }

    pub fn closed_form_verified(&self) -> bool {
        self.closed_form_verified
    }

    /// `∫ h` by adaptive quadrature of the series evaluation.
    pub fn total_mass(&self) -> T {
        self.moment(0)
    }

    /// `∫ y² h(y) dy`.
    pub fn variance(&self) -> T {
        self.moment(2)
    }

    fn moment(&self, k: i32) -> T {
        let inner = self.tol * T::lit(1e-2);
        let f = |y: T| y.powi(k) * eval_h(y, inner).unwrap_or(T::zero());
        let half = self.tol * T::lit(0.5);
        quadrature::integrate(f, -T::one(), T::zero(), half).value + quadrature::integrate(f, T::zero(), T::one(), half).value
    }

    /// Draws η; closed-form inversion when verified, tabulated inverse CDF
    /// otherwise.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let u = T::lit(rng.random::<f64>());
        if self.closed_form_verified {
            closed_quantile(u)
        } else {
            self.table.quantile(u)
        }
    }

    /// Draws η from the tabulated inverse CDF regardless of verification.
    pub fn sample_tabulated<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.table.sample(rng)
    }
}
