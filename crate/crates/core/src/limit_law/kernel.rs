use rand::Rng;

use super::series;
use crate::error::{domain, Result};
use crate::scalar::Real;

fn check(z: f64, y: f64) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(domain(format!("confined kernel needs finite z > 0, got {z}")));
    }
    if !y.is_finite() {
        return Err(domain("confined kernel position must be finite"));
    }
    Ok(())
}

/// Density of `W_z` at `y` on the event that `W` (started at 0) has not left
/// `(-1, 1)` by time `z`.
pub fn confined_kernel<T: Real>(z: T, y: T, tol: T) -> Result<T> {
    check(z.as_f64(), y.as_f64())?;
    Ok(series::kernel_unit(z, y, tol))
}

/// `∫_{-1}^{y} confined_kernel(z, u) du`; equals `1 − F(z)` at `y = 1`.
pub fn confined_cdf<T: Real>(z: T, y: T, tol: T) -> Result<T> {
    check(z.as_f64(), y.as_f64())?;
    if y <= -T::one() {
        return Ok(T::zero());
    }
    Ok(series::kernel_cdf_unit(z, y, tol))
}

/// Image-series minus eigenfunction-series evaluation at the same point.
pub fn series_switch_gap<T: Real>(z: T, y: T, tol: T) -> T {
    (series::kernel_images(z, y, tol) - series::kernel_spectral(z, y, tol)).abs()
}

/// Draws `W_z` conditioned on no exit from `(-1, 1)` by `z`, by inverting
/// the conditional CDF `confined_cdf(z, ·) / (1 − F(z))` with a safeguarded
/// Newton iteration.
pub fn sample_confined_position<T: Real, R: Rng + ?Sized>(z: T, tol: T, rng: &mut R) -> Result<T> {
    check(z.as_f64(), 0.0)?;
    let u = T::lit(rng.random::<f64>());
    Ok(confined_quantile(z, u, tol))
}

/// Conditional quantile of the confined position at dimensionless time `z`.
pub fn confined_quantile<T: Real>(z: T, u: T, tol: T) -> T {
    let one = T::one();
    let mass = series::kernel_cdf_unit(z, one, tol);
    if !(mass > T::zero()) {
        return T::zero();
    }
    let target = u * mass;
    let (mut lo, mut hi) = (-one, one);
    // Gaussian guess for short times, centre otherwise.
    let mut y = T::zero();
    let eps = T::lit(T::EPS_TOL.max(1e-15));
    for _ in 0..200 {
        let g = series::kernel_cdf_unit(z, y, tol) - target;
        if g > T::zero() {
            hi = y;
        } else {
            lo = y;
        }
        let d = series::kernel_unit(z, y, tol);
        let mut next = if d > T::zero() { y - g / d } else { T::lit(0.5) * (lo + hi) };
        if !(next > lo && next < hi) {
            next = T::lit(0.5) * (lo + hi);
        }
        if (next - y).abs() <= eps || hi - lo <= eps {
            y = next;
            break;
        }
        y = next;
    }
    y.max(-one).min(one)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn domain_errors() {
        assert!(confined_kernel(0.0f64, 0.0, 1e-8).is_err());
        assert!(confined_kernel(-1.0f64, 0.0, 1e-8).is_err());
        assert!(confined_kernel(1.0f64, f64::NAN, 1e-8).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_confined_position(0.0f64, 1e-8, &mut rng).is_err());
    }

    #[test]
    fn absorbing_boundary() {
        for &z in &[0.01, 0.5, 1.0, 4.0] {
            assert_eq!(confined_kernel(z, 1.0f64, 1e-10).unwrap(), 0.0);
            assert_eq!(confined_kernel(z, -1.0f64, 1e-10).unwrap(), 0.0);
            assert_eq!(confined_kernel(z, 1.3f64, 1e-10).unwrap(), 0.0);
        }
    }

    #[test]
    fn switch_continuity() {
        for k in -10..=10 {
            let y = k as f64 / 10.0;
            assert!(series_switch_gap(1.0, y, 1e-8) <= 1e-7);
        }
    }

    #[test]
    fn quantile_roundtrip_and_symmetry() {
        for &z in &[1e-4, 0.05, 0.8, 3.0] {
            for k in 1..20 {
                let u = k as f64 / 20.0;
                let y = confined_quantile(z, u, 1e-12);
                let back = series::kernel_cdf_unit(z, y, 1e-12) / series::kernel_cdf_unit(z, 1.0, 1e-12);
                assert!((back - u).abs() < 1e-9, "z={z} u={u}");
                let mirror = confined_quantile(z, 1.0 - u, 1e-12);
                assert!((y + mirror).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn draws_are_inside_and_centred() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20_000;
        let mut sum = 0.0;
        for i in 0..n {
            let z = 0.05 + (i % 40) as f64 * 0.1;
            let y = sample_confined_position(z, 1e-8, &mut rng).unwrap();
            assert!(y > -1.0 && y < 1.0);
            sum += y;
        }
        assert!((sum / n as f64).abs() < 3.0 * (0.35 / n as f64).sqrt());
    }
}
