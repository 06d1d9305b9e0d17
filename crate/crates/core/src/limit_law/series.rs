//! Series for standard Brownian motion started at 0 and killed on leaving
//! `(-1, 1)`.
//!
//! Every quantity has two representations: a method-of-images (theta
//! function) sum that converges fast for small times, and a sine/cosine
//! eigenfunction sum that converges fast for large times. The switch happens
//! at [`Z_SWITCH`]. Alternating sums stop at the first term whose
//! contribution falls below `tol / 4`, which bounds the remainder.

use crate::scalar::Real;

/// Dimensionless time at which the image and eigenfunction series swap.
pub const Z_SWITCH: f64 = 1.0;

const MAX_TERMS: usize = 10_000;

#[inline]
fn quarter<T: Real>(tol: T) -> T {
    tol * T::lit(0.25)
}

/// `λ_j z` for the Dirichlet eigenvalue `((2j+1)π/2)² / 2`.
#[inline]
fn decay<T: Real>(j: usize, z: T) -> T {
    let k = T::from_usize_lossy(2 * j + 1);
    k * k * T::PI() * T::PI() * z / T::lit(8.0)
}

/// `P(S ≤ z)` for the unit exit time `S` via the image series.
pub fn exit_cdf_images<T: Real>(z: T, tol: T) -> T {
    if z <= T::zero() {
        return T::zero();
    }
    let two = T::lit(2.0);
    let scale = (two * z).sqrt();
    let mut sum = T::zero();
    for k in 0..MAX_TERMS {
        let term = two * (T::from_usize_lossy(2 * k + 1) / scale).erfc();
        if k % 2 == 0 {
            sum = sum + term;
        } else {
            sum = sum - term;
        }
        if term < quarter(tol) {
            break;
        }
    }
    sum.max(T::zero()).min(T::one())
}

/// `P(S > z)` via the eigenfunction series.
pub fn exit_survival_spectral<T: Real>(z: T, tol: T) -> T {
    let pref = T::lit(4.0) / T::PI();
    let mut sum = T::zero();
    for j in 0..MAX_TERMS {
        let term = pref / T::from_usize_lossy(2 * j + 1) * (-decay(j, z)).exp();
        if j % 2 == 0 {
            sum = sum + term;
        } else {
            sum = sum - term;
        }
        if term < quarter(tol) {
            break;
        }
    }
    sum.max(T::zero()).min(T::one())
}

/// Unit exit-time CDF with the series switch.
pub fn exit_cdf_unit<T: Real>(z: T, tol: T) -> T {
    if z <= T::lit(Z_SWITCH) {
        exit_cdf_images(z, tol)
    } else {
        T::one() - exit_survival_spectral(z, tol)
    }
}

/// Unit exit-time survival `1 - F(z)`, evaluated without cancellation on
/// the large-time side.
pub fn exit_survival_unit<T: Real>(z: T, tol: T) -> T {
    if z <= T::lit(Z_SWITCH) {
        T::one() - exit_cdf_images(z, tol)
    } else {
        exit_survival_spectral(z, tol)
    }
}

/// Unit exit-time density.
pub fn exit_density_unit<T: Real>(z: T, tol: T) -> T {
    if z <= T::zero() {
        return T::zero();
    }
    let mut sum = T::zero();
    if z <= T::lit(Z_SWITCH) {
        let pref = T::lit(2.0) / (T::TAU() * z * z * z).sqrt();
        for k in 0..MAX_TERMS {
            let a = T::from_usize_lossy(2 * k + 1);
            let term = pref * a * (-a * a / (T::lit(2.0) * z)).exp();
            sum = if k % 2 == 0 { sum + term } else { sum - term };
            if term < quarter(tol) {
                break;
            }
        }
    } else {
        let pref = T::FRAC_PI_2();
        for j in 0..MAX_TERMS {
            let term = pref * T::from_usize_lossy(2 * j + 1) * (-decay(j, z)).exp();
            sum = if j % 2 == 0 { sum + term } else { sum - term };
            if term < quarter(tol) {
                break;
            }
        }
    }
    sum.max(T::zero())
}

#[inline]
fn gauss<T: Real>(x: T, z: T) -> T {
    (-x * x / (T::lit(2.0) * z)).exp() / (T::TAU() * z).sqrt()
}

/// Sub-density of `W_z` on `{no exit by z}` via images:
/// `Σ_m φ_z(y − 4m) − φ_z(y + 2 + 4m)`.
pub fn kernel_images<T: Real>(z: T, y: T, tol: T) -> T {
    let four = T::lit(4.0);
    let two = T::lit(2.0);
    let mut sum = gauss(y, z) - gauss(y + two, z);
    for shell in 1..MAX_TERMS {
        let m = T::from_usize_lossy(shell);
        // m = +shell and m = -shell
        let a = gauss(y - four * m, z) - gauss(y + two + four * m, z);
        let b = gauss(y + four * m, z) - gauss(y + two - four * m, z);
        sum = sum + a + b;
        // Nearest image of the next shell sits at distance 4m + 1.
        let size = gauss(four * m + T::one(), z) * T::lit(8.0);
        if size < quarter(tol) {
            break;
        }
    }
    sum.max(T::zero())
}

/// Same sub-density via the eigenfunction expansion
/// `Σ_j cos((2j+1)πy/2) exp(−(2j+1)²π²z/8)`.
pub fn kernel_spectral<T: Real>(z: T, y: T, tol: T) -> T {
    let mut sum = T::zero();
    for j in 0..MAX_TERMS {
        let k = T::from_usize_lossy(2 * j + 1);
        let e = (-decay(j, z)).exp();
        sum = sum + (k * T::FRAC_PI_2() * y).cos() * e;
        if e < quarter(tol) {
            break;
        }
    }
    sum.max(T::zero())
}

/// Confined kernel with the series switch; 0 outside `(-1, 1)`.
pub fn kernel_unit<T: Real>(z: T, y: T, tol: T) -> T {
    if y.abs() >= T::one() {
        return T::zero();
    }
    if z <= T::lit(Z_SWITCH) {
        kernel_images(z, y, tol)
    } else {
        kernel_spectral(z, y, tol)
    }
}

#[inline]
fn phi_diff<T: Real>(a: T, b: T, sqrt_z: T) -> T {
    // Φ(a/√z) − Φ(b/√z)
    (a / sqrt_z).norm_cdf() - (b / sqrt_z).norm_cdf()
}

/// `∫_{-1}^{y} kernel(z, u) du` via images.
pub fn kernel_cdf_images<T: Real>(z: T, y: T, tol: T) -> T {
    let sz = z.sqrt();
    let one = T::one();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let shell_term = |m: T| phi_diff(y - four * m, -one - four * m, sz) - phi_diff(y + two + four * m, one + four * m, sz);
    let mut sum = shell_term(T::zero());
    for shell in 1..MAX_TERMS {
        let m = T::from_usize_lossy(shell);
        sum = sum + shell_term(m) + shell_term(-m);
        let next = (four * m + one) / sz;
        if (-next).norm_cdf() * T::lit(8.0) < quarter(tol) {
            break;
        }
    }
    sum.max(T::zero())
}

/// `∫_{-1}^{y} kernel(z, u) du` via eigenfunctions.
pub fn kernel_cdf_spectral<T: Real>(z: T, y: T, tol: T) -> T {
    let mut sum = T::zero();
    for j in 0..MAX_TERMS {
        let k = T::from_usize_lossy(2 * j + 1);
        let e = (-decay(j, z)).exp();
        let sign = if j % 2 == 0 { T::one() } else { -T::one() };
        let w = T::lit(2.0) / (k * T::PI());
        sum = sum + e * w * ((k * T::FRAC_PI_2() * y).sin() + sign);
        if e * w * T::lit(2.0) < quarter(tol) {
            break;
        }
    }
    sum.max(T::zero())
}

pub fn kernel_cdf_unit<T: Real>(z: T, y: T, tol: T) -> T {
    let y = y.max(-T::one()).min(T::one());
    if z <= T::lit(Z_SWITCH) {
        kernel_cdf_images(z, y, tol)
    } else {
        kernel_cdf_spectral(z, y, tol)
    }
}

/// `∫_z^∞ P(S > u) du` from the eigenfunction series (exact termwise).
pub fn survival_tail_integral<T: Real>(z: T, tol: T) -> T {
    let mut sum = T::zero();
    for j in 0..MAX_TERMS {
        let k = T::from_usize_lossy(2 * j + 1);
        let term = T::lit(32.0) / (k * k * k * T::PI() * T::PI() * T::PI()) * (-decay(j, z)).exp();
        sum = if j % 2 == 0 { sum + term } else { sum - term };
        if term < quarter(tol) {
            break;
        }
    }
    sum
}

/// `∫_z^∞ kernel(u, y) du` for `z ≥ Z_SWITCH`, integrated termwise.
pub fn kernel_time_tail<T: Real>(z: T, y: T, tol: T) -> T {
    let mut sum = T::zero();
    for j in 0..MAX_TERMS {
        let k = T::from_usize_lossy(2 * j + 1);
        let w = T::lit(8.0) / (k * k * T::PI() * T::PI());
        let e = w * (-decay(j, z)).exp();
        sum = sum + (k * T::FRAC_PI_2() * y).cos() * e;
        if e < quarter(tol) {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn representations_agree_across_switch() {
        for &z in &[0.3, 0.7, 1.0, 1.5, 2.5] {
            let a = 1.0 - exit_cdf_images(z, TOL);
            let b = exit_survival_spectral(z, TOL);
            assert!((a - b).abs() < 1e-11, "z={z}: {a} vs {b}");
            for k in -9..=9 {
                let y = k as f64 / 10.0;
                let p = kernel_images(z, y, TOL);
                let q = kernel_spectral(z, y, TOL);
                assert!((p - q).abs() < 1e-11, "z={z} y={y}: {p} vs {q}");
                let cp = kernel_cdf_images(z, y, TOL);
                let cq = kernel_cdf_spectral(z, y, TOL);
                assert!((cp - cq).abs() < 1e-11, "z={z} y={y}: {cp} vs {cq}");
            }
        }
    }

    #[test]
    fn kernel_mass_equals_survival() {
        for &z in &[0.05, 0.4, 1.0, 3.0, 8.0] {
            let mass = kernel_cdf_unit(z, 1.0, TOL);
            assert!((mass - exit_survival_unit(z, TOL)).abs() < 1e-11);
        }
    }

    #[test]
    fn boundaries() {
        assert_eq!(exit_cdf_unit(0.0, TOL), 0.0);
        assert_eq!(kernel_unit(0.5, 1.0, TOL), 0.0);
        assert!(kernel_images(0.5, 1.0 - 1e-12, TOL) < 1e-9);
        assert!(kernel_spectral(2.0, -1.0 + 1e-12, TOL) < 1e-9);
        assert!(kernel_cdf_unit(0.5, -1.0, TOL).abs() < 1e-14);
    }

    #[test]
    fn density_integrates_to_cdf() {
        let q = crate::quadrature::integrate(|u| exit_density_unit(u, TOL), 1e-9, 2.0, 1e-12);
        assert!((q.value - exit_cdf_unit(2.0, TOL)).abs() < 1e-10);
    }

    #[test]
    fn tail_integrals() {
        let q = crate::quadrature::integrate_to_infinity(|u| exit_survival_spectral(u, TOL), 2.0, 1e-13);
        assert!((q.value - survival_tail_integral(2.0, TOL)).abs() < 1e-11);
        let q = crate::quadrature::integrate_to_infinity(|u| kernel_spectral(u, 0.3, TOL), 1.0, 1e-13);
        assert!((q.value - kernel_time_tail(1.0, 0.3, TOL)).abs() < 1e-11);
    }
}
