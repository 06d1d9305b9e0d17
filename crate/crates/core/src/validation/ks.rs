use crate::error::{domain, Result};
use crate::scalar::Real;

fn sorted<T: Real>(sample: &[T]) -> Result<Vec<T>> {
    if sample.is_empty() {
        return Err(domain("KS distance needs a nonempty sample"));
    }
    if sample.iter().any(|v| v.is_nan()) {
        return Err(domain("KS distance: sample contains NaN"));
    }
    let mut v = sample.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    Ok(v)
}

/// `sup_x |F_n(x) − F(x)|` against an analytic CDF.
pub fn ks_one_sample<T: Real, F: Fn(T) -> T>(sample: &[T], cdf: F) -> Result<T> {
    let v = sorted(sample)?;
    let n = T::from_usize_lossy(v.len());
    let mut d = T::zero();
    let mut i = 0usize;
    while i < v.len() {
        // Ties: jump the empirical CDF over the whole block at once.
        let mut j = i + 1;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        let f = cdf(v[i]).max(T::zero()).min(T::one());
        let below = T::from_usize_lossy(i) / n;
        let above = T::from_usize_lossy(j) / n;
        d = d.max((f - below).abs()).max((above - f).abs());
        i = j;
    }
    Ok(d.min(T::one()))
}

/// `sup_x |F_a(x) − F_b(x)|` between two empirical CDFs.
pub fn ks_two_sample<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (na, nb) = (T::from_usize_lossy(a.len()), T::from_usize_lossy(b.len()));
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = T::zero();
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((T::from_usize_lossy(i) / na - T::from_usize_lossy(j) / nb).abs());
    }
    Ok(d)
}

/// Empirical CDF points `(x_(k), k/n)` of a sample.
pub fn empirical_cdf<T: Real>(sample: &[T]) -> Result<Vec<(T, T)>> {
    let v = sorted(sample)?;
    let n = T::from_usize_lossy(v.len());
    Ok(v.into_iter().enumerate().map(|(k, x)| (x, T::from_usize_lossy(k + 1) / n)).collect())
}
