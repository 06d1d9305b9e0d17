//! Tabulated CDFs with monotone cubic Hermite interpolation and inverse-CDF
//! sampling.

use rand::Rng;

use crate::error::{config, Result};
use crate::scalar::Real;

/// Default number of tabulation nodes for every inverse-CDF sampler.
pub const TABLE_NODES: usize = 4097;

/// Exponential right tail: `1 - F(x) = (1 - F(x_last)) * exp(-rate * (x - x_last))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTail<T> {
    pub rate: T,
}

/// A CDF stored on an increasing grid.
///
/// Slopes are either supplied (the exact density) or estimated with the
/// Fritsch–Carlson scheme; in both cases they pass through the Fritsch–Carlson
/// limiter so the interpolant is nondecreasing.
#[derive(Debug, Clone)]
pub struct TabulatedCdf<T> {
    x: Vec<T>,
    cdf: Vec<T>,
    slope: Vec<T>,
    guide: Vec<u32>,
    tail: Option<ExpTail<T>>,
    fast: Option<FastInverse<T>>,
}

/// Cubic Hermite interpolant of the inverse CDF on a uniform grid in `u`.
/// Cells that fail the build-time accuracy check fall back to exact
/// inversion.
#[derive(Debug, Clone)]
struct FastInverse<T> {
    cells: usize,
    q: Vec<T>,
    dq: Vec<T>,
    valid: Vec<bool>,
}

/// Cells of the fast inverse table.
const FAST_CELLS: usize = 1 << 14;

impl<T: Real> TabulatedCdf<T> {
    pub fn new(x: Vec<T>, cdf: Vec<T>, slope: Option<Vec<T>>, tail: Option<ExpTail<T>>) -> Result<Self> {
        let n = x.len();
        if n < 2 || cdf.len() != n {
            return Err(config("tabulated cdf needs at least two nodes and matching lengths"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(config("tabulation grid must be strictly increasing"));
        }
        if cdf.iter().any(|c| !c.is_finite() || *c < T::zero() || *c > T::one()) {
            return Err(config("cdf values must lie in [0, 1]"));
        }
        if cdf.windows(2).any(|w| w[1] < w[0]) {
            return Err(config("cdf values must be nondecreasing"));
        }
        let mut slope = match slope {
            Some(s) if s.len() == n => s.into_iter().map(|v| v.max(T::zero())).collect(),
            Some(_) => return Err(config("slope vector length mismatch")),
            None => fritsch_carlson_slopes(&x, &cdf),
        };
        limit_slopes(&x, &cdf, &mut slope);
        let guide = build_guide(&cdf);
        let mut table = Self { x, cdf, slope, guide, tail, fast: None };
        table.fast = table.build_fast_inverse(FAST_CELLS);
        Ok(table)
    }

    fn build_fast_inverse(&self, cells: usize) -> Option<FastInverse<T>> {
        let nf = T::from_usize_lossy(cells);
        let mut q = Vec::with_capacity(cells + 1);
        let mut dq = Vec::with_capacity(cells + 1);
        for k in 0..=cells {
            let u = T::from_usize_lossy(k) / nf;
            let x = self.invert(u);
            q.push(x);
            let pdf = self.density(x);
            dq.push(if pdf > T::zero() && k > 0 && k < cells { T::one() / (pdf * nf) } else { T::nan() });
        }
        let (lo, hi) = self.support();
        let tol = (hi - lo) * T::lit(T::EPS_TOL * 100.0);
        let mut valid = vec![false; cells];
        let mut any = false;
        for (k, v) in valid.iter_mut().enumerate() {
            if !(dq[k].is_finite() && dq[k + 1].is_finite()) || q[k + 1] > hi {
                continue;
            }
            let ok = [0.25, 0.5, 0.75].iter().all(|&t| {
                let t = T::lit(t);
                let u = (T::from_usize_lossy(k) + t) / nf;
                let approx = hermite_unit(q[k], q[k + 1], dq[k], dq[k + 1], t);
                (approx - self.invert(u)).abs() <= tol
            });
            *v = ok;
            any |= ok;
        }
        any.then_some(FastInverse { cells, q, dq, valid })
    }

    /// Density of the interpolated CDF.
    pub fn density(&self, x: T) -> T {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return match self.tail {
                Some(ExpTail { rate }) if x > hi => {
                    let last = self.cdf[self.cdf.len() - 1];
                    rate * (T::one() - last) * (-rate * (x - hi)).exp()
                }
                _ => T::zero(),
            };
        }
        let i = self.locate_x(x);
        let h = self.x[i + 1] - self.x[i];
        let t = (x - self.x[i]) / h;
        self.hermite_dt(i, t) / h
    }

    pub fn nodes(&self) -> &[T] {
        &self.x
    }

    pub fn values(&self) -> &[T] {
        &self.cdf
    }

    pub fn support(&self) -> (T, T) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn locate_x(&self, x: T) -> usize {
        // Largest i with x[i] <= x, clamped to a valid interval index.
        let i = self.x.partition_point(|v| *v <= x);
        i.saturating_sub(1).min(self.x.len() - 2)
    }

    fn hermite(&self, i: usize, t: T) -> T {
        let h = self.x[i + 1] - self.x[i];
        let (c0, c1) = (self.cdf[i], self.cdf[i + 1]);
        let (m0, m1) = (self.slope[i] * h, self.slope[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = three * t2 - two * t3;
        let h11 = t3 - t2;
        h00 * c0 + h10 * m0 + h01 * c1 + h11 * m1
    }

    fn hermite_dt(&self, i: usize, t: T) -> T {
        let h = self.x[i + 1] - self.x[i];
        let (c0, c1) = (self.cdf[i], self.cdf[i + 1]);
        let (m0, m1) = (self.slope[i] * h, self.slope[i + 1] * h);
        let t2 = t * t;
        let six = T::lit(6.0);
        let d00 = six * t2 - six * t;
        let d10 = T::lit(3.0) * t2 - T::lit(4.0) * t + T::one();
        let d11 = T::lit(3.0) * t2 - T::lit(2.0) * t;
        d00 * c0 + d10 * m0 - d00 * c1 + d11 * m1
    }

    /// Interpolated CDF value.
    pub fn cdf(&self, x: T) -> T {
        let (lo, hi) = self.support();
        if x <= lo {
            return self.cdf[0];
        }
        let last = self.cdf[self.cdf.len() - 1];
        if x >= hi {
            return match self.tail {
                Some(ExpTail { rate }) => T::one() - (T::one() - last) * (-rate * (x - hi)).exp(),
                None => last,
            };
        }
        let i = self.locate_x(x);
        let t = (x - self.x[i]) / (self.x[i + 1] - self.x[i]);
        self.hermite(i, t).max(self.cdf[i]).min(self.cdf[i + 1])
    }

    /// Inverse CDF.
    #[inline]
    pub fn quantile(&self, u: T) -> T {
        if let Some(f) = &self.fast {
            let s = u * T::from_usize_lossy(f.cells);
            if s >= T::zero() {
                let k = s.to_usize().unwrap_or(usize::MAX);
                if k < f.cells && f.valid[k] {
                    let t = s - T::from_usize_lossy(k);
                    return hermite_unit(f.q[k], f.q[k + 1], f.dq[k], f.dq[k + 1], t);
                }
            }
        }
        self.invert(u)
    }

    /// Inverse CDF by safeguarded Newton iteration on the interpolant.
    pub fn invert(&self, u: T) -> T {
        let n = self.x.len();
        let first = self.cdf[0];
        let last = self.cdf[n - 1];
        if u <= first {
            return self.x[0];
        }
        if u >= last {
            return match self.tail {
                Some(ExpTail { rate }) if u < T::one() => {
                    self.x[n - 1] + ((T::one() - last) / (T::one() - u)).ln() / rate
                }
                _ => self.x[n - 1],
            };
        }
        let m = self.guide.len() - 1;
        let k = (u * T::from_usize_lossy(m)).to_usize().unwrap_or(0).min(m);
        let mut i = self.guide[k] as usize;
        while i + 2 < n && self.cdf[i + 1] <= u {
            i += 1;
        }
        while i > 0 && self.cdf[i] > u {
            i -= 1;
        }
        let (c0, c1) = (self.cdf[i], self.cdf[i + 1]);
        let span = c1 - c0;
        if span <= T::zero() {
            return self.x[i];
        }
        let mut lo = T::zero();
        let mut hi = T::one();
        let mut t = ((u - c0) / span).max(T::zero()).min(T::one());
        let eps = T::epsilon() * T::lit(4.0);
        for _ in 0..60 {
            let g = self.hermite(i, t) - u;
            if g > T::zero() {
                hi = t;
            } else {
                lo = t;
            }
            let d = self.hermite_dt(i, t);
            let mut next = if d > T::zero() { t - g / d } else { T::lit(0.5) * (lo + hi) };
            if !(next > lo && next < hi) {
                next = T::lit(0.5) * (lo + hi);
            }
            if (next - t).abs() <= eps || hi - lo <= eps {
                t = next;
                break;
            }
            t = next;
        }
        self.x[i] + t * (self.x[i + 1] - self.x[i])
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.quantile(T::lit(rng.random::<f64>()))
    }
}

#[inline]
fn hermite_unit<T: Real>(y0: T, y1: T, m0: T, m1: T, t: T) -> T {
    let t2 = t * t;
    let t3 = t2 * t;
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    (two * t3 - three * t2 + T::one()) * y0 + (t3 - two * t2 + t) * m0 + (three * t2 - two * t3) * y1 + (t3 - t2) * m1
}

fn fritsch_carlson_slopes<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    let n = x.len();
    let delta: Vec<T> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    let mut m = vec![T::zero(); n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        let (a, b) = (delta[i - 1], delta[i]);
        m[i] = if a <= T::zero() || b <= T::zero() {
            T::zero()
        } else {
            // Weighted harmonic mean.
            let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
            let w1 = T::lit(2.0) * h1 + h0;
            let w2 = h1 + T::lit(2.0) * h0;
            (w1 + w2) / (w1 / a + w2 / b)
        };
    }
    m
}

fn limit_slopes<T: Real>(x: &[T], y: &[T], m: &mut [T]) {
    let three = T::lit(3.0);
    for i in 0..x.len() - 1 {
        let delta = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        if delta <= T::zero() {
            m[i] = T::zero();
            m[i + 1] = T::zero();
            continue;
        }
        let a = m[i] / delta;
        let b = m[i + 1] / delta;
        let r = (a * a + b * b).sqrt();
        if r > three {
            let s = three / r;
            m[i] = s * a * delta;
            m[i + 1] = s * b * delta;
        }
    }
}

fn build_guide<T: Real>(cdf: &[T]) -> Vec<u32> {
    let n = cdf.len();
    let m = n - 1;
    let mut guide = Vec::with_capacity(m + 1);
    let mut i = 0usize;
    for k in 0..=m {
        let u = T::from_usize_lossy(k) / T::from_usize_lossy(m);
        while i + 2 < n && cdf[i + 1] <= u {
            i += 1;
        }
        guide.push(i as u32);
    }
    guide
}
