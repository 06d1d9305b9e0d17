//! Model of `X_t = X_0 + ∫a ds + ∫σ dW + J_t` with deterministic drift and
//! volatility from named function families, plus a finite-activity jump
//! specification.

use crate::error::{config, Result};
use crate::quadrature;
use crate::scalar::Real;

/// Deterministic time function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curve<T> {
    Constant(T),
    /// `intercept + slope * t`
    Linear { intercept: T, slope: T },
    /// `level + amplitude * sin(frequency * t + phase)`
    Sinusoidal { level: T, amplitude: T, frequency: T, phase: T },
}

impl<T: Real> Curve<T> {
    #[inline]
    pub fn eval(&self, t: T) -> T {
        match *self {
            Curve::Constant(v) => v,
            Curve::Linear { intercept, slope } => intercept + slope * t,
            Curve::Sinusoidal { level, amplitude, frequency, phase } => level + amplitude * (frequency * t + phase).sin(),
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        match *self {
            Curve::Constant(v) => v == T::zero(),
            Curve::Linear { intercept, slope } => intercept == T::zero() && slope == T::zero(),
            Curve::Sinusoidal { level, amplitude, frequency, phase } => {
                level == T::zero() && (amplitude == T::zero() || (frequency == T::zero() && phase.sin() == T::zero()))
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match *self {
            Curve::Constant(_) => true,
            Curve::Linear { slope, .. } => slope == T::zero(),
            Curve::Sinusoidal { amplitude, frequency, .. } => amplitude == T::zero() || frequency == T::zero(),
        }
    }

    fn all_finite(&self) -> bool {
        match *self {
            Curve::Constant(v) => v.is_finite(),
            Curve::Linear { intercept, slope } => intercept.is_finite() && slope.is_finite(),
            Curve::Sinusoidal { level, amplitude, frequency, phase } => {
                level.is_finite() && amplitude.is_finite() && frequency.is_finite() && phase.is_finite()
            }
        }
    }

    /// `(min, max)` of the curve over `[0, horizon]`.
    pub fn range(&self, horizon: T) -> (T, T) {
        let (a, b) = (self.eval(T::zero()), self.eval(horizon));
        let (mut lo, mut hi) = (a.min(b), a.max(b));
        if let Curve::Sinusoidal { frequency, phase, .. } = *self {
            if frequency != T::zero() {
                // Critical points: frequency * t + phase = π/2 + kπ.
                let (t0, t1) = (phase, frequency * horizon + phase);
                let (u0, u1) = (t0.min(t1), t0.max(t1));
                let mut k = ((u0 - T::FRAC_PI_2()) / T::PI()).ceil();
                while T::FRAC_PI_2() + k * T::PI() <= u1 {
                    let s = (T::FRAC_PI_2() + k * T::PI() - phase) / frequency;
                    let v = self.eval(s);
                    lo = lo.min(v);
                    hi = hi.max(v);
                    k = k + T::one();
                }
            }
        }
        (lo, hi)
    }

    /// `∫₀ᵗ f(s)² ds` in closed form.
    pub fn integral_of_square(&self, t: T) -> T {
        match *self {
            Curve::Constant(v) => v * v * t,
            Curve::Linear { intercept: a, slope: b } => a * a * t + a * b * t * t + b * b * t * t * t / T::lit(3.0),
            Curve::Sinusoidal { level: l, amplitude: amp, frequency: w, phase: p } => {
                if w == T::zero() {
                    let v = l + amp * p.sin();
                    return v * v * t;
                }
                let two = T::lit(2.0);
                (l * l + amp * amp / two) * t + two * l * amp / w * (p.cos() - (w * t + p).cos())
                    - amp * amp / (T::lit(4.0) * w) * ((two * w * t + two * p).sin() - (two * p).sin())
            }
        }
    }

    /// `∫₀ᵗ f(s)² ds` by adaptive quadrature (independent route).
    pub fn integral_of_square_quadrature(&self, t: T, tol: T) -> T {
        quadrature::integrate(|s| self.eval(s) * self.eval(s), T::zero(), t, tol).value
    }

    /// `∫₀ᵗ f(s)⁴ ds` by adaptive quadrature.
    pub fn integral_of_fourth_power(&self, t: T, tol: T) -> T {
        quadrature::integrate(|s| self.eval(s).powi(4), T::zero(), t, tol).value
    }
}

/// Jump-size law for a Poisson jump specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpSizeLaw<T> {
    Fixed(T),
    /// `±magnitude` with equal probability.
    SymmetricFixed(T),
    Normal { mean: T, std: T },
    Uniform { low: T, high: T },
}

impl<T: Real> JumpSizeLaw<T> {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            JumpSizeLaw::Fixed(v) | JumpSizeLaw::SymmetricFixed(v) => v.is_finite(),
            JumpSizeLaw::Normal { mean, std } => mean.is_finite() && std.is_finite() && std >= T::zero(),
            JumpSizeLaw::Uniform { low, high } => low.is_finite() && high.is_finite() && low <= high,
        };
        if ok {
            Ok(())
        } else {
            Err(config("invalid jump size law"))
        }
    }
}

/// A jump `ΔX` at time `S_p`; `index` is the chronological position `p`
/// (starting at 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpRecord<T> {
    pub index: usize,
    pub time: T,
    pub size: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum JumpSpec<T> {
    None,
    /// Explicit `(time, size)` pairs.
    Scenario(Vec<(T, T)>),
    /// Inhomogeneous compound Poisson process.
    Poisson { intensity: Curve<T>, sizes: JumpSizeLaw<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec<T> {
    pub drift: Curve<T>,
    pub vol: Curve<T>,
    pub jumps: JumpSpec<T>,
    pub horizon: T,
    pub initial: T,
}

impl<T: Real> ModelSpec<T> {
    /// Driftless model with constant volatility and no jumps.
    pub fn brownian(sigma: T, horizon: T) -> Self {
        Self { drift: Curve::Constant(T::zero()), vol: Curve::Constant(sigma), jumps: JumpSpec::None, horizon, initial: T::zero() }
    }

    pub fn with_jumps(mut self, jumps: JumpSpec<T>) -> Self {
        self.jumps = jumps;
        self
    }

    pub fn with_drift(mut self, drift: Curve<T>) -> Self {
        self.drift = drift;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > T::zero() && self.horizon.is_finite()) {
            return Err(config("horizon must be positive and finite"));
        }
        if !self.initial.is_finite() {
            return Err(config("initial value must be finite"));
        }
        if !self.drift.all_finite() || !self.vol.all_finite() {
            return Err(config("drift and volatility parameters must be finite"));
        }
        let (vmin, _) = self.vol.range(self.horizon);
        if !(vmin > T::zero()) {
            return Err(config("volatility must be strictly positive on [0, horizon]"));
        }
        match &self.jumps {
            JumpSpec::None => {}
            JumpSpec::Scenario(list) => {
                for &(t, s) in list {
                    if !(t > T::zero() && t.is_finite() && s.is_finite()) {
                        return Err(config("scenario jumps need finite times > 0 and finite sizes"));
                    }
                }
                let mut times: Vec<T> = list.iter().map(|p| p.0).collect();
                times.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
                if times.windows(2).any(|w| w[0] == w[1]) {
                    return Err(config("scenario jump times must be distinct"));
                }
            }
            JumpSpec::Poisson { intensity, sizes } => {
                if !intensity.all_finite() {
                    return Err(config("jump intensity must be finite"));
                }
                let (lmin, lmax) = intensity.range(self.horizon);
                if lmin < T::zero() {
                    return Err(config("jump intensity must be nonnegative"));
                }
                if !lmax.is_finite() {
                    return Err(config("jump intensity supremum is not finite"));
                }
                sizes.validate()?;
            }
        }
        Ok(())
    }

    /// `∫₀ᵗ σ² ds`.
    #[inline]
    pub fn integrated_variance(&self, t: T) -> T {
        self.vol.integral_of_square(t)
    }

    pub fn time_change(&self) -> TimeChange<'_, T> {
        TimeChange { spec: self }
    }
}

/// The operational clock `Θ(t) = ∫₀ᵗ σ²(s) ds` and its inverse.
#[derive(Debug, Clone, Copy)]
pub struct TimeChange<'a, T> {
    spec: &'a ModelSpec<T>,
}

impl<T: Real> TimeChange<'_, T> {
    #[inline]
    pub fn forward(&self, t: T) -> T {
        self.spec.integrated_variance(t)
    }

    /// Real time `t ∈ [0, horizon]` with `Θ(t) = theta`.
    pub fn inverse(&self, theta: T) -> T {
        if let Curve::Constant(s) = self.spec.vol {
            return theta / (s * s);
        }
        if theta <= T::zero() {
            return T::zero();
        }
        let (mut lo, mut hi) = (T::zero(), self.spec.horizon);
        let top = self.forward(hi);
        if theta >= top {
            // Extend beyond the horizon if ever asked.
            let mut h = hi;
            while self.forward(h) < theta {
                h = h * T::lit(2.0);
            }
            hi = h;
        }
        let mut t = lo + (hi - lo) * (theta / self.forward(hi));
        let eps = T::epsilon() * T::lit(8.0) * hi;
        for _ in 0..100 {
            let g = self.forward(t) - theta;
            if g > T::zero() {
                hi = t;
            } else {
                lo = t;
            }
            let s = self.spec.vol.eval(t);
            let mut next = t - g / (s * s);
            if !(next > lo && next < hi) {
                next = T::lit(0.5) * (lo + hi);
            }
            if (next - t).abs() <= eps {
                return next;
            }
            t = next;
        }
        t
    }
}
