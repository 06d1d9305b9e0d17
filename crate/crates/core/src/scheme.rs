//! The grid-exit observation rule and extraction of observations,
//! overshoots and ages from a simulated path.

use crate::error::{config, domain, Result};
use crate::model::JumpRecord;
use crate::path_sim::InternalPath;
use crate::scalar::Real;

/// Relative tolerance (in cell widths) for deciding grid membership.
pub const SNAP_REL: f64 = 1e-12;

/// Grid `{k c ε : k ∈ Z}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridScheme<T> {
    pub eps: T,
    pub c: T,
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Interval<T> {
    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn centre(&self) -> T {
        (self.lo + self.hi) * T::lit(0.5)
    }
}

impl<T: Real> GridScheme<T> {
    pub fn new(eps: T, c: T) -> Result<Self> {
        if !(eps > T::zero() && eps.is_finite()) {
            return Err(config("tick scale eps must be positive"));
        }
        if !(c > T::zero() && c.is_finite()) {
            return Err(config("cell constant c must be positive"));
        }
        Ok(Self { eps, c })
    }

    /// Cell width `c ε`.
    #[inline]
    pub fn cell(&self) -> T {
        self.c * self.eps
    }

    /// Grid line `k c ε`.
    #[inline]
    pub fn line(&self, k: i64) -> T {
        T::from_i64(k).expect("grid index") * self.cell()
    }

    #[inline]
    pub(crate) fn snap_tol(&self, y: T) -> T {
        self.cell() * T::lit(SNAP_REL) + T::epsilon() * T::lit(8.0) * y.abs()
    }

    /// Index of the grid line `y` sits on, if any.
    #[inline]
    pub fn snap(&self, y: T) -> Option<i64> {
        let k = (y / self.cell()).round();
        let ki = k.to_i64()?;
        if (y - self.line(ki)).abs() <= self.snap_tol(y) {
            Some(ki)
        } else {
            None
        }
    }

    /// The restart cell `A_y`: double width around a grid point, the
    /// enclosing cell otherwise.
    #[inline]
    pub fn cell_of(&self, y: T) -> Interval<T> {
        match self.snap(y) {
            Some(k) => Interval { lo: self.line(k - 1), hi: self.line(k + 1) },
            None => {
                let k = (y / self.cell()).floor().to_i64().expect("grid index");
                Interval { lo: self.line(k), hi: self.line(k + 1) }
            }
        }
    }

    /// `true` if `v` lies in the open interior of `cell` (boundary contact
    /// within snapping tolerance counts as an exit).
    #[inline]
    pub fn inside(&self, cell: &Interval<T>, v: T) -> bool {
        let tol = self.snap_tol(v);
        v > cell.lo + tol && v < cell.hi - tol
    }

    /// Boundary of `cell` reached or passed by `v`.
    #[inline]
    fn exit_boundary(&self, cell: &Interval<T>, v: T) -> Option<(T, bool)> {
        let tol = self.snap_tol(v);
        if v <= cell.lo + tol {
            Some((cell.lo, v >= cell.lo - tol))
        } else if v >= cell.hi - tol {
            Some((cell.hi, v <= cell.hi + tol))
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cause {
    Start,
    DiffusionExit,
    JumpExit,
}

impl Cause {
    pub fn as_str(&self) -> &'static str {
        match self {
            Cause::Start => "start",
            Cause::DiffusionExit => "diffusion-exit",
            Cause::JumpExit => "jump-exit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation<T> {
    pub time: T,
    pub value: T,
    pub cause: Cause,
}

/// `α(n, p)`: continuous displacement since the last observation, at the
/// jump time `S_p`, divided by ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OvershootRecord<T> {
    pub index: usize,
    pub time: T,
    pub alpha: T,
}

/// Observations `(τ_j, X_{τ_j})` extracted from a path. `observations[0]`
/// is the start `τ_0 = 0`.
#[derive(Debug, Clone)]
pub struct SampledPath<T> {
    pub grid: GridScheme<T>,
    pub horizon: T,
    pub observations: Vec<Observation<T>>,
    pub jumps: Vec<JumpRecord<T>>,
    pub overshoots: Vec<OvershootRecord<T>>,
    pub warnings: Vec<String>,
}

/// Walks `path` applying the exit rule.
///
/// Diffusion samples on or beyond the current cell boundary produce an
/// observation at the boundary; when a sample lies strictly beyond it the
/// crossing time is interpolated linearly. A jump whose post-jump value
/// leaves the closed cell produces an observation at the jump time.
pub fn extract_observations<T: Real>(path: &InternalPath<T>, grid: &GridScheme<T>) -> SampledPath<T> {
    let first = path.points[0];
    let mut obs = Vec::with_capacity(path.points.len() / 2 + 2);
    obs.push(Observation { time: first.time, value: first.value, cause: Cause::Start });
    let mut overshoots = Vec::new();
    let mut cell = grid.cell_of(first.value);
    let (mut pt, mut px) = (first.time, first.value);
    // Sum of jumps since the last observation, to isolate the continuous part.
    let mut jump_drift = T::zero();
    let mut jump_idx = 0usize;

    for p in &path.points[1..] {
        let mut guard = 0usize;
        while let Some((b, on_boundary)) = grid.exit_boundary(&cell, p.left) {
            let tc = if on_boundary || p.left == px {
                p.time
            } else {
                let frac = ((b - px) / (p.left - px)).max(T::zero()).min(T::one());
                pt + (p.time - pt) * frac
            };
            obs.push(Observation { time: tc, value: b, cause: Cause::DiffusionExit });
            jump_drift = T::zero();
            cell = grid.cell_of(b);
            pt = tc;
            px = b;
            guard += 1;
            if on_boundary || guard > 1_000_000 {
                break;
            }
        }
        if p.value != p.left {
            let last = obs.last().expect("start observation");
            while jump_idx < path.jumps.len() && path.jumps[jump_idx].time < p.time {
                jump_idx += 1;
            }
            let index = path.jumps.get(jump_idx).filter(|j| j.time == p.time).map_or(overshoots.len() + 1, |j| j.index);
            let alpha = (p.left - last.value - jump_drift) / grid.eps;
            overshoots.push(OvershootRecord { index, time: p.time, alpha });
            if grid.inside(&cell, p.value) {
                jump_drift = jump_drift + (p.value - p.left);
            } else {
                obs.push(Observation { time: p.time, value: p.value, cause: Cause::JumpExit });
                jump_drift = T::zero();
                cell = grid.cell_of(p.value);
            }
        }
        pt = p.time;
        px = p.value;
    }

    let mut warnings = Vec::new();
    let end = path.points.last().map_or(T::zero(), |p| p.time);
    if end < path.horizon - path.horizon * T::lit(1e-12) {
        warnings.push(format!("path ends at t={} before horizon {}", end.as_f64(), path.horizon.as_f64()));
    }
    SampledPath { grid: *grid, horizon: path.horizon, observations: obs, jumps: path.jumps.clone(), overshoots, warnings }
}

impl<T: Real> SampledPath<T> {
    pub fn observation_count(&self, t: T) -> usize {
        self.observations.iter().skip(1).take_while(|o| o.time <= t).count()
    }

    /// Index of `τ⁻(t)`: the last observation strictly before `t`, or a
    /// diffusion exit exactly at `t`.
    pub fn last_observation_index(&self, t: T) -> usize {
        let k = self.observations.partition_point(|o| o.time < t);
        if let Some(o) = self.observations.get(k) {
            if o.time == t && o.cause != Cause::JumpExit {
                return k;
            }
        }
        k.saturating_sub(1)
    }

    pub fn last_observation(&self, t: T) -> &Observation<T> {
        &self.observations[self.last_observation_index(t)]
    }

    /// `t − τ⁻(t)`.
    pub fn age_at(&self, t: T) -> Result<T> {
        self.check_time(t)?;
        Ok(t - self.last_observation(t).time)
    }

    fn check_time(&self, t: T) -> Result<()> {
        if !(t >= T::zero()) || t > self.horizon {
            return Err(domain(format!("time {} outside [0, horizon]", t.as_f64())));
        }
        Ok(())
    }

    /// `ε⁻¹ (X^c_{t} − X^c_{τ⁻(t)})` using the left limit of `path` at `t`.
    pub fn overshoot_at(&self, t: T, path: &InternalPath<T>) -> Result<T> {
        self.check_time(t)?;
        let last = self.last_observation(t);
        if last.time == t {
            return Ok(T::zero());
        }
        let left = path.left_value_at(t);
        let jumps: T = self.jumps.iter().filter(|j| j.time > last.time && j.time < t).map(|j| j.size).sum();
        Ok((left - last.value - jumps) / self.grid.eps)
    }
}

/// Overshoot statistic at `t` directly from a path.
pub fn overshoot_at<T: Real>(t: T, path: &InternalPath<T>, grid: &GridScheme<T>) -> Result<T> {
    extract_observations(path, grid).overshoot_at(t, path)
}
