//! Path simulation: an exact event-driven scheme for driftless models and
//! an Euler scheme with Brownian-bridge boundary correction.

use rand::Rng;
use rand_distr::{Distribution, InverseGaussian, StandardNormal};

use crate::error::{config, Result, Error};
use crate::limit_law::{confined_quantile, LimitLaws};
use crate::model::{JumpRecord, JumpSizeLaw, JumpSpec, ModelSpec};
use crate::scalar::Real;
use crate::scheme::{GridScheme, Interval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Exact,
    EulerBridge,
}

impl SchemeKind {
    pub const NAMES: [&'static str; 2] = ["exact", "euler-bridge"];

    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeKind::Exact => "exact",
            SchemeKind::EulerBridge => "euler-bridge",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "exact" => Ok(SchemeKind::Exact),
            "euler-bridge" => Ok(SchemeKind::EulerBridge),
            other => Err(config(format!("unknown scheme '{other}'; valid choices: {}", Self::NAMES.join(", ")))),
        }
    }
}

/// A path sample. `left` is `X_{t−}`; it differs from `value` only at a jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint<T> {
    pub time: T,
    pub left: T,
    pub value: T,
}

/// Piecewise description of a simulated path. Times are strictly
/// increasing, starting at 0 and ending at `horizon`.
#[derive(Debug, Clone)]
pub struct InternalPath<T> {
    pub points: Vec<PathPoint<T>>,
    pub jumps: Vec<JumpRecord<T>>,
    pub scheme: SchemeKind,
    pub stream: u64,
    pub horizon: T,
}

impl<T: Real> InternalPath<T> {
    /// `X_{t−}`: the left value of a point at `t`, else the value of the
    /// last point before `t`.
    pub fn left_value_at(&self, t: T) -> T {
        let k = self.points.partition_point(|p| p.time < t);
        match self.points.get(k) {
            Some(p) if p.time == t => p.left,
            _ => self.points[k.saturating_sub(1)].value,
        }
    }

    /// `X_t` (right-continuous).
    pub fn value_at(&self, t: T) -> T {
        let k = self.points.partition_point(|p| p.time <= t);
        self.points[k.saturating_sub(1)].value
    }

    pub fn terminal(&self) -> T {
        self.points.last().map_or(T::zero(), |p| p.value)
    }
}

fn sample_size<T: Real, R: Rng + ?Sized>(law: &JumpSizeLaw<T>, rng: &mut R) -> T {
    match *law {
        JumpSizeLaw::Fixed(v) => v,
        JumpSizeLaw::SymmetricFixed(v) => {
            if rng.random::<bool>() {
                v
            } else {
                -v
            }
        }
        JumpSizeLaw::Normal { mean, std } => {
            let z: f64 = StandardNormal.sample(rng);
            mean + std * T::lit(z)
        }
        JumpSizeLaw::Uniform { low, high } => low + (high - low) * T::lit(rng.random::<f64>()),
    }
}

/// Jump times and sizes on `(0, horizon]`, in chronological order.
///
/// Poisson jumps are drawn by thinning against the supremum of the
/// intensity.
pub fn simulate_jumps<T: Real, R: Rng + ?Sized>(spec: &ModelSpec<T>, rng: &mut R) -> Result<Vec<JumpRecord<T>>> {
    let mut raw: Vec<(T, T)> = match &spec.jumps {
        JumpSpec::None => Vec::new(),
        JumpSpec::Scenario(list) => list.iter().copied().filter(|&(t, _)| t <= spec.horizon).collect(),
        JumpSpec::Poisson { intensity, sizes } => {
            let (_, sup) = intensity.range(spec.horizon);
            if !sup.is_finite() {
                return Err(config("jump intensity supremum is not finite"));
            }
            let mut out = Vec::new();
            if sup > T::zero() {
                let mut t = T::zero();
                loop {
                    let e = -T::lit(1.0 - rng.random::<f64>()).ln() / sup;
                    t = t + e;
                    if t > spec.horizon {
                        break;
                    }
                    if T::lit(rng.random::<f64>()) * sup <= intensity.eval(t) {
                        out.push((t, sample_size(sizes, rng)));
                    }
                }
            }
            out
        }
    };
    raw.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite jump time"));
    Ok(raw.into_iter().enumerate().map(|(i, (time, size))| JumpRecord { index: i + 1, time, size }).collect())
}

/// Exact simulation of a driftless model.
///
/// Works in the operational clock `∫σ²`, where the continuous part is a
/// standard Brownian motion. Exits from the current cell are drawn from the
/// unit exit-time table: an off-centre start is handled by a sequence of
/// symmetric exits of radius `min(x − lo, hi − x)`. At jump times and the
/// horizon the position is drawn from the confined kernel.
pub fn simulate_exact<T: Real, R: Rng + ?Sized>(
    spec: &ModelSpec<T>,
    grid: &GridScheme<T>,
    laws: &LimitLaws<T>,
    rng: &mut R,
) -> Result<InternalPath<T>> {
    spec.validate()?;
    if !spec.drift.is_identically_zero() {
        return Err(Error::UnsupportedScheme("the exact scheme needs zero drift; use euler-bridge".into()));
    }
    let jumps = simulate_jumps(spec, rng)?;
    let clock = spec.time_change();
    let exit = laws.exit();
    let tol = laws.tol;
    let theta_end = clock.forward(spec.horizon);
    let jump_theta: Vec<T> = jumps.iter().map(|j| clock.forward(j.time)).collect();

    let expected = (theta_end / (grid.cell() * grid.cell())).to_usize().unwrap_or(0);
    let mut points = Vec::with_capacity(expected.saturating_mul(2).min(1 << 24) + jumps.len() + 2);
    let mut x = spec.initial;
    let mut theta = T::zero();
    let mut last_time = T::zero();
    points.push(PathPoint { time: T::zero(), left: x, value: x });
    let mut cell = grid.cell_of(x);
    let mut next = 0usize;

    loop {
        let mut r_lo = x - cell.lo;
        let mut r_hi = cell.hi - x;
        // Rounding can leave an on-grid start a few ulps off centre.
        if (r_lo - r_hi).abs() <= grid.snap_tol(x) {
            r_lo = r_lo.min(r_hi);
            r_hi = r_lo;
        }
        let r = r_lo.min(r_hi);
        let stop = jump_theta.get(next).copied().unwrap_or(theta_end).min(theta_end);
        let d_theta = r * r * exit.sample_unit_time(rng);
        let up = rng.random::<bool>();
        if theta + d_theta < stop {
            theta = theta + d_theta;
            let time = clock.inverse(theta);
            let (new_x, exited) = if up {
                if r_hi <= r_lo {
                    (cell.hi, true)
                } else {
                    (x + r, false)
                }
            } else if r_lo <= r_hi {
                (cell.lo, true)
            } else {
                (x - r, false)
            };
            x = new_x;
            if exited {
                cell = grid.cell_of(x);
            }
            if time > last_time {
                points.push(PathPoint { time, left: x, value: x });
                last_time = time;
            } else if let Some(p) = points.last_mut() {
                p.left = x;
                p.value = x;
            }
            continue;
        }
        let elapsed = (stop - theta) / (r * r);
        let y = if elapsed > T::zero() {
            x + r * confined_quantile(elapsed, T::lit(rng.random::<f64>()), tol)
        } else {
            x
        };
        theta = stop;
        if next < jumps.len() && jump_theta[next] <= theta_end {
            let j = jumps[next];
            next += 1;
            let right = y + j.size;
            points.push(PathPoint { time: j.time, left: y, value: right });
            last_time = j.time;
            x = right;
            if !grid.inside(&cell, x) {
                cell = grid.cell_of(x);
            }
            if j.time >= spec.horizon {
                break;
            }
        } else {
            points.push(PathPoint { time: spec.horizon, left: y, value: y });
            break;
        }
    }
    Ok(InternalPath { points, jumps, scheme: SchemeKind::Exact, stream: 0, horizon: spec.horizon })
}

/// Largest Euler step allowed for cell width `cell`.
pub fn max_euler_step<T: Real>(spec: &ModelSpec<T>, cell: T) -> T {
    let (_, smax) = spec.vol.range(spec.horizon);
    cell * cell / (T::lit(50.0) * smax * smax)
}

/// Default Euler step `(cε)² / 100 · inf σ² / sup σ²`.
pub fn default_euler_step<T: Real>(spec: &ModelSpec<T>, cell: T) -> T {
    let (smin, smax) = spec.vol.range(spec.horizon);
    cell * cell / T::lit(100.0) * (smin * smin) / (smax * smax)
}

struct Bridge<'a, T> {
    spec: &'a ModelSpec<T>,
    grid: &'a GridScheme<T>,
    t: T,
    x: T,
    cell: Interval<T>,
}

impl<T: Real> Bridge<'_, T> {
    /// Time from the step start to the first crossing of `b`, given the
    /// bridge from `x` to `x_end` crosses it.
    fn crossing_offset<R: Rng + ?Sized>(&self, b: T, x_end: T, var: T, dt: T, rng: &mut R) -> T {
        let d = (b - self.x).abs().as_f64();
        let e = (x_end - b).abs().as_f64();
        let var = var.as_f64();
        let v = if e > 0.0 {
            match InverseGaussian::new(d / e, d * d / var) {
                Ok(ig) => ig.sample(rng),
                Err(_) => 0.0,
            }
        } else {
            let z: f64 = StandardNormal.sample(rng);
            d * d / (var * z * z)
        };
        let s = if v.is_finite() { v / (1.0 + v) } else { 1.0 };
        dt * T::lit(s)
    }

    /// Diffuses to time `end`, recording boundary contacts. With
    /// `stop_on_exit` returns at the first contact.
    fn diffuse<R: Rng + ?Sized>(
        &mut self,
        end: T,
        rng: &mut R,
        mut points: Option<&mut Vec<PathPoint<T>>>,
        stop_on_exit: bool,
    ) -> Option<(T, T)> {
        while self.t < end {
            let dt = end - self.t;
            let s = self.spec.vol.eval(self.t);
            let a = self.spec.drift.eval(self.t);
            let z: f64 = StandardNormal.sample(rng);
            let x_end = self.x + a * dt + s * dt.sqrt() * T::lit(z);
            let var = s * s * dt;
            let mut hit: Option<(T, T)> = None;
            for b in [self.cell.lo, self.cell.hi] {
                let prod = (b - self.x) * (b - x_end);
                let crossed = if prod <= T::zero() {
                    true
                } else {
                    let p = (-T::lit(2.0) * prod / var).exp();
                    p > T::lit(1e-17) && T::lit(rng.random::<f64>()) < p
                };
                if crossed {
                    let off = self.crossing_offset(b, x_end, var, dt, rng);
                    if hit.is_none_or(|(o, _)| off < o) {
                        hit = Some((off, b));
                    }
                }
            }
            match hit {
                Some((off, b)) => {
                    let tc = (self.t + off).min(end);
                    self.t = tc;
                    self.x = b;
                    self.cell = self.grid.cell_of(b);
                    if let Some(pts) = points.as_deref_mut() {
                        if pts.last().is_none_or(|p| p.time < tc) {
                            pts.push(PathPoint { time: tc, left: b, value: b });
                        }
                    }
                    if stop_on_exit {
                        return Some((tc, b));
                    }
                }
                None => {
                    self.t = end;
                    self.x = x_end;
                }
            }
        }
        None
    }
}

fn check_step<T: Real>(spec: &ModelSpec<T>, grid: &GridScheme<T>, delta: T) -> Result<()> {
    if !(delta > T::zero() && delta.is_finite()) {
        return Err(config("Euler step must be positive"));
    }
    let limit = max_euler_step(spec, grid.cell());
    if delta > limit {
        return Err(config(format!(
            "Euler step {} exceeds (c eps)^2 / (50 sup sigma^2) = {}",
            delta.as_f64(),
            limit.as_f64()
        )));
    }
    Ok(())
}

/// Euler simulation on the grid `kδ` with Brownian-bridge detection of
/// boundary crossings between steps. After a crossing the step is resumed
/// from the boundary with a fresh increment, so every grid time `kδ` is
/// still sampled.
pub fn simulate_euler_bridge<T: Real, R: Rng + ?Sized>(
    spec: &ModelSpec<T>,
    grid: &GridScheme<T>,
    delta: T,
    rng: &mut R,
) -> Result<InternalPath<T>> {
    spec.validate()?;
    check_step(spec, grid, delta)?;
    let jumps = simulate_jumps(spec, rng)?;
    let steps = (spec.horizon / delta).ceil().to_usize().ok_or_else(|| config("too many Euler steps"))?;
    let mut points = Vec::with_capacity(steps + steps / 8 + jumps.len() + 2);
    points.push(PathPoint { time: T::zero(), left: spec.initial, value: spec.initial });
    let mut br = Bridge { spec, grid, t: T::zero(), x: spec.initial, cell: grid.cell_of(spec.initial) };
    let mut next = 0usize;
    for k in 1..=steps {
        let end = (T::from_usize_lossy(k) * delta).min(spec.horizon);
        while next < jumps.len() && jumps[next].time <= end {
            let j = jumps[next];
            next += 1;
            br.diffuse(j.time, rng, Some(&mut points), false);
            let left = br.x;
            br.x = left + j.size;
            if points.last().is_some_and(|p| p.time == j.time) {
                let p = points.last_mut().expect("non-empty");
                p.value = br.x;
            } else {
                points.push(PathPoint { time: j.time, left, value: br.x });
            }
            if !grid.inside(&br.cell, br.x) {
                br.cell = grid.cell_of(br.x);
            }
        }
        br.diffuse(end, rng, Some(&mut points), false);
        if points.last().is_none_or(|p| p.time < end) {
            points.push(PathPoint { time: end, left: br.x, value: br.x });
        }
    }
    Ok(InternalPath { points, jumps, scheme: SchemeKind::EulerBridge, stream: 0, horizon: spec.horizon })
}

/// First exit `(time, level)` of the Euler-bridge scheme from the start
/// cell, ignoring jumps; `None` if none before the horizon.
pub fn first_exit_euler_bridge<T: Real, R: Rng + ?Sized>(
    spec: &ModelSpec<T>,
    grid: &GridScheme<T>,
    delta: T,
    rng: &mut R,
) -> Result<Option<(T, T)>> {
    spec.validate()?;
    check_step(spec, grid, delta)?;
    let steps = (spec.horizon / delta).ceil().to_usize().ok_or_else(|| config("too many Euler steps"))?;
    let mut br = Bridge { spec, grid, t: T::zero(), x: spec.initial, cell: grid.cell_of(spec.initial) };
    for k in 1..=steps {
        let end = (T::from_usize_lossy(k) * delta).min(spec.horizon);
        if let Some(hit) = br.diffuse(end, rng, None, true) {
            return Ok(Some(hit));
        }
    }
    Ok(None)
}

/// Dispatches on `kind`; `delta` is only used by the Euler scheme and
/// defaults to [`default_euler_step`].
pub fn simulate<T: Real, R: Rng + ?Sized>(
    kind: SchemeKind,
    spec: &ModelSpec<T>,
    grid: &GridScheme<T>,
    laws: &LimitLaws<T>,
    delta: Option<T>,
    rng: &mut R,
) -> Result<InternalPath<T>> {
    match kind {
        SchemeKind::Exact => simulate_exact(spec, grid, laws, rng),
        SchemeKind::EulerBridge => {
            let d = delta.unwrap_or_else(|| default_euler_step(spec, grid.cell()));
            simulate_euler_bridge(spec, grid, d, rng)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Curve;
    use crate::rng::stream;

    fn laws() -> LimitLaws<f64> {
        LimitLaws::build(1e-8).unwrap()
    }

    #[test]
    fn exact_path_shape() {
        let spec = ModelSpec::brownian(1.0, 1.0).with_jumps(JumpSpec::Scenario(vec![(0.5, 0.37)]));
        let grid = GridScheme::new(0.05, 1.0).unwrap();
        let l = laws();
        let p = simulate_exact(&spec, &grid, &l, &mut stream(1, 0)).unwrap();
        assert_eq!(p.points[0].time, 0.0);
        assert_eq!(p.points.last().unwrap().time, 1.0);
        assert!(p.points.windows(2).all(|w| w[0].time < w[1].time));
        let jp: Vec<_> = p.points.iter().filter(|q| q.left != q.value).collect();
        assert_eq!(jp.len(), 1);
        assert!((jp[0].value - jp[0].left - 0.37).abs() < 1e-12);
    }

    #[test]
    fn exact_rejects_drift() {
        let spec = ModelSpec::brownian(1.0, 1.0).with_drift(Curve::Constant(0.1));
        let grid = GridScheme::new(0.05, 1.0).unwrap();
        let err = simulate_exact(&spec, &grid, &laws(), &mut stream(1, 0)).unwrap_err();
        assert!(matches!(err, Error::UnsupportedScheme(_)));
    }

    #[test]
    fn euler_step_precondition() {
        let spec = ModelSpec::brownian(1.0, 1.0);
        let grid = GridScheme::new(0.1, 1.0).unwrap();
        assert!(simulate_euler_bridge(&spec, &grid, 1e-3, &mut stream(1, 0)).is_err());
        let p = simulate_euler_bridge(&spec, &grid, 1e-4, &mut stream(1, 0)).unwrap();
        assert!(p.points.windows(2).all(|w| w[0].time < w[1].time));
        assert_eq!(p.points.last().unwrap().time, 1.0);
    }

    #[test]
    fn poisson_thinning_rate() {
        let spec = ModelSpec::brownian(1.0, 10.0).with_jumps(JumpSpec::Poisson {
            intensity: Curve::Linear { intercept: 1.0, slope: 0.2 },
            sizes: JumpSizeLaw::Fixed(0.1),
        });
        let mut rng = stream(3, 0);
        let n: usize = (0..2000).map(|_| simulate_jumps(&spec, &mut rng).unwrap().len()).sum();
        // E N = ∫ (1 + 0.2 t) dt over [0, 10] = 20.
        let mean = n as f64 / 2000.0;
        assert!((mean - 20.0).abs() < 0.5, "{mean}");
    }

    #[test]
    fn scheme_names() {
        assert_eq!(SchemeKind::parse("exact").unwrap(), SchemeKind::Exact);
        let e = SchemeKind::parse("milstein").unwrap_err().to_string();
        assert!(e.contains("exact") && e.contains("euler-bridge"));
    }
}
