use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::ks::{ks_one_sample, ks_two_sample};
use super::limit::{gaussian_variance, limit_variance, sample_limit};
use crate::error::{config, Error, Result};
use crate::estimators::{boundary_term, quadratic_variation, realized_variance};
use crate::limit_law::LimitLaws;
use crate::model::{JumpRecord, JumpSpec, ModelSpec};
use crate::path_sim::{default_euler_step, max_euler_step, simulate, InternalPath, SchemeKind};
use crate::rng::{auxiliary_id, replication_id, stream};
use crate::scalar::Real;
use crate::scheme::{extract_observations, Cause, GridScheme, SampledPath};

pub const MIN_REPLICATIONS: usize = 100;

/// One Monte Carlo experiment at a single tick scale.
#[derive(Debug, Clone)]
pub struct Experiment<T> {
    pub spec: ModelSpec<T>,
    pub c: T,
    pub eps: T,
    pub scheme: SchemeKind,
    /// Euler step; defaults to [`default_euler_step`].
    pub delta: Option<T>,
    pub replications: usize,
    pub seed: u64,
    /// Worker threads; 0 uses the available parallelism.
    pub workers: usize,
    /// Limit-sampler draws for the jump-scenario comparison.
    pub limit_draws: usize,
    /// Stream block, distinguishing experiments sharing a seed.
    pub block: u32,
}

impl<T: Real> Experiment<T> {
    pub fn new(spec: ModelSpec<T>, c: T, eps: T, replications: usize, seed: u64) -> Self {
        Self {
            spec,
            c,
            eps,
            scheme: SchemeKind::Exact,
            delta: None,
            replications,
            seed,
            workers: 0,
            limit_draws: 1_000_000,
            block: 0,
        }
    }

    pub fn grid(&self) -> Result<GridScheme<T>> {
        GridScheme::new(self.eps, self.c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < MIN_REPLICATIONS {
            return Err(config(format!("replications must be at least {MIN_REPLICATIONS}, got {}", self.replications)));
        }
        self.validate_single()
    }

    /// Checks everything except the replication count.
    pub fn validate_single(&self) -> Result<()> {
        self.spec.validate()?;
        let grid = self.grid()?;
        match self.scheme {
            SchemeKind::Exact => {
                if !self.spec.drift.is_identically_zero() {
                    return Err(Error::UnsupportedScheme("the exact scheme needs zero drift; use euler-bridge".into()));
                }
            }
            SchemeKind::EulerBridge => {
                let d = self.delta();
                let limit = max_euler_step(&self.spec, grid.cell());
                if !(d > T::zero()) || d > limit {
                    return Err(config(format!(
                        "Euler step {} must lie in (0, {}]",
                        d.as_f64(),
                        limit.as_f64()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn delta(&self) -> T {
        self.delta.unwrap_or_else(|| default_euler_step(&self.spec, self.c * self.eps))
    }

    /// Fixed jump scenario, if the model has one (`None` for Poisson jumps).
    pub fn scenario(&self) -> Option<Vec<JumpRecord<T>>> {
        match &self.spec.jumps {
            JumpSpec::None => Some(Vec::new()),
            JumpSpec::Scenario(_) => {
                let mut rng = stream(0, 0);
                crate::path_sim::simulate_jumps(&self.spec, &mut rng).ok()
            }
            JumpSpec::Poisson { .. } => None,
        }
    }

    /// Simulates replication `rep` on its own stream.
    pub fn simulate_replication(&self, laws: &LimitLaws<T>, rep: u32) -> Result<(InternalPath<T>, SampledPath<T>)> {
        let grid = self.grid()?;
        let id = replication_id(self.block, rep);
        let mut rng = stream(self.seed, id);
        let mut path = simulate(self.scheme, &self.spec, &grid, laws, Some(self.delta()), &mut rng)?;
        path.stream = id;
        let sampled = extract_observations(&path, &grid);
        Ok((path, sampled))
    }
}

/// Per-replication output row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicationRecord {
    pub seed: u64,
    pub stream: u64,
    pub eps: f64,
    pub rv: f64,
    pub qv_cont: f64,
    pub qv_jump: f64,
    pub z: f64,
    pub n_obs: usize,
    pub boundary_term: f64,
    /// `ε⁻¹ (X^c_t − X^c_{τ⁻(t)})`.
    pub overshoot: f64,
    /// `ε⁻² (t − τ⁻(t))`.
    pub age: f64,
    /// Jumps up to `t` without an observation at the jump time.
    pub unobserved_jumps: usize,
}

impl ReplicationRecord {
    pub const CSV_HEADER: &'static str = "seed,stream,eps,rv,qv_cont,qv_jump,z,n_obs,boundary_term";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.seed, self.stream, self.eps, self.rv, self.qv_cont, self.qv_jump, self.z, self.n_obs, self.boundary_term
        )
    }
}

fn record<T: Real>(exp: &Experiment<T>, path: &InternalPath<T>, sampled: &SampledPath<T>) -> Result<ReplicationRecord> {
    let t = exp.spec.horizon;
    let eps = exp.eps;
    let rv = realized_variance(sampled, t);
    let qv = quadratic_variation(&exp.spec, &path.jumps, t);
    let overshoot = sampled.overshoot_at(t, path)?;
    let age = sampled.age_at(t)? / (eps * eps);
    let unobserved_jumps = path
        .jumps
        .iter()
        .filter(|j| j.time <= t)
        .filter(|j| {
            !sampled.observations.iter().any(|o| o.time == j.time && o.cause == Cause::JumpExit)
        })
        .count();
    Ok(ReplicationRecord {
        seed: exp.seed,
        stream: path.stream,
        eps: eps.as_f64(),
        rv: rv.as_f64(),
        qv_cont: qv.continuous.as_f64(),
        qv_jump: qv.jump.as_f64(),
        z: ((rv - qv.total) / eps).as_f64(),
        n_obs: sampled.observation_count(t),
        boundary_term: boundary_term(sampled, &exp.spec, &path.jumps, t).as_f64(),
        overshoot: overshoot.as_f64(),
        age: age.as_f64(),
        unobserved_jumps,
    })
}

/// Pass thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub ks_limit: f64,
    pub ks_limit_jumps: f64,
    pub ks_overshoot: f64,
    pub ks_age: f64,
    pub variance_rel: f64,
    pub trend_slack: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { ks_limit: 0.02, ks_limit_jumps: 0.025, ks_overshoot: 0.02, ks_age: 0.02, variance_rel: 0.05, trend_slack: 0.005 }
    }
}

/// Statistics at one tick scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsSummary {
    pub eps: f64,
    pub replications: usize,
    pub mean_z: f64,
    pub var_z: f64,
    pub var_z_std_error: f64,
    /// `(2/3) c² [X,X]_t`, for a fixed jump scenario.
    pub target_variance: Option<f64>,
    pub ks_limit: Option<f64>,
    pub ks_overshoot: f64,
    pub ks_age: f64,
    pub mean_abs_boundary_term: f64,
    pub mean_observations: f64,
    pub unobserved_jump_rate: Option<f64>,
    pub variance_ok: Option<bool>,
    pub ks_limit_ok: Option<bool>,
    pub ks_overshoot_ok: bool,
    pub ks_age_ok: bool,
    pub passed: bool,
}

/// Output of [`run_replications`] or [`convergence_sweep`]. Runtimes and
/// raw samples are kept out of the serialized form so that reports are
/// reproducible byte for byte.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub scheme: String,
    pub seed: u64,
    pub replications: usize,
    pub c: f64,
    pub horizon: f64,
    pub eps: Vec<f64>,
    pub jump_scenario: Option<Vec<(f64, f64)>>,
    pub thresholds: Thresholds,
    pub sweep: Vec<EpsSummary>,
    pub trend_ok: Option<bool>,
    pub passed: bool,
    #[serde(skip)]
    pub runtimes: Vec<f64>,
    #[serde(skip)]
    pub records: Vec<Vec<ReplicationRecord>>,
    #[serde(skip)]
    pub limit_samples: Vec<Option<Vec<f64>>>,
}

fn mean_var(x: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (n - 1.0);
    let m4 = x.iter().map(|a| (a - m).powi(4)).sum::<f64>() / n;
    // Standard error of the sample variance.
    let se = ((m4 - v * v * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt();
    (m, v, se)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if workers > 0 {
        b = b.num_threads(workers);
    }
    b.build().map_err(|e| config(format!("cannot start worker pool: {e}")))
}

/// Runs all replications of `exp` and returns the rows in replication order.
pub fn replicate<T: Real>(exp: &Experiment<T>, laws: &LimitLaws<T>) -> Result<Vec<ReplicationRecord>> {
    exp.validate()?;
    let n = u32::try_from(exp.replications).map_err(|_| config("too many replications"))?;
    pool(exp.workers)?.install(|| {
        (0..n)
            .into_par_iter()
            .map(|rep| {
                let (path, sampled) = exp.simulate_replication(laws, rep)?;
                record(exp, &path, &sampled)
            })
            .collect()
    })
}

struct EpsRun {
    summary: EpsSummary,
    records: Vec<ReplicationRecord>,
    limit: Option<Vec<f64>>,
    seconds: f64,
}

fn run_one<T: Real>(exp: &Experiment<T>, laws: &LimitLaws<T>, th: &Thresholds) -> Result<EpsRun> {
    let start = Instant::now();
    let records = replicate(exp, laws)?;
    let t = exp.spec.horizon;
    let z: Vec<f64> = records.iter().map(|r| r.z).collect();
    let (mean_z, var_z, var_z_std_error) = mean_var(&z);

    let scenario = exp.scenario();
    let has_jumps = scenario.as_ref().is_none_or(|s| !s.is_empty());
    let mut limit = None;
    let (target_variance, ks_limit) = match &scenario {
        Some(jumps) if jumps.is_empty() => {
            let sd = gaussian_variance(&exp.spec, t, exp.c).as_f64().sqrt();
            let ks = ks_one_sample(&z, |x: f64| (x / sd).norm_cdf())?;
            (Some(sd * sd), Some(ks))
        }
        Some(jumps) => {
            let mut rng = stream(exp.seed, auxiliary_id(exp.block));
            let draws = sample_limit(&exp.spec, jumps, t, exp.c, exp.limit_draws.max(1), &laws.eta, &mut rng);
            let draws: Vec<f64> = draws.into_iter().map(|v| v.as_f64()).collect();
            let ks = ks_two_sample(&z, &draws)?;
            limit = Some(draws);
            (Some(limit_variance(&exp.spec, jumps, t, exp.c).as_f64()), Some(ks))
        }
        None => (None, None),
    };

    let c = exp.c.as_f64();
    let eta_table = laws.eta.table();
    let ov: Vec<f64> = records.iter().map(|r| r.overshoot).collect();
    let ks_overshoot = ks_one_sample(&ov, |y: f64| eta_table.cdf(T::lit(y / c)).as_f64())?;
    let s_t = exp.spec.vol.eval(t).as_f64();
    let age_scale = s_t * s_t / (c * c);
    let ages: Vec<f64> = records.iter().map(|r| r.age).collect();
    let g = laws.renewal.table();
    let ks_age = ks_one_sample(&ages, |z: f64| g.cdf(T::lit(z * age_scale)).as_f64())?;

    let n = records.len() as f64;
    let mean_abs_boundary_term = records.iter().map(|r| r.boundary_term.abs()).sum::<f64>() / n;
    let mean_observations = records.iter().map(|r| r.n_obs as f64).sum::<f64>() / n;
    let unobserved_jump_rate = has_jumps.then(|| records.iter().filter(|r| r.unobserved_jumps > 0).count() as f64 / n);

    let variance_ok = target_variance.map(|tv| (var_z / tv - 1.0).abs() <= th.variance_rel);
    let ks_limit_ok = ks_limit.map(|k| k < if has_jumps { th.ks_limit_jumps } else { th.ks_limit });
    let ks_overshoot_ok = ks_overshoot < th.ks_overshoot;
    let ks_age_ok = ks_age < th.ks_age;
    let passed = variance_ok.unwrap_or(true) && ks_limit_ok.unwrap_or(true) && ks_overshoot_ok && ks_age_ok;

    Ok(EpsRun {
        summary: EpsSummary {
            eps: exp.eps.as_f64(),
            replications: records.len(),
            mean_z,
            var_z,
            var_z_std_error,
            target_variance,
            ks_limit,
            ks_overshoot,
            ks_age,
            mean_abs_boundary_term,
            mean_observations,
            unobserved_jump_rate,
            variance_ok,
            ks_limit_ok,
            ks_overshoot_ok,
            ks_age_ok,
            passed,
        },
        records,
        limit,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn scenario_f64<T: Real>(exp: &Experiment<T>) -> Option<Vec<(f64, f64)>> {
    exp.scenario().filter(|s| !s.is_empty()).map(|s| s.iter().map(|j| (j.time.as_f64(), j.size.as_f64())).collect())
}

/// Runs one experiment and summarizes it.
pub fn run_replications<T: Real>(exp: &Experiment<T>, laws: &LimitLaws<T>) -> Result<ValidationReport> {
    convergence_sweep(exp, &[exp.eps], laws)
}

/// `true` if `ks` is nonincreasing up to a single inversion of at most `slack`.
pub fn ks_trend_ok(ks: &[f64], slack: f64) -> bool {
    let mut inversions = 0;
    for w in ks.windows(2) {
        if w[1] > w[0] {
            if w[1] - w[0] > slack {
                return false;
            }
            inversions += 1;
        }
    }
    inversions <= 1
}

/// Runs the experiment at each tick scale of `eps_list` (decreasing).
/// Every scale uses its own stream block.
pub fn convergence_sweep<T: Real>(exp: &Experiment<T>, eps_list: &[T], laws: &LimitLaws<T>) -> Result<ValidationReport> {
    if eps_list.is_empty() {
        return Err(config("empty tick scale list"));
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(config("tick scales must be strictly decreasing"));
    }
    let runs: Vec<Experiment<T>> = eps_list
        .iter()
        .enumerate()
        .map(|(i, &eps)| Experiment { eps, block: exp.block + i as u32, ..exp.clone() })
        .collect();
    for r in &runs {
        r.validate()?;
    }
    let th = Thresholds::default();
    let mut sweep = Vec::with_capacity(runs.len());
    let mut runtimes = Vec::new();
    let mut records = Vec::new();
    let mut limit_samples = Vec::new();
    for r in &runs {
        let out = run_one(r, laws, &th)?;
        sweep.push(out.summary);
        runtimes.push(out.seconds);
        records.push(out.records);
        limit_samples.push(out.limit);
    }
    let trend_ok = if sweep.len() > 1 {
        let ks: Option<Vec<f64>> = sweep.iter().map(|s| s.ks_limit).collect();
        ks.map(|k| ks_trend_ok(&k, th.trend_slack))
    } else {
        None
    };
    let passed = sweep.last().is_some_and(|s| s.passed) && trend_ok.unwrap_or(true);
    Ok(ValidationReport {
        scheme: exp.scheme.as_str().to_string(),
        seed: exp.seed,
        replications: exp.replications,
        c: exp.c.as_f64(),
        horizon: exp.spec.horizon.as_f64(),
        eps: eps_list.iter().map(|e| e.as_f64()).collect(),
        jump_scenario: scenario_f64(exp),
        thresholds: th,
        sweep,
        trend_ok,
        passed,
        runtimes,
        records,
        limit_samples,
    })
}
