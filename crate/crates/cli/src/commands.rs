//! The three subcommands. Each writes its files into the configured output
//! directory together with `run_config.toml`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use exitgrid::estimators::{boundary_term, quadratic_variation, realized_variance};
use exitgrid::limit_law::{eval_h, EtaDistribution, ExitTimeDistribution, LimitLaws, RenewalAgeDistribution};
use exitgrid::validation::{convergence_sweep, empirical_cdf, ValidationReport};
use exitgrid::Real;
use serde::Serialize;

use crate::config::RunConfig;

fn prepare(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out.clone();
    fs::create_dir_all(&dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    fs::write(dir.join("run_config.toml"), cfg.to_toml()).with_context(|| format!("cannot write to {}", dir.display()))?;
    Ok(dir)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensitySummary {
    pub files: Vec<PathBuf>,
    pub h_integral_error: f64,
    pub exit_mean: f64,
    pub exit_mean_target: f64,
}

/// Writes `(y, h)`, `(z, F)` and `(z, G)` tables.
///
/// `y` is in units of `c eps`. `z` is in time units divided by `eps^2`,
/// for cell half-width `c` and the volatility at time 0.
pub fn density_table(cfg: &RunConfig) -> Result<DensitySummary> {
    let dir = prepare(cfg)?;
    let tol = cfg.tol;
    let spec = cfg.model_spec()?;
    let sigma = spec.vol.eval(0.0);
    let c = cfg.grid.c;
    let d = &cfg.density;
    anyhow::ensure!(d.y_points >= 2 && d.z_points >= 2 && d.z_max > 0.0, "density table needs at least two rows and z_max > 0");

    let h_path = dir.join("h.csv");
    let mut w = csv_writer(&h_path)?;
    w.write_record(["y [c*eps]", "h [1/(c*eps)]"])?;
    for i in 0..d.y_points {
        let y = -1.0 + 2.0 * i as f64 / (d.y_points - 1) as f64;
        w.write_record([y.to_string(), eval_h(y, tol)?.to_string()])?;
    }
    w.flush()?;
    drop(w);
    let eta = EtaDistribution::build(tol)?;
    let h_integral_error = (eta.total_mass() - 1.0).abs();
    let mut f = fs::OpenOptions::new().append(true).open(&h_path)?;
    writeln!(f, "# |integral h - 1| = {h_integral_error:e}")?;

    let exit = ExitTimeDistribution::new(c, sigma, tol)?;
    let renewal = RenewalAgeDistribution::new(exit.clone())?;
    let f_path = dir.join("exit_time_cdf.csv");
    let g_path = dir.join("renewal_age_cdf.csv");
    let mut wf = csv_writer(&f_path)?;
    let mut wg = csv_writer(&g_path)?;
    wf.write_record(["z [time/eps^2]", "F"])?;
    wg.write_record(["z [time/eps^2]", "G"])?;
    let z_max = d.z_max * c * c / (sigma * sigma);
    for i in 0..d.z_points {
        let z = z_max * i as f64 / (d.z_points - 1) as f64;
        wf.write_record([z.to_string(), exit.cdf(z)?.to_string()])?;
        wg.write_record([z.to_string(), renewal.cdf(z)?.to_string()])?;
    }
    wf.flush()?;
    wg.flush()?;
    Ok(DensitySummary {
        files: vec![h_path, f_path, g_path],
        h_integral_error,
        exit_mean: exit.mean_from_survival(),
        exit_mean_target: c * c / (sigma * sigma),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub config: RunConfig,
    pub scheme: String,
    pub eps: f64,
    pub stream: u64,
    pub n_obs: usize,
    pub rv: f64,
    pub qv_continuous: f64,
    pub qv_jump: f64,
    pub qv_total: f64,
    pub z: f64,
    pub boundary_term: f64,
    pub warnings: Vec<String>,
}

/// Simulates one path and writes `path.csv` (observations),
/// `overshoots.csv` and `summary.json`.
pub fn simulate(cfg: &RunConfig) -> Result<SimulationSummary> {
    let eps = cfg.single_eps()?;
    let exp = cfg.experiment(eps)?;
    let dir = prepare(cfg)?;
    let laws = LimitLaws::build(cfg.tol)?;
    let (path, sampled) = exp.simulate_replication(&laws, 0)?;
    let t = exp.spec.horizon;

    let mut w = csv_writer(&dir.join("path.csv"))?;
    w.write_record(["j", "tau_j", "X", "cause"])?;
    for (j, o) in sampled.observations.iter().enumerate() {
        w.write_record([j.to_string(), o.time.to_string(), o.value.to_string(), o.cause.as_str().to_string()])?;
    }
    w.flush()?;
    let mut w = csv_writer(&dir.join("overshoots.csv"))?;
    w.write_record(["p", "S_p", "alpha"])?;
    for o in &sampled.overshoots {
        w.write_record([o.index.to_string(), o.time.to_string(), o.alpha.to_string()])?;
    }
    w.flush()?;

    let rv = realized_variance(&sampled, t);
    let qv = quadratic_variation(&exp.spec, &path.jumps, t);
    let summary = SimulationSummary {
        config: cfg.clone(),
        scheme: exp.scheme.as_str().to_string(),
        eps,
        stream: path.stream,
        n_obs: sampled.observation_count(t),
        rv,
        qv_continuous: qv.continuous,
        qv_jump: qv.jump,
        qv_total: qv.total,
        z: (rv - qv.total) / eps,
        boundary_term: boundary_term(&sampled, &exp.spec, &path.jumps, t),
        warnings: sampled.warnings.clone(),
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Serialize)]
struct ReportFile<'a> {
    config: &'a RunConfig,
    #[serde(flatten)]
    report: &'a ValidationReport,
}

/// Empirical CDF rows `(x, F_n(x), reference(x))`.
fn write_ecdf<F: Fn(f64) -> Option<f64>>(path: &Path, header: [&str; 3], sample: &[f64], reference: F) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header)?;
    for (x, p) in empirical_cdf(sample)? {
        w.write_record([x.to_string(), p.to_string(), opt(reference(x))])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the sweep and writes `report.json`, `replications.csv`,
/// `sweep.csv` and empirical CDF tables at the smallest tick scale.
pub fn validate(cfg: &RunConfig) -> Result<ValidationReport> {
    let (exp, list) = cfg.validation_experiment()?;
    let dir = prepare(cfg)?;
    let laws = LimitLaws::build(cfg.tol)?;
    let report = convergence_sweep(&exp, &list, &laws)?;
    write_json(&dir.join("report.json"), &ReportFile { config: cfg, report: &report })?;

    let mut w = csv_writer(&dir.join("replications.csv"))?;
    w.write_record(["seed", "stream", "eps", "rv", "qv_cont", "qv_jump", "z", "n_obs", "boundary_term"])?;
    for r in report.records.iter().flatten() {
        w.write_record([
            r.seed.to_string(),
            r.stream.to_string(),
            r.eps.to_string(),
            r.rv.to_string(),
            r.qv_cont.to_string(),
            r.qv_jump.to_string(),
            r.z.to_string(),
            r.n_obs.to_string(),
            r.boundary_term.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv_writer(&dir.join("sweep.csv"))?;
    w.write_record([
        "eps",
        "replications",
        "mean_z",
        "var_z",
        "var_z_std_error",
        "target_variance",
        "ks_limit",
        "ks_overshoot",
        "ks_age",
        "mean_abs_boundary_term",
        "mean_observations",
    ])?;
    for s in &report.sweep {
        w.write_record([
            s.eps.to_string(),
            s.replications.to_string(),
            s.mean_z.to_string(),
            s.var_z.to_string(),
            s.var_z_std_error.to_string(),
            opt(s.target_variance),
            opt(s.ks_limit),
            s.ks_overshoot.to_string(),
            s.ks_age.to_string(),
            s.mean_abs_boundary_term.to_string(),
            s.mean_observations.to_string(),
        ])?;
    }
    w.flush()?;

    let last = report.records.len() - 1;
    let recs = &report.records[last];
    let summary = &report.sweep[last];
    let z: Vec<f64> = recs.iter().map(|r| r.z).collect();
    let limit_sorted = report.limit_samples[last].as_ref().map(|s| {
        let mut v = s.clone();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    });
    let gaussian_var = summary.target_variance.filter(|_| report.jump_scenario.is_none());
    write_ecdf(&dir.join("ecdf_z.csv"), ["z", "empirical_cdf", "limit_cdf"], &z, |x| match (&limit_sorted, gaussian_var) {
        (Some(v), _) => Some(v.partition_point(|a| *a <= x) as f64 / v.len() as f64),
        (None, Some(var)) => Some((x / var.sqrt()).norm_cdf()),
        _ => None,
    })?;
    let c = exp.c;
    let ov: Vec<f64> = recs.iter().map(|r| r.overshoot).collect();
    write_ecdf(&dir.join("ecdf_overshoot.csv"), ["overshoot [eps]", "empirical_cdf", "limit_cdf"], &ov, |y| {
        Some(laws.eta.table().cdf(y / c))
    })?;
    let s_t = exp.spec.vol.eval(exp.spec.horizon);
    let ages: Vec<f64> = recs.iter().map(|r| r.age).collect();
    write_ecdf(&dir.join("ecdf_age.csv"), ["age [time/eps^2]", "empirical_cdf", "limit_cdf"], &ages, |z| {
        Some(laws.renewal.table().cdf(z * s_t * s_t / (c * c)))
    })?;
    Ok(report)
}
