//! Acceptance criteria 1-10. Prints one line per criterion and exits
//! nonzero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use exitgrid::limit_law::{eval_h, eval_h_closed, ExitTimeDistribution, LimitLaws};
use exitgrid::model::{JumpSizeLaw, JumpSpec, ModelSpec};
use exitgrid::path_sim::{first_exit_euler_bridge, simulate_euler_bridge, simulate_exact};
use exitgrid::rng::stream;
use exitgrid::scheme::{extract_observations, Cause, GridScheme};
use exitgrid::validation::{ks_two_sample, run_replications, Experiment, ValidationReport};
use exitgrid::estimators::equidistant_rv;

const SEED: u64 = 20_261_019;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Standard normal density at `x`.
fn phi(x: f64, z: f64) -> f64 {
    (-x * x / (2.0 * z)).exp() / (2.0 * std::f64::consts::PI * z).sqrt()
}

/// Brute-force `h(y)`: composite Simpson over `z = s²` of a wide image sum.
fn h_oracle(y: f64) -> f64 {
    let kernel = |z: f64| (-40..=40).map(|m| phi(y - 4.0 * m as f64, z) - phi(y + 2.0 + 4.0 * m as f64, z)).sum::<f64>();
    let s_max = 60f64.sqrt();
    let n = 20_000;
    let ds = s_max / n as f64;
    let f = |s: f64| if s == 0.0 { 0.0 } else { 2.0 * s * kernel(s * s) };
    let mut acc = f(0.0) + f(s_max);
    for i in 1..n {
        acc += f(i as f64 * ds) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    // At s = 0 the integrand tends to 2 φ(0)·[y = 0] only for y = 0.
    let f0 = if y == 0.0 { 2.0 / (2.0 * std::f64::consts::PI).sqrt() } else { 0.0 };
    acc += f0 - f(0.0);
    acc * ds / 3.0
}

fn c1_density_identity() -> Outcome {
    let start = Instant::now();
    let mut oracle_err = 0f64;
    for k in -8..=8 {
        let y = k as f64 / 8.5;
        oracle_err = oracle_err.max((h_oracle(y) - eval_h_closed(y)).abs());
    }
    let n = 4097;
    let mut max_dev = 0f64;
    for i in 0..n {
        let y = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
        max_dev = max_dev.max((eval_h(y, 1e-8).unwrap() - (1.0 - y.abs())).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        max_dev <= 1e-6 && oracle_err <= 1e-8 && secs < 10.0,
        format!("max|h - (1-|y|)| = {max_dev:.2e} <= 1e-6, oracle vs closed form {oracle_err:.2e}, {secs:.1} s < 10 s"),
    )
}

fn c2_normalizations(laws: &LimitLaws<f64>) -> Outcome {
    let start = Instant::now();
    let mass_err = (laws.eta.total_mass() - 1.0).abs();
    let mut worst = 0f64;
    for (c, s) in [(1.0f64, 1.0f64), (0.5, 2.0), (2.0, 0.7)] {
        let target = c * c / (s * s);
        let e = ExitTimeDistribution::new(c, s, 1e-9).unwrap();
        worst = worst.max((e.mean_from_survival() - target).abs() / target);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        mass_err <= 1e-7 && worst <= 1e-6 && secs < 10.0,
        format!("|int h - 1| = {mass_err:.2e} <= 1e-7, max rel |int(1-F) - c^2/s^2| = {worst:.2e} <= 1e-6, {secs:.1} s"),
    )
}

fn continuous_run(laws: &LimitLaws<f64>) -> (ValidationReport, f64) {
    let start = Instant::now();
    let exp = Experiment::new(ModelSpec::brownian(1.0, 1.0), 1.0, 0.005, 10_000, SEED);
    let report = run_replications(&exp, laws).unwrap();
    (report, start.elapsed().as_secs_f64())
}

fn c3_overshoot(r: &ValidationReport, secs: f64) -> Outcome {
    let ks = r.sweep[0].ks_overshoot;
    outcome(ks < 0.02 && secs < 120.0, format!("KS(overshoot, c eta) = {ks:.4} < 0.02 over 1e4 paths, run {secs:.1} s < 120 s"))
}

fn c4_age(r: &ValidationReport) -> Outcome {
    let ks = r.sweep[0].ks_age;
    outcome(ks < 0.02, format!("KS(age / eps^2, G) = {ks:.4} < 0.02"))
}

fn c5_continuous_clt(r: &ValidationReport, secs: f64) -> Outcome {
    let s = &r.sweep[0];
    let ks = s.ks_limit.unwrap();
    outcome(
        (0.633..=0.700).contains(&s.var_z) && ks < 0.02 && secs < 300.0,
        format!("Var Z = {:.4} in [0.633, 0.700], KS vs N(0, 2/3) = {ks:.4} < 0.02, {secs:.1} s < 300 s", s.var_z),
    )
}

fn c6_jump_clt(laws: &LimitLaws<f64>) -> Outcome {
    let start = Instant::now();
    let spec = ModelSpec::brownian(1.0, 1.0).with_jumps(JumpSpec::Scenario(vec![(0.3, 1.0), (0.8, -0.7)]));
    let mut exp = Experiment::new(spec, 1.0, 0.005, 10_000, SEED);
    exp.limit_draws = 1_000_000;
    exp.block = 6;
    let r = run_replications(&exp, laws).unwrap();
    let s = &r.sweep[0];
    let target = 2.0 / 3.0 * (1.0 + 1.0 + 0.49);
    let ks = s.ks_limit.unwrap();
    let rel = (s.var_z / target - 1.0).abs();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        ks < 0.025 && rel <= 0.05 && secs < 600.0,
        format!("KS vs limit (1e6 draws) = {ks:.4} < 0.025, Var Z = {:.4} vs {target:.4} ({:.1}% <= 5%), {secs:.1} s", s.var_z, rel * 100.0),
    )
}

fn c7_scheme_fidelity(laws: &LimitLaws<f64>) -> Outcome {
    let grid = GridScheme::new(0.01, 1.0).unwrap();
    let cell = grid.cell();
    let big = [
        ModelSpec::brownian(1.0, 1.0).with_jumps(JumpSpec::Poisson {
            intensity: exitgrid::model::Curve::Constant(20.0),
            sizes: JumpSizeLaw::SymmetricFixed(2.01 * cell),
        }),
        ModelSpec::brownian(1.0, 1.0).with_jumps(JumpSpec::Scenario(vec![(0.25, 2.5 * cell), (0.5, -3.0 * cell), (0.75, 0.4)])),
    ];
    let mut jumps_seen = 0usize;
    let mut missed = 0usize;
    for (k, spec) in big.iter().enumerate() {
        for rep in 0..1000u64 {
            let mut rng = stream(SEED, (70 + k as u64) << 32 | rep);
            let p = simulate_exact(spec, &grid, laws, &mut rng).unwrap();
            let s = extract_observations(&p, &grid);
            for j in &p.jumps {
                jumps_seen += 1;
                if !s.observations.iter().any(|o| o.time == j.time && o.cause == Cause::JumpExit) {
                    missed += 1;
                }
            }
        }
    }
    // A jump of 0.3 c eps right after the start, from the centre of the
    // double cell around X_0 = 0.
    let small = ModelSpec::brownian(1.0, 1.0).with_jumps(JumpSpec::Scenario(vec![(1e-9, 0.3 * cell)]));
    let mut small_hits = 0usize;
    for rep in 0..1000u64 {
        let mut rng = stream(SEED, 72 << 32 | rep);
        let p = simulate_exact(&small, &grid, laws, &mut rng).unwrap();
        let s = extract_observations(&p, &grid);
        if s.observations.iter().any(|o| o.time == 1e-9) {
            small_hits += 1;
        }
    }
    outcome(
        missed == 0 && jumps_seen > 2000 && small_hits == 0,
        format!("{jumps_seen} jumps > 2 c eps in 2x1e3 paths, {missed} unobserved; small-jump observations {small_hits}/1000"),
    )
}

fn c8_cross_validation(laws: &LimitLaws<f64>) -> Outcome {
    let start = Instant::now();
    let grid = GridScheme::new(0.1, 1.0).unwrap();
    let spec = ModelSpec::brownian(1.0, 0.2);
    let delta = 1e-4;
    let n = 100_000u64;
    let mut exact = Vec::with_capacity(n as usize);
    let mut euler = Vec::with_capacity(n as usize);
    for rep in 0..n {
        let mut rng = stream(SEED, 80 << 32 | rep);
        let p = simulate_exact(&spec, &grid, laws, &mut rng).unwrap();
        let s = extract_observations(&p, &grid);
        exact.push(s.observations[1].time);
        let mut rng = stream(SEED, 81 << 32 | rep);
        euler.push(first_exit_euler_bridge(&spec, &grid, delta, &mut rng).unwrap().expect("exit before horizon").0);
    }
    let ks = ks_two_sample(&exact, &euler).unwrap();

    let spec = ModelSpec::brownian(1.0, 1.0);
    let paths = 4000u64;
    let (mut ne, mut nb) = (0usize, 0usize);
    for rep in 0..paths {
        let mut rng = stream(SEED, 82 << 32 | rep);
        ne += extract_observations(&simulate_exact(&spec, &grid, laws, &mut rng).unwrap(), &grid).observation_count(1.0);
        let mut rng = stream(SEED, 83 << 32 | rep);
        nb += extract_observations(&simulate_euler_bridge(&spec, &grid, delta, &mut rng).unwrap(), &grid).observation_count(1.0);
    }
    let (me, mb) = (ne as f64 / paths as f64, nb as f64 / paths as f64);
    let rel = (me / mb - 1.0).abs();
    outcome(
        ks < 0.01 && rel <= 0.01,
        format!(
            "KS(first exit, exact vs euler-bridge, 1e5 each) = {ks:.4} < 0.01; mean N_obs {me:.2} vs {mb:.2} ({:.2}% <= 1%), {:.1} s",
            rel * 100.0,
            start.elapsed().as_secs_f64()
        ),
    )
}

fn c9_equidistant() -> Outcome {
    let start = Instant::now();
    let spec = ModelSpec::brownian(1.0, 1.0);
    let grid = GridScheme::new(0.1, 1.0).unwrap();
    let n = 10_000usize;
    let reps = 10_000u64;
    let vals: Vec<f64> = (0..reps)
        .map(|rep| {
            let mut rng = stream(SEED, 90 << 32 | rep);
            let p = simulate_euler_bridge(&spec, &grid, 1.0 / n as f64, &mut rng).unwrap();
            equidistant_rv(&p, &spec, n, 1.0).unwrap().standardized
        })
        .collect();
    let m = vals.iter().sum::<f64>() / reps as f64;
    let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (reps - 1) as f64;
    outcome(
        (1.9..=2.1).contains(&var),
        format!("Var sqrt(n)(RV - QV) = {var:.4} in [1.9, 2.1] (endogenous factor 2/3), {:.1} s", start.elapsed().as_secs_f64()),
    )
}

fn run_cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_exitgrid")).args(args).output().map(|o| o.status.code().is_some()).unwrap_or(false)
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn c10_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(
        &cfg,
        r#"seed = 99
[model]
horizon = 1.0
vol = { family = "constant", value = 1.0 }
jumps = { kind = "scenario", times = [0.4], sizes = [0.3] }
[grid]
c = 1.0
eps_list = [0.04, 0.02]
[scheme]
name = "exact"
[validation]
replications = 200
limit_draws = 20000
[density]
y_points = 257
z_points = 65
"#,
    )
    .unwrap();
    let mut identical = true;
    let mut files = 0;
    for cmd in ["density-table", "simulate", "validate"] {
        let dirs: Vec<_> = ["a", "b"].iter().map(|s| tmp.path().join(format!("{cmd}-{s}"))).collect();
        for d in &dirs {
            let ok = run_cli(&[cmd, "--config", cfg.to_str().unwrap(), "--out", d.to_str().unwrap(), "--workers", "2"]);
            identical &= ok;
        }
        let (a, b) = (read_dir_bytes(&dirs[0]), read_dir_bytes(&dirs[1]));
        files += a.len();
        identical &= !a.is_empty() && a == b;
    }
    outcome(identical && files >= 10, format!("{files} output files byte-identical across two runs per subcommand"))
}

fn main() {
    let t0 = Instant::now();
    let laws = LimitLaws::build(1e-8).expect("limit laws");
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let report = |name: &'static str, o: Outcome, results: &mut Vec<(&str, Outcome)>| {
        println!("{name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((name, o));
    };
    report("criterion 1 density identity", c1_density_identity(), &mut results);
    report("criterion 2 normalizations", c2_normalizations(&laws), &mut results);
    let (run, secs) = continuous_run(&laws);
    report("criterion 3 overshoot law", c3_overshoot(&run, secs), &mut results);
    report("criterion 4 renewal age", c4_age(&run), &mut results);
    report("criterion 5 continuous CLT", c5_continuous_clt(&run, secs), &mut results);
    report("criterion 6 jump CLT", c6_jump_clt(&laws), &mut results);
    report("criterion 7 scheme fidelity", c7_scheme_fidelity(&laws), &mut results);
    report("criterion 8 simulator cross-validation", c8_cross_validation(&laws), &mut results);
    report("criterion 9 equidistant baseline", c9_equidistant(), &mut results);
    report("criterion 10 determinism", c10_determinism(), &mut results);
    let failed = results.iter().filter(|(_, o)| !o.pass).count();
    println!("acceptance: {} passed, {failed} failed, {:.1} s", results.len() - failed, t0.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
