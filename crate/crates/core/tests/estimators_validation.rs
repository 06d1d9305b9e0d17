use exitgrid::estimators::{boundary_term, quadratic_variation, realized_variance, standardized_stat};
use exitgrid::limit_law::{EtaDistribution, LimitLaws};
use exitgrid::model::{Curve, JumpRecord, JumpSizeLaw, JumpSpec, ModelSpec};
use exitgrid::path_sim::simulate_exact;
use exitgrid::rng::stream;
use exitgrid::scheme::{extract_observations, GridScheme};
use exitgrid::validation::{
    convergence_sweep, ks_one_sample, ks_two_sample, limit_variance, replicate, run_replications, sample_limit, Experiment,
};
use exitgrid::Error;
use std::sync::OnceLock;

fn laws() -> &'static LimitLaws<f64> {
    static L: OnceLock<LimitLaws<f64>> = OnceLock::new();
    L.get_or_init(|| LimitLaws::build(1e-8).unwrap())
}

fn var(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)
}

#[test]
fn rv_additive_at_observation_times() {
    let grid = GridScheme::new(0.05, 1.0).unwrap();
    let spec = ModelSpec::brownian(1.0, 1.0).with_jumps(JumpSpec::Scenario(vec![(0.4, 0.2)]));
    let p = simulate_exact(&spec, &grid, laws(), &mut stream(1, 0)).unwrap();
    let s = extract_observations(&p, &grid);
    let mid = s.observations[s.observations.len() / 3].time;
    let head = realized_variance(&s, mid);
    let whole = realized_variance(&s, 1.0);
    let tail: f64 = s
        .observations
        .windows(2)
        .filter(|w| w[1].time > mid && w[1].time <= 1.0)
        .map(|w| (w[1].value - w[0].value).powi(2))
        .sum();
    assert!((whole - head - tail).abs() < 1e-12);
}

#[test]
fn scaling_by_lambda() {
    // λX with grid λ ε reproduces the same path shape from the same stream.
    let lambda = 3.0;
    let g1 = GridScheme::new(0.02, 1.0).unwrap();
    let g2 = GridScheme::new(0.02 * lambda, 1.0).unwrap();
    let s1 = ModelSpec::brownian(1.0, 1.0).with_jumps(JumpSpec::Scenario(vec![(0.5, 0.1)]));
    let s2 = ModelSpec::brownian(lambda, 1.0).with_jumps(JumpSpec::Scenario(vec![(0.5, 0.1 * lambda)]));
    let p1 = simulate_exact(&s1, &g1, laws(), &mut stream(2, 0)).unwrap();
    let p2 = simulate_exact(&s2, &g2, laws(), &mut stream(2, 0)).unwrap();
    let (a, b) = (extract_observations(&p1, &g1), extract_observations(&p2, &g2));
    let rv1 = realized_variance(&a, 1.0);
    let rv2 = realized_variance(&b, 1.0);
    assert_eq!(a.observations.len(), b.observations.len());
    assert!((rv2 / rv1 - lambda * lambda).abs() < 1e-9);
    let q1 = quadratic_variation(&s1, &p1.jumps, 1.0).total;
    let q2 = quadratic_variation(&s2, &p2.jumps, 1.0).total;
    assert!((q2 / q1 - lambda * lambda).abs() < 1e-12);
    let z1 = standardized_stat(&a, &s1, &p1.jumps, 1.0, &g1).value;
    let z2 = standardized_stat(&b, &s2, &p2.jumps, 1.0, &g2).value;
    // Z = (RV − QV)/ε scales by λ²/λ = λ.
    assert!((z2 - lambda * z1).abs() < 1e-8 * z1.abs().max(1.0));
}

#[test]
fn boundary_term_is_order_eps() {
    let spec = ModelSpec::brownian(1.0, 1.0);
    for &eps in &[0.04, 0.01] {
        let grid = GridScheme::new(eps, 1.0).unwrap();
        let m: f64 = (0..400u64)
            .map(|r| {
                let p = simulate_exact(&spec, &grid, laws(), &mut stream(3, r)).unwrap();
                boundary_term(&extract_observations(&p, &grid), &spec, &p.jumps, 1.0).abs()
            })
            .sum::<f64>()
            / 400.0;
        // |σ²| times the age, which is of order (cε)².
        assert!(m <= 2.0 * eps, "eps={eps} mean={m}");
    }
}

#[test]
fn limit_sampler_examples() {
    let eta = EtaDistribution::build(1e-8).unwrap();
    let spec = ModelSpec::brownian(1.0, 1.0);
    let mut rng = stream(4, 0);
    let n = 200_000;
    let s = sample_limit(&spec, &[], 1.0, 1.0, n, &eta, &mut rng);
    let v = var(&s);
    let se = (2.0 / 3.0) * (2.0 / n as f64).sqrt();
    assert!((v - 2.0 / 3.0).abs() < 3.0 * se, "{v}");
    assert!(ks_one_sample(&s, |x: f64| exitgrid::Real::norm_cdf(x / (2.0f64 / 3.0).sqrt())).unwrap() < 0.01);

    // Vanishing volatility: the law of 2η, variance 4/6.
    let frozen = ModelSpec { vol: Curve::Constant(0.0), ..spec.clone() };
    let jumps = [JumpRecord { index: 1, time: 0.5, size: 1.0 }];
    let s = sample_limit(&frozen, &jumps, 1.0, 1.0, n, &eta, &mut rng);
    assert!(s.iter().all(|x| x.abs() <= 2.0));
    assert!((var(&s) - 2.0 / 3.0).abs() < 0.01);

    // Mixed scenarios: conditional variance (2/3) c² [X,X]_t.
    for (c, jumps) in [(1.0, vec![(0.3, 0.5), (0.7, -1.2)]), (2.0, vec![(0.1, 0.25)])] {
        let jr: Vec<JumpRecord<f64>> = jumps.iter().enumerate().map(|(i, &(time, size))| JumpRecord { index: i + 1, time, size }).collect();
        let s = sample_limit(&spec, &jr, 1.0, c, n, &eta, &mut rng);
        let target = limit_variance(&spec, &jr, 1.0, c);
        assert!((var(&s) / target - 1.0).abs() < 0.02);
    }
}

#[test]
fn ks_examples() {
    let a = [0.1, 0.5, 0.2];
    assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
    assert!(matches!(ks_two_sample::<f64>(&[], &a), Err(Error::Domain(_))));
    // Midpoints of thirds against U(0, 1): every gap is 1/6.
    let mid = [1.0 / 6.0, 0.5, 5.0 / 6.0];
    let d = ks_one_sample(&mid, |x: f64| x.clamp(0.0, 1.0)).unwrap();
    assert!((d - 1.0 / 6.0).abs() < 1e-15);
    assert!(ks_one_sample(&[f64::NAN], |x: f64| x).is_err());
}

#[test]
fn replications_are_reproducible() {
    let spec = ModelSpec::brownian(1.0, 1.0).with_jumps(JumpSpec::Scenario(vec![(0.5, 0.3)]));
    let mut exp = Experiment::new(spec, 1.0, 0.05, 100, 17);
    exp.limit_draws = 10_000;
    let a = run_replications(&exp, laws()).unwrap();
    let b = run_replications(&exp, laws()).unwrap();
    assert_eq!(a.sweep, b.sweep);
    assert_eq!(a.records, b.records);
    assert!(a.jump_scenario.is_some());

    let plain = Experiment::new(ModelSpec::brownian(1.0, 1.0), 1.0, 0.05, 100, 17);
    let r = run_replications(&plain, laws()).unwrap();
    assert!(r.jump_scenario.is_none());
    assert!(r.limit_samples[0].is_none());
    assert!(r.sweep[0].unobserved_jump_rate.is_none());
}

#[test]
fn poisson_runs_skip_limit_comparison() {
    let spec = ModelSpec::brownian(1.0, 1.0).with_jumps(JumpSpec::Poisson {
        intensity: Curve::Constant(2.0),
        sizes: JumpSizeLaw::SymmetricFixed(0.5),
    });
    let r = run_replications(&Experiment::new(spec, 1.0, 0.05, 100, 3), laws()).unwrap();
    assert!(r.sweep[0].ks_limit.is_none() && r.sweep[0].target_variance.is_none());
    assert!(r.sweep[0].unobserved_jump_rate == Some(0.0));
}

#[test]
fn std_error_halves_with_double_r() {
    let base = Experiment::new(ModelSpec::brownian(1.0, 1.0), 1.0, 0.05, 400, 21);
    let big = Experiment { replications: 1600, ..base.clone() };
    let s1 = run_replications(&base, laws()).unwrap().sweep[0].var_z_std_error;
    let s2 = run_replications(&big, laws()).unwrap().sweep[0].var_z_std_error;
    // Quadrupling R halves the standard error; doubling halves its square.
    let ratio = (s1 / s2).powi(2);
    assert!((ratio / 4.0 - 1.0).abs() < 0.3, "{ratio}");
}

#[test]
fn sweep_trend_and_validation() {
    let exp = Experiment::new(ModelSpec::brownian(1.0, 1.0), 1.0, 0.04, 2000, 5);
    let r = convergence_sweep(&exp, &[0.04, 0.02, 0.01], laws()).unwrap();
    assert_eq!(r.sweep.len(), 3);
    assert!(r.trend_ok.is_some());
    let last = r.sweep.last().unwrap();
    assert!((last.var_z / (2.0 / 3.0) - 1.0).abs() < 0.1);
    assert!(convergence_sweep(&exp, &[0.01, 0.02], laws()).is_err());
    assert!(matches!(replicate(&Experiment { replications: 50, ..exp }, laws()), Err(Error::Config(_))));
}
