//! Run configuration read from TOML.
//!
//! Units: times in model time units (the horizon is `t`), prices and jump
//! sizes in price units, volatility in price per square-root time, jump
//! intensity in jumps per time unit. `eps` is in price units and `c` is
//! dimensionless.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use exitgrid::limit_law::DEFAULT_TOL;
use exitgrid::model::{Curve, JumpSizeLaw, JumpSpec, ModelSpec};
use exitgrid::validation::{Experiment, MIN_REPLICATIONS};
use exitgrid::SchemeKind;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum CurveConfig {
    Constant { value: f64 },
    Linear { intercept: f64, slope: f64 },
    Sinusoidal { level: f64, amplitude: f64, frequency: f64, #[serde(default)] phase: f64 },
}

impl CurveConfig {
    pub fn to_curve(&self) -> Curve<f64> {
        match *self {
            CurveConfig::Constant { value } => Curve::Constant(value),
            CurveConfig::Linear { intercept, slope } => Curve::Linear { intercept, slope },
            CurveConfig::Sinusoidal { level, amplitude, frequency, phase } => {
                Curve::Sinusoidal { level, amplitude, frequency, phase }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SizeLawConfig {
    Fixed { size: f64 },
    SymmetricFixed { size: f64 },
    Normal { mean: f64, std: f64 },
    Uniform { low: f64, high: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum JumpConfig {
    None,
    /// Fixed jumps: `times[i]` (time units) with `sizes[i]` (price units).
    Scenario { times: Vec<f64>, sizes: Vec<f64> },
    Poisson { intensity: CurveConfig, sizes: SizeLawConfig },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Horizon `t` (time units).
    pub horizon: f64,
    /// `X_0` (price units).
    #[serde(default)]
    pub initial: f64,
    #[serde(default = "zero_curve")]
    pub drift: CurveConfig,
    pub vol: CurveConfig,
    #[serde(default = "no_jumps")]
    pub jumps: JumpConfig,
}

fn zero_curve() -> CurveConfig {
    CurveConfig::Constant { value: 0.0 }
}

fn no_jumps() -> JumpConfig {
    JumpConfig::None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub c: f64,
    /// Tick scale for `simulate` and single-scale validation.
    pub eps: Option<f64>,
    /// Decreasing tick scales for a validation sweep.
    pub eps_list: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    /// `exact` or `euler-bridge`.
    pub name: String,
    /// Euler step (time units); defaults to `(c eps)^2 / 100 * inf sigma^2 / sup sigma^2`.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationConfig {
    pub replications: usize,
    #[serde(default = "default_limit_draws")]
    pub limit_draws: usize,
}

fn default_limit_draws() -> usize {
    1_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    /// Rows of the `h` table over `[-1, 1]`.
    #[serde(default = "default_y_points")]
    pub y_points: usize,
    /// Rows of the `F` and `G` tables.
    #[serde(default = "default_z_points")]
    pub z_points: usize,
    /// Largest tabulated `z`, in units of `c^2 / sigma^2` (time / eps^2).
    #[serde(default = "default_z_max")]
    pub z_max: f64,
}

impl Default for DensityConfig {
    fn default() -> Self {
        Self { y_points: default_y_points(), z_points: default_z_points(), z_max: default_z_max() }
    }
}

fn default_y_points() -> usize {
    exitgrid::tabulate::TABLE_NODES
}

fn default_z_points() -> usize {
    801
}

fn default_z_max() -> f64 {
    4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Worker threads; 0 uses the available parallelism.
    #[serde(default)]
    pub workers: usize,
    /// Left out of the provenance copy so outputs do not depend on their location.
    #[serde(default = "default_out", skip_serializing)]
    pub out: PathBuf,
    /// Absolute tolerance for series and quadrature.
    #[serde(default = "default_tol")]
    pub tol: f64,
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub scheme: SchemeConfig,
    pub validation: Option<ValidationConfig>,
    #[serde(default)]
    pub density: DensityConfig,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).context("invalid configuration")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(p) = &o.out {
            self.out = p.clone();
        }
        if let Some(t) = o.tol {
            self.tol = t;
        }
        if let Some(w) = o.workers {
            self.workers = w;
        }
    }

    /// The configuration as written into every output directory.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn scheme(&self) -> Result<SchemeKind> {
        Ok(SchemeKind::parse(&self.scheme.name)?)
    }

    pub fn model_spec(&self) -> Result<ModelSpec<f64>> {
        let m = &self.model;
        let jumps = match &m.jumps {
            JumpConfig::None => JumpSpec::None,
            JumpConfig::Scenario { times, sizes } => {
                if times.len() != sizes.len() {
                    bail!("jump scenario: {} times but {} sizes", times.len(), sizes.len());
                }
                JumpSpec::Scenario(times.iter().copied().zip(sizes.iter().copied()).collect())
            }
            JumpConfig::Poisson { intensity, sizes } => JumpSpec::Poisson {
                intensity: intensity.to_curve(),
                sizes: match *sizes {
                    SizeLawConfig::Fixed { size } => JumpSizeLaw::Fixed(size),
                    SizeLawConfig::SymmetricFixed { size } => JumpSizeLaw::SymmetricFixed(size),
                    SizeLawConfig::Normal { mean, std } => JumpSizeLaw::Normal { mean, std },
                    SizeLawConfig::Uniform { low, high } => JumpSizeLaw::Uniform { low, high },
                },
            },
        };
        let spec = ModelSpec { drift: m.drift.to_curve(), vol: m.vol.to_curve(), jumps, horizon: m.horizon, initial: m.initial };
        spec.validate()?;
        Ok(spec)
    }

    /// Tick scales to run, largest first.
    pub fn eps_list(&self) -> Result<Vec<f64>> {
        match (&self.grid.eps_list, self.grid.eps) {
            (Some(list), _) if !list.is_empty() => Ok(list.clone()),
            (_, Some(e)) => Ok(vec![e]),
            _ => bail!("grid needs eps or a nonempty eps_list"),
        }
    }

    /// Tick scale for single-path simulation: `eps`, else the smallest of `eps_list`.
    pub fn single_eps(&self) -> Result<f64> {
        match self.grid.eps {
            Some(e) => Ok(e),
            None => self.eps_list()?.last().copied().context("empty eps_list"),
        }
    }

    /// Experiment at the single tick scale, without replication checks.
    pub fn experiment(&self, eps: f64) -> Result<Experiment<f64>> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            bail!("tol must be positive");
        }
        let mut exp = Experiment::new(self.model_spec()?, self.grid.c, eps, MIN_REPLICATIONS, self.seed);
        exp.scheme = self.scheme()?;
        exp.delta = self.scheme.delta;
        exp.workers = self.workers;
        if let Some(v) = &self.validation {
            exp.replications = v.replications;
            exp.limit_draws = v.limit_draws;
        }
        exp.validate_single()?;
        Ok(exp)
    }

    /// Checks everything `validate` needs before any simulation.
    pub fn validation_experiment(&self) -> Result<(Experiment<f64>, Vec<f64>)> {
        let v = self.validation.as_ref().context("missing [validation] section")?;
        if v.replications < MIN_REPLICATIONS {
            bail!("replications must be at least {MIN_REPLICATIONS}, got {}", v.replications);
        }
        let list = self.eps_list()?;
        if list.windows(2).any(|w| !(w[1] < w[0])) {
            bail!("eps_list must be strictly decreasing");
        }
        let exp = self.experiment(list[0])?;
        for &e in &list {
            Experiment { eps: e, ..exp.clone() }.validate()?;
        }
        Ok((exp, list))
    }
}
