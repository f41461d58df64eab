use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{QslError, Result};
use crate::estimator::{BandProfile, CampaignConfig, Recipe};
use crate::evolve::MetricMap;
use crate::grid::Grid;
use crate::iterate::{Form, Nonlinearity};

/// Environment variable naming the directory of bundled sample fields.
pub const DATA_DIR_VAR: &str = "QSL_DATA_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Decompose,
    Norms,
    VerifyEstimates,
    SolveLinear,
    SolveQuasilinear,
    AcceptanceSuite,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::Decompose => "decompose",
            Kind::Norms => "norms",
            Kind::VerifyEstimates => "verify-estimates",
            Kind::SolveLinear => "solve-linear",
            Kind::SolveQuasilinear => "solve-quasilinear",
            Kind::AcceptanceSuite => "acceptance-suite",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub dim: usize,
    pub length: f64,
    pub n: usize,
    pub nt: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            length: 2.0 * std::f64::consts::PI,
            n: 256,
            nt: 64,
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.dim, self.length, self.n, self.nt)
    }
}

/// Input field: a structured random field or a binary snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldConfig {
    Random { recipe: Recipe },
    /// Relative paths resolve against `QSL_DATA_DIR` when it is set.
    File { path: PathBuf },
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig::Random {
            recipe: Recipe::new(BandProfile::Flat { lo: 0, hi: 5 }, 1.0),
        }
    }
}

pub fn resolve_data_path(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Some(dir) = std::env::var_os(DATA_DIR_VAR) {
            return Path::new(&dir).join(path);
        }
    }
    path.to_path_buf()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormsConfig {
    pub s: f64,
}

impl Default for NormsConfig {
    fn default() -> Self {
        Self { s: 2.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinearConfig {
    /// Band of the localized problem; absent for the global problem.
    pub band: Option<usize>,
    /// `L2` norm of the datum, which lives in `band` (or bands `1..=4`).
    pub amplitude: f64,
    pub metric: MetricMap,
    /// `L2` size of the metric argument `w` at `t = 0`.
    pub metric_amplitude: f64,
    /// `L2` size of the forcing at `t = 0`.
    pub forcing_amplitude: f64,
    /// Regularity for the smallness gate of the local smoothing report.
    pub s: f64,
}

impl Default for LinearConfig {
    fn default() -> Self {
        Self {
            band: Some(3),
            amplitude: 1.0,
            metric: MetricMap::default(),
            metric_amplitude: 1e-3,
            forcing_amplitude: 0.0,
            s: 2.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatumConfig {
    /// `amplitude e^{i k x_1}`.
    PlaneWave { amplitude: f64, k: f64 },
    /// Random field rescaled to `||u_0||_{H^s} = epsilon`.
    Random { recipe: Recipe },
}

impl Default for DatumConfig {
    fn default() -> Self {
        let mut recipe = Recipe::new(BandProfile::Flat { lo: 1, hi: 3 }, 1.0);
        recipe.window = Some(0.25);
        DatumConfig::Random { recipe }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuasilinearConfig {
    pub form: Form,
    pub metric: MetricMap,
    pub nonlinearity: Nonlinearity,
    /// Absent: half a derivative above the threshold for `form`.
    pub s: Option<f64>,
    pub epsilon: f64,
    pub datum: DatumConfig,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for QuasilinearConfig {
    fn default() -> Self {
        Self {
            form: Form::Divergence,
            metric: MetricMap::default(),
            nonlinearity: Nonlinearity::default(),
            s: None,
            epsilon: 0.01,
            datum: DatumConfig::default(),
            tol: crate::iterate::TOL,
            max_iter: crate::iterate::MAX_ITER,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcceptanceConfig {
    /// Criterion numbers to run, `1..=10`.
    pub criteria: Vec<usize>,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        Self {
            criteria: (1..=10).collect(),
        }
    }
}

/// One experiment. Every section has defaults; the effective config is
/// echoed into the run manifest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub kind: Option<Kind>,
    pub seed: u64,
    pub grid: GridConfig,
    pub field: FieldConfig,
    pub norms: NormsConfig,
    pub campaign: CampaignConfig,
    pub linear: LinearConfig,
    pub quasilinear: QuasilinearConfig,
    pub acceptance: AcceptanceConfig,
}

fn config_error(e: impl std::fmt::Display) -> QslError {
    let msg = e.to_string();
    // toml reports "unknown field `x`" and the offending table path
    let key = msg
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "<document>".into());
    QslError::Config { key, message: msg }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(config_error)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Replace every seed in the config.
    pub fn override_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.campaign.seed = seed;
    }

    pub fn validate(&self) -> Result<Kind> {
        let kind = self.kind.ok_or_else(|| QslError::Config {
            key: "kind".into(),
            message: "experiment kind is required".into(),
        })?;
        self.grid.build().map_err(|e| QslError::Config {
            key: "grid".into(),
            message: e.to_string(),
        })?;
        if self.acceptance.criteria.iter().any(|c| !(1..=10).contains(c)) {
            return Err(QslError::Config {
                key: "acceptance.criteria".into(),
                message: "criteria are numbered 1..=10".into(),
            });
        }
        if self.quasilinear.epsilon <= 0.0 || self.quasilinear.tol <= 0.0 {
            return Err(QslError::Config {
                key: "quasilinear".into(),
                message: "epsilon and tol must be positive".into(),
            });
        }
        Ok(kind)
    }
}
