// SPDX-License-Identifier: MIT OR Apache-2.0

//! Flag groups and their merge with a JSON config file. Keys in the file
//! are the long flag names; flags override the file, the file overrides
//! built-in defaults.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use srcrqa::generators::ModelSystem;
use srcrqa::medit::LambdaGrid;
use srcrqa::oracles::DeletionMode;
use srcrqa::pipeline::{CorrectionConfig, PipelineParams};
use srcrqa::recurrence::{RqaParams, WindowSpec};
use srcrqa::surrogates::{SurrogateConfig, WeightConfig};
use srcrqa::SegmentationConfig;

use crate::error::CliError;

/// Keys a manifest carries besides the configuration.
pub const RESERVED_KEYS: [&str; 4] = ["command", "version", "outputs", "results"];

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SeriesOpts {
    /// Input CSV with a `time,value` header.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Subtract a Gaussian kernel smooth with this bandwidth (time units).
    #[arg(long)]
    pub detrend: Option<f64>,
    /// Keep every n-th sample.
    #[arg(long)]
    pub downsample: Option<usize>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SegmentOpts {
    /// Segment duration w.
    #[arg(long)]
    pub window_length: Option<f64>,
    /// Start of the first segment.
    #[arg(long)]
    pub origin: Option<f64>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CostOpts {
    /// Maximum shifting cost.
    #[arg(long = "lambda-0")]
    #[serde(rename = "lambda-0")]
    pub lambda_0: Option<f64>,
    /// Amplitude cost rate.
    #[arg(long)]
    pub lambda_k: Option<f64>,
    /// Estimate the amplitude cost rate from successive differences.
    #[arg(long)]
    pub estimate_lambda_k: Option<bool>,
    /// Logistic location; the mean sampling interval when omitted.
    #[arg(long)]
    pub shift_tau: Option<f64>,
    /// Fixed deletion/addition cost; skips the optimization.
    #[arg(long)]
    pub lambda_s: Option<f64>,
    /// Optimization grid `lo:hi:step`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Segments entering the optimization.
    #[arg(long)]
    pub optimization_segments: Option<usize>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RqaOpts {
    /// Recurrence rate.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Minimum diagonal line length.
    #[arg(long)]
    pub l_min: Option<usize>,
    /// Theiler window.
    #[arg(long)]
    pub theiler: Option<usize>,
    /// Segments per sliding window.
    #[arg(long)]
    pub window_size: Option<usize>,
    /// Overlap fraction of consecutive windows.
    #[arg(long)]
    pub overlap: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixFormat {
    Csv,
    Binary,
    None,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RqaOutputOpts {
    /// Format of the full distance matrix.
    #[arg(long, value_enum)]
    pub matrix_format: Option<MatrixFormat>,
    /// Also write the recurrence plot of the full matrix as `i,j` pairs.
    #[arg(long)]
    pub recurrence_plot: Option<bool>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SurrogateOpts {
    /// Number of realizations.
    #[arg(long)]
    pub realizations: Option<usize>,
    #[arg(long)]
    pub alpha0: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Shape increment per failed attempt.
    #[arg(long)]
    pub delta_alpha: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Restart the amplitude path at each segment.
    #[arg(long)]
    pub reanchor: Option<bool>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CorrectOpts {
    /// Upper quantile of the surrogate DET.
    #[arg(long)]
    pub quantile: Option<f64>,
    /// Optimize the deletion cost for every realization.
    #[arg(long)]
    pub per_surrogate_lambda: Option<bool>,
    /// Write every realization as CSV.
    #[arg(long)]
    pub write_ensemble: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SystemTag {
    Uniform,
    Ar1,
    Sinusoid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// AR(1) with a rising autocorrelation time and a fourfold rate jump.
    Reference,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GenerateOpts {
    #[arg(long, value_enum)]
    pub system: Option<SystemTag>,
    /// AR(1) autocorrelation time.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Sinusoid frequency.
    #[arg(long)]
    pub frequency: Option<f64>,
    /// Sinusoid noise standard deviation.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Skewness parameter of the gamma sampling intervals.
    #[arg(long)]
    pub gamma_skew: Option<f64>,
    /// Gamma scale of the sampling intervals.
    #[arg(long)]
    pub gamma_scale: Option<f64>,
    /// Record length.
    #[arg(long = "T", alias = "period")]
    #[serde(rename = "T")]
    pub period: Option<f64>,
    /// Replaces the generator settings with a named configuration.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct OracleOpts {
    /// Deletion cost matrix over `--rates`.
    #[arg(long)]
    pub deletion: Option<bool>,
    /// Rate grid `lo:hi:step`.
    #[arg(long)]
    pub rates: Option<String>,
    #[arg(long, value_enum)]
    pub deletion_mode: Option<DeletionModeTag>,
    /// Deletion cost used by the oracle matrices.
    #[arg(long)]
    pub indel_cost: Option<f64>,
    /// Normalization, Monte Carlo and closed-form checks of the count law.
    #[arg(long)]
    pub skellam_check: Option<bool>,
    /// Monte Carlo draws per rate pair.
    #[arg(long)]
    pub draws: Option<usize>,
    /// Shifting costs on exponential axes over `--rates`.
    #[arg(long)]
    pub shifting: Option<bool>,
    /// Size-resolved cost matrices on a gamma superpopulation.
    #[arg(long)]
    pub size_matrices: Option<bool>,
    #[arg(long = "oracle-system", value_enum)]
    #[serde(rename = "oracle-system")]
    pub system: Option<SystemTag>,
    /// Largest segment size of the size grid.
    #[arg(long)]
    pub max_size: Option<usize>,
    /// Series in the superpopulation.
    #[arg(long)]
    pub axes: Option<usize>,
    /// Sampled segment pairs per cell.
    #[arg(long)]
    pub replications: Option<usize>,
    /// Axis length of the experiments.
    #[arg(long)]
    pub oracle_period: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DeletionModeTag {
    Expected,
    PointEstimate,
}

impl From<DeletionModeTag> for DeletionMode {
    fn from(t: DeletionModeTag) -> Self {
        match t {
            DeletionModeTag::Expected => DeletionMode::Expected,
            DeletionModeTag::PointEstimate => DeletionMode::PointEstimate,
        }
    }
}

/// Flat key/value view of the merged configuration.
#[derive(Clone, Debug, Default)]
pub struct Layered {
    map: Map<String, Value>,
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

impl Layered {
    /// Loads a config file, rejecting keys that no flag group knows.
    pub fn from_file(text: &str, known: &[String]) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| CliError::Validation(format!("config is not valid JSON: {e}")))?;
        let Value::Object(mut map) = value else {
            return Err(CliError::Validation("config must be a JSON object".into()));
        };
        for key in RESERVED_KEYS {
            map.remove(key);
        }
        if let Some(k) = map.keys().find(|k| !known.contains(k)) {
            return Err(CliError::Validation(format!("unknown config key '{k}'")));
        }
        Ok(Self { map })
    }

    /// Overrides with every flag that was given.
    pub fn overlay<T: Serialize>(&mut self, flags: &T) {
        for (k, v) in object(serde_json::to_value(flags).expect("flag groups serialize")) {
            if !v.is_null() {
                self.map.insert(k, v);
            }
        }
    }

    pub fn set<T: Serialize>(&mut self, key: &str, value: T) {
        self.map.insert(
            key.into(),
            serde_json::to_value(value).expect("serializable"),
        );
    }

    pub fn get<T: DeserializeOwned>(&self, key: &str) -> Option<T> {
        self.map
            .get(key)
            .and_then(|v| serde_json::from_value(v.clone()).ok())
    }

    pub fn extract<T: DeserializeOwned>(&self) -> Result<T, CliError> {
        serde_json::from_value(Value::Object(self.map.clone()))
            .map_err(|e| CliError::Validation(format!("invalid config value: {e}")))
    }
}

/// Every key any flag group can hold.
pub fn known_keys() -> Vec<String> {
    let mut keys = vec!["seed".to_string(), "threads".to_string()];
    let groups = [
        serde_json::to_value(SeriesOpts::default()),
        serde_json::to_value(SegmentOpts::default()),
        serde_json::to_value(CostOpts::default()),
        serde_json::to_value(RqaOpts::default()),
        serde_json::to_value(RqaOutputOpts::default()),
        serde_json::to_value(SurrogateOpts::default()),
        serde_json::to_value(CorrectOpts::default()),
        serde_json::to_value(GenerateOpts::default()),
        serde_json::to_value(OracleOpts::default()),
    ];
    for g in groups {
        keys.extend(
            object(g.expect("flag groups serialize"))
                .into_iter()
                .map(|(k, _)| k),
        );
    }
    keys
}

/// Parses `lo:hi:step`.
pub fn parse_range(text: &str) -> Result<LambdaGrid, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::Validation(format!("expected lo:hi:step, got '{text}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let grid = LambdaGrid {
        lo: nums[0],
        hi: nums[1],
        step: nums[2],
    };
    grid.values()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(grid)
}

impl SeriesOpts {
    pub fn resolved(mut self) -> Result<Self, CliError> {
        if self.input.is_none() {
            return Err(CliError::Validation("--input is required".into()));
        }
        if self.downsample == Some(0) {
            return Err(CliError::Validation("--downsample must be >= 1".into()));
        }
        self.downsample.get_or_insert(1);
        Ok(self)
    }
}

impl SegmentOpts {
    pub fn resolved(mut self) -> Self {
        self.window_length.get_or_insert(1.0);
        self.origin.get_or_insert(0.0);
        self
    }

    pub fn config(&self) -> SegmentationConfig {
        SegmentationConfig::new(
            self.window_length.unwrap_or(1.0),
            self.origin.unwrap_or(0.0),
        )
    }
}

impl CostOpts {
    pub fn resolved(mut self) -> Self {
        self.lambda_0.get_or_insert(1.0);
        self.lambda_k.get_or_insert(1.0);
        self.estimate_lambda_k.get_or_insert(false);
        self.grid.get_or_insert_with(|| "0.1:10:0.1".into());
        self.optimization_segments.get_or_insert(400);
        self
    }
}

impl RqaOpts {
    pub fn resolved(mut self) -> Self {
        let d = RqaParams::default();
        self.rate.get_or_insert(d.rate);
        self.l_min.get_or_insert(d.l_min);
        self.theiler.get_or_insert(d.theiler);
        self.window_size.get_or_insert(200);
        self.overlap.get_or_insert(0.75);
        self
    }
}

/// Pipeline parameters from resolved groups.
pub fn pipeline_params(
    seg: &SegmentOpts,
    cost: &CostOpts,
    rqa: &RqaOpts,
) -> Result<PipelineParams, CliError> {
    let grid = parse_range(cost.grid.as_deref().unwrap_or("0.1:10:0.1"))?;
    let amplitude_cost = if cost.estimate_lambda_k == Some(true) {
        None
    } else {
        cost.lambda_k
    };
    let p = PipelineParams {
        segmentation: seg.config(),
        max_shift_cost: cost.lambda_0.unwrap_or(1.0),
        amplitude_cost,
        tau: cost.shift_tau,
        lambda_s: cost.lambda_s,
        grid,
        optimization_segments: cost.optimization_segments.unwrap_or(400),
        rqa: RqaParams {
            rate: rqa.rate.unwrap_or(0.15),
            l_min: rqa.l_min.unwrap_or(2),
            theiler: rqa.theiler.unwrap_or(1),
        },
        window: WindowSpec::new(rqa.window_size.unwrap_or(200), rqa.overlap.unwrap_or(0.75)),
    };
    p.segmentation.validate()?;
    p.window.validate()?;
    Ok(p)
}

impl SurrogateOpts {
    pub fn resolved(mut self, default_count: usize) -> Self {
        let w = WeightConfig::default();
        self.realizations.get_or_insert(default_count);
        self.alpha0.get_or_insert(w.alpha0);
        self.beta.get_or_insert(w.beta);
        self.delta_alpha.get_or_insert(w.delta_alpha);
        self.max_iterations.get_or_insert(w.max_iterations);
        self.reanchor.get_or_insert(false);
        self
    }

    pub fn config(&self) -> Result<SurrogateConfig, CliError> {
        let weights = WeightConfig {
            alpha0: self.alpha0.unwrap_or(1.0),
            beta: self.beta.unwrap_or(1.0),
            delta_alpha: self.delta_alpha.unwrap_or(0.15),
            max_iterations: self.max_iterations.unwrap_or(1000),
        };
        weights.validate()?;
        Ok(SurrogateConfig {
            weights,
            reanchor: self.reanchor.unwrap_or(false),
        })
    }
}

impl CorrectOpts {
    pub fn resolved(mut self) -> Self {
        self.quantile.get_or_insert(0.95);
        self.per_surrogate_lambda.get_or_insert(false);
        self.write_ensemble.get_or_insert(true);
        self
    }

    pub fn config(&self, sur: &SurrogateOpts) -> Result<CorrectionConfig, CliError> {
        let realizations = sur.realizations.unwrap_or(200);
        if realizations < 1 {
            return Err(CliError::Validation("--realizations must be >= 1".into()));
        }
        Ok(CorrectionConfig {
            realizations,
            surrogates: sur.config()?,
            per_surrogate_lambda: self.per_surrogate_lambda.unwrap_or(false),
            quantile: self.quantile.unwrap_or(0.95),
        })
    }
}

impl SystemTag {
    pub fn model(
        self,
        tau: Option<f64>,
        frequency: Option<f64>,
        noise: Option<f64>,
    ) -> ModelSystem {
        match self {
            SystemTag::Uniform => ModelSystem::Uniform,
            SystemTag::Ar1 => ModelSystem::Ar1 {
                tau: tau.unwrap_or(5.0),
            },
            SystemTag::Sinusoid => {
                let ModelSystem::Sinusoid {
                    frequency: f0,
                    noise: n0,
                } = ModelSystem::sinusoid()
                else {
                    unreachable!()
                };
                ModelSystem::Sinusoid {
                    frequency: frequency.unwrap_or(f0),
                    noise: noise.unwrap_or(n0),
                }
            }
        }
    }
}

impl GenerateOpts {
    pub fn resolved(mut self) -> Self {
        if self.preset.is_some() {
            return self;
        }
        let system = *self.system.get_or_insert(SystemTag::Ar1);
        match system {
            SystemTag::Ar1 => {
                self.tau.get_or_insert(5.0);
            }
            SystemTag::Sinusoid => {
                if let ModelSystem::Sinusoid { frequency, noise } = ModelSystem::sinusoid() {
                    self.frequency.get_or_insert(frequency);
                    self.noise.get_or_insert(noise);
                }
            }
            SystemTag::Uniform => {}
        }
        self.gamma_skew.get_or_insert(2.0);
        self.gamma_scale
            .get_or_insert(srcrqa::presets::DEFAULT_SCALE);
        self.period.get_or_insert(10_000.0);
        self
    }
}

impl OracleOpts {
    pub fn resolved(mut self) -> Result<Self, CliError> {
        self.deletion.get_or_insert(false);
        self.skellam_check.get_or_insert(false);
        self.shifting.get_or_insert(false);
        self.size_matrices.get_or_insert(false);
        if !(self.deletion == Some(true)
            || self.skellam_check == Some(true)
            || self.shifting == Some(true)
            || self.size_matrices == Some(true))
        {
            return Err(CliError::Validation(
                "choose at least one of --deletion, --skellam-check, --shifting, --size-matrices"
                    .into(),
            ));
        }
        self.rates.get_or_insert_with(|| "0.5:8:0.5".into());
        self.deletion_mode.get_or_insert(DeletionModeTag::Expected);
        self.indel_cost.get_or_insert(1.0);
        self.draws.get_or_insert(1_000_000);
        self.system.get_or_insert(SystemTag::Sinusoid);
        self.max_size.get_or_insert(20);
        self.axes.get_or_insert(100);
        self.replications.get_or_insert(100);
        self.oracle_period.get_or_insert(10_000.0);
        Ok(self)
    }
}
