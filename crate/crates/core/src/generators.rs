// SPDX-License-Identifier: MIT OR Apache-2.0

//! Synthetic irregular time axes and model systems evaluated on them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::IrregularSeries;

pub(crate) fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gamma-distributed sampling intervals parameterized by a skewness-like
/// parameter `Γ`, from which the shape is derived as `k = sqrt(2 / Γ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaAxisConfig {
    pub skewness: f64,
    pub scale: f64,
    pub period: f64,
    pub seed: u64,
}

impl GammaAxisConfig {
    pub fn new(skewness: f64, scale: f64, period: f64, seed: u64) -> Self {
        Self {
            skewness,
            scale,
            period,
            seed,
        }
    }

    /// Picks the scale so that the mean interval `k Θ` equals `mean_interval`.
    pub fn with_mean_interval(skewness: f64, mean_interval: f64, period: f64, seed: u64) -> Self {
        let shape = shape_from_skewness(skewness);
        Self::new(skewness, mean_interval / shape, period, seed)
    }

    pub fn shape(&self) -> f64 {
        shape_from_skewness(self.skewness)
    }

    pub fn mean_interval(&self) -> f64 {
        self.shape() * self.scale
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("skewness", self.skewness),
            ("scale", self.scale),
            ("period", self.period),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!(
                    "gamma axis {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    fn distribution(&self) -> Gamma<f64> {
        Gamma::new(self.shape(), self.scale).expect("validated gamma parameters")
    }
}

pub fn shape_from_skewness(skewness: f64) -> f64 {
    (2.0 / skewness).sqrt()
}

/// Cumulative sum of i.i.d. gamma intervals starting at 0, truncated before
/// `cfg.period`.
pub fn generate_gamma_axis(cfg: &GammaAxisConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let dist = cfg.distribution();
    let mut rng = rng_from(cfg.seed);
    let mut times = Vec::with_capacity((cfg.period / cfg.mean_interval()) as usize + 16);
    let mut t = 0.0;
    loop {
        t = advance(t, &dist, &mut rng);
        if t >= cfg.period {
            break;
        }
        times.push(t);
    }
    Ok(times)
}

// Gamma draws with small shape can be so small that `t + d == t`, which
// would create duplicate timestamps.
fn advance<R: Rng>(t: f64, dist: &Gamma<f64>, rng: &mut R) -> f64 {
    loop {
        let next = t + dist.sample(rng);
        if next > t {
            return next;
        }
    }
}

/// Gamma axis whose interval distribution switches once, at `change_time`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateShiftAxisConfig {
    pub before: GammaAxisConfig,
    pub after: GammaAxisConfig,
    pub change_time: f64,
    pub period: f64,
    pub seed: u64,
}

impl RateShiftAxisConfig {
    /// Ratio of the sampling rates after and before the change point.
    pub fn rate_ratio(&self) -> f64 {
        self.before.mean_interval() / self.after.mean_interval()
    }
}

pub fn generate_rate_shift_axis(cfg: &RateShiftAxisConfig) -> Result<Vec<f64>> {
    cfg.before.validate()?;
    cfg.after.validate()?;
    if !(cfg.period > 0.0) {
        return Err(Error::invalid("axis period must be positive"));
    }
    let early = cfg.before.distribution();
    let late = cfg.after.distribution();
    let mut rng = rng_from(cfg.seed);
    let mut times = Vec::new();
    let mut t = 0.0;
    loop {
        let dist = if t < cfg.change_time { &early } else { &late };
        t = advance(t, dist, &mut rng);
        if t >= cfg.period {
            break;
        }
        times.push(t);
    }
    Ok(times)
}

/// Model systems sampled at irregular times.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "lowercase")]
pub enum ModelSystem {
    /// i.i.d. `U(0, 1)`.
    Uniform,
    /// Continuous-time AR(1) with autocorrelation time `tau`, unit variance.
    Ar1 { tau: f64 },
    /// `sin(2π ν t)` plus Gaussian noise with standard deviation `noise`.
    Sinusoid { frequency: f64, noise: f64 },
}

impl ModelSystem {
    pub fn ar1() -> Self {
        ModelSystem::Ar1 { tau: 5.0 }
    }

    pub fn sinusoid() -> Self {
        ModelSystem::Sinusoid {
            frequency: 1.0 / 25.0,
            noise: 0.1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSystem::Uniform => "uniform",
            ModelSystem::Ar1 { .. } => "ar1",
            ModelSystem::Sinusoid { .. } => "sinusoid",
        }
    }

    /// Parses a system tag with the default parameters of each system.
    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "uniform" => Ok(ModelSystem::Uniform),
            "ar1" => Ok(ModelSystem::ar1()),
            "sinusoid" | "sin" => Ok(ModelSystem::sinusoid()),
            other => Err(Error::invalid(format!("unknown model system '{other}'"))),
        }
    }
}

pub fn generate_model(system: ModelSystem, times: &[f64], seed: u64) -> Result<IrregularSeries> {
    if times.len() < 2 {
        return Err(Error::invalid("model axis needs at least 2 samples"));
    }
    let mut rng = rng_from(seed);
    let values = match system {
        ModelSystem::Uniform => times.iter().map(|_| rng.random::<f64>()).collect(),
        ModelSystem::Ar1 { tau } => {
            if !(tau >= 0.0) {
                return Err(Error::invalid("AR(1) autocorrelation time must be >= 0"));
            }
            ar1_path(times, |_| tau, &mut rng)
        }
        ModelSystem::Sinusoid { frequency, noise } => times
            .iter()
            .map(|&t| {
                let eps: f64 = rng.sample(StandardNormal);
                (std::f64::consts::TAU * frequency * t).sin() + noise * eps
            })
            .collect(),
    };
    IrregularSeries::new(times.to_vec(), values)
}

/// Unit-variance AR(1) path with `φ_i = exp(-Δ_i / τ(t_i))`.
fn ar1_path<R: Rng>(times: &[f64], tau_at: impl Fn(f64) -> f64, rng: &mut R) -> Vec<f64> {
    let mut values = Vec::with_capacity(times.len());
    let mut x: f64 = rng.sample(StandardNormal);
    values.push(x);
    for w in times.windows(2) {
        let tau = tau_at(w[1]);
        let phi = if tau > 0.0 {
            (-(w[1] - w[0]) / tau).exp()
        } else {
            0.0
        };
        let eps: f64 = rng.sample(StandardNormal);
        x = phi * x + (1.0 - phi * phi).sqrt() * eps;
        values.push(x);
    }
    values
}

/// AR(1) with an autocorrelation time rising linearly from `tau_start` at
/// `t = 0` to `tau_end` at `t = axis.period`, on an axis with one abrupt
/// change of the sampling rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ar1RampConfig {
    pub tau_start: f64,
    pub tau_end: f64,
    pub axis: RateShiftAxisConfig,
    pub seed: u64,
}

impl Ar1RampConfig {
    pub fn tau_at(&self, t: f64) -> f64 {
        let frac = (t / self.axis.period).clamp(0.0, 1.0);
        self.tau_start + frac * (self.tau_end - self.tau_start)
    }
}

pub fn generate_ar1_ramp(cfg: &Ar1RampConfig) -> Result<IrregularSeries> {
    if !(cfg.tau_start > 0.0 && cfg.tau_end >= cfg.tau_start) {
        return Err(Error::invalid(format!(
            "need 0 < tau_start <= tau_end, got {} and {}",
            cfg.tau_start, cfg.tau_end
        )));
    }
    let times = generate_rate_shift_axis(&cfg.axis)?;
    if times.len() < 2 {
        return Err(Error::invalid("generated axis has fewer than 2 samples"));
    }
    let mut rng = rng_from(cfg.seed);
    let values = ar1_path(&times, |t| cfg.tau_at(t), &mut rng);
    IrregularSeries::new(times, values)
}
