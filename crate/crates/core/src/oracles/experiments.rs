// SPDX-License-Identifier: MIT OR Apache-2.0

//! Monte Carlo cost matrices over sampling rates or segment sizes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rand_distr::{Distribution, Poisson};

use super::special::{expected_abs_difference, expected_deletion_cost, skellam_pmf};
use crate::error::{Error, Result};
use crate::generators::{generate_gamma_axis, generate_model, GammaAxisConfig, ModelSystem};
use crate::medit::{edit_distance_events, edit_distance_with_policy, CostParams, DeletionPolicy};
use crate::presets::{superpopulation_skewness, DEFAULT_SCALE};
use crate::series::{segment, IrregularSeries, Segment, SegmentationConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Total,
    PerOperation,
    Deletion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeletionMode {
    /// `Λ_S |λ1 - λ2|`.
    PointEstimate,
    /// `Λ_S E|X - Y|` for Poisson counts.
    Expected,
}

/// `cells[i][j]` belongs to row value `rows[i]` and column value `cols[j]`.
/// Cells without data are `None`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostMatrixResult {
    pub kind: MatrixKind,
    pub rows: Vec<f64>,
    pub cols: Vec<f64>,
    pub cells: Vec<Vec<Option<f64>>>,
    pub replications: usize,
}

impl CostMatrixResult {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.cells[i][j]
    }

    /// Largest `|c_ij - c_ji|` over cells present on both sides.
    pub fn asymmetry(&self) -> f64 {
        let n = self.rows.len().min(self.cols.len());
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (self.cells[i][j], self.cells[j][i]) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
        worst
    }
}

fn check_rates(rates: &[f64]) -> Result<()> {
    if rates.is_empty() {
        return Err(Error::invalid("rate grid is empty"));
    }
    if let Some(r) = rates.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::invalid(format!(
            "rates must be positive and finite, got {r}"
        )));
    }
    Ok(())
}

pub fn deletion_cost_matrix(
    rates: &[f64],
    indel_cost: f64,
    mode: DeletionMode,
) -> Result<CostMatrixResult> {
    check_rates(rates)?;
    let cells = rates
        .iter()
        .map(|&l1| {
            rates
                .iter()
                .map(|&l2| match mode {
                    DeletionMode::PointEstimate => Ok(Some(indel_cost * (l1 - l2).abs())),
                    DeletionMode::Expected => expected_deletion_cost(l1, l2, indel_cost).map(Some),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CostMatrixResult {
        kind: MatrixKind::Deletion,
        rows: rates.to_vec(),
        cols: rates.to_vec(),
        cells,
        replications: 0,
    })
}

/// SplitMix64 finalizer over `(base, stream, index)`.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Total and per-operation matrices built from one set of sampled pairs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftingCosts {
    pub total: CostMatrixResult,
    pub per_operation: CostMatrixResult,
}

/// Mean of `d` and mean of `(d - Λ_S |N_a - N_b|) / max(N_a, N_b)` over
/// pairs with at least one sample.
fn summarize(samples: &[(f64, usize, usize)], indel: f64) -> (Option<f64>, Option<f64>) {
    if samples.is_empty() {
        return (None, None);
    }
    let total = samples.iter().map(|s| s.0).sum::<f64>() / samples.len() as f64;
    let per_op: Vec<f64> = samples
        .iter()
        .filter(|s| s.1.max(s.2) > 0)
        .map(|&(d, na, nb)| (d - indel * na.abs_diff(nb) as f64) / na.max(nb) as f64)
        .collect();
    let per_op = if per_op.is_empty() {
        None
    } else {
        Some(per_op.iter().sum::<f64>() / per_op.len() as f64)
    };
    (Some(total), per_op)
}

fn assemble(
    rows: Vec<f64>,
    cols: Vec<f64>,
    replications: usize,
    cells: Vec<(Option<f64>, Option<f64>)>,
) -> ShiftingCosts {
    let width = cols.len();
    let split = |pick: fn(&(Option<f64>, Option<f64>)) -> Option<f64>| {
        cells
            .chunks(width)
            .map(|r| r.iter().map(pick).collect())
            .collect()
    };
    ShiftingCosts {
        total: CostMatrixResult {
            kind: MatrixKind::Total,
            rows: rows.clone(),
            cols: cols.clone(),
            cells: split(|c| c.0),
            replications,
        },
        per_operation: CostMatrixResult {
            kind: MatrixKind::PerOperation,
            rows,
            cols,
            cells: split(|c| c.1),
            replications,
        },
    }
}

/// Events on exponential axes, one axis per rate, linear shifting costs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateExperiment {
    pub rates: Vec<f64>,
    pub replications: usize,
    pub period: f64,
    pub window: f64,
    pub indel_cost: f64,
    pub shift_rate: f64,
    pub policy: DeletionPolicy,
    pub seed: u64,
}

impl Default for RateExperiment {
    fn default() -> Self {
        Self {
            rates: (1..=16).map(|i| 0.5 * i as f64).collect(),
            replications: 10_000,
            period: 10_000.0,
            window: 1.0,
            indel_cost: 1.0,
            shift_rate: 1.0,
            policy: DeletionPolicy::BasicOnly,
            seed: 0,
        }
    }
}

fn check_replications(k: usize) -> Result<()> {
    if k == 0 {
        Err(Error::invalid("need at least one replication per cell"))
    } else {
        Ok(())
    }
}

fn exponential_segments(rate: f64, period: f64, window: f64, seed: u64) -> Result<Vec<Segment>> {
    // Shape 1 is the exponential law.
    let cfg = GammaAxisConfig::new(2.0, 1.0 / rate, period, seed);
    let times = generate_gamma_axis(&cfg)?;
    let values = vec![0.0; times.len()];
    let series = IrregularSeries::new(times, values)?;
    segment(
        &series,
        &SegmentationConfig::new(window, 0.0).with_end(period),
    )
}

pub fn rate_shifting_experiment(cfg: &RateExperiment) -> Result<ShiftingCosts> {
    check_rates(&cfg.rates)?;
    check_replications(cfg.replications)?;
    let axes = cfg
        .rates
        .par_iter()
        .enumerate()
        .map(|(r, &rate)| {
            exponential_segments(
                rate,
                cfg.period,
                cfg.window,
                derive_seed(cfg.seed, 0, r as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let n = cfg.rates.len();
    let cells = (0..n * n)
        .into_par_iter()
        .map(|c| {
            let (a, b) = (&axes[c / n], &axes[c % n]);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 1, c as u64));
            let samples: Vec<(f64, usize, usize)> = (0..cfg.replications)
                .map(|_| {
                    let sa = &a[rng.random_range(0..a.len())];
                    let sb = &b[rng.random_range(0..b.len())];
                    let d = edit_distance_events(
                        sa,
                        sb,
                        cfg.shift_rate,
                        cfg.indel_cost,
                        true,
                        cfg.policy,
                    );
                    (d, sa.size(), sb.size())
                })
                .collect();
            summarize(&samples, cfg.indel_cost)
        })
        .collect();
    Ok(assemble(
        cfg.rates.clone(),
        cfg.rates.clone(),
        cfg.replications,
        cells,
    ))
}

/// `Λ_S` per model system on the gamma superpopulation.
pub fn superpopulation_indel_cost(system: ModelSystem) -> f64 {
    match system {
        ModelSystem::Uniform | ModelSystem::Ar1 { .. } => 1.5,
        ModelSystem::Sinusoid { .. } => 3.5,
    }
}

/// Model series on gamma axes with skewness spread over an interval,
/// segments pooled by size across the whole superpopulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeExperiment {
    pub system: ModelSystem,
    pub sizes: Vec<usize>,
    pub axes: usize,
    pub replications: usize,
    pub period: f64,
    pub window: f64,
    pub skewness_range: (f64, f64),
    pub scale: f64,
    /// Defaults to the per-system value when absent.
    pub indel_cost: Option<f64>,
    pub max_shift_cost: f64,
    /// Defaults to the amplitude cost rate estimated from the pooled
    /// successive differences when absent.
    pub amplitude_cost: Option<f64>,
    /// Defaults to the pooled mean sampling interval when absent.
    pub tau: Option<f64>,
    pub policy: DeletionPolicy,
    pub seed: u64,
}

impl SizeExperiment {
    pub fn new(system: ModelSystem) -> Self {
        Self {
            system,
            sizes: (1..=20).collect(),
            axes: 100,
            replications: 100,
            period: 10_000.0,
            window: 1.0,
            skewness_range: (1.0, 8.0),
            scale: DEFAULT_SCALE,
            indel_cost: None,
            max_shift_cost: 1.0,
            amplitude_cost: None,
            tau: None,
            policy: DeletionPolicy::Competing,
            seed: 0,
        }
    }

    fn skewness_values(&self) -> Vec<f64> {
        let (lo, hi) = self.skewness_range;
        superpopulation_skewness(self.axes)
            .into_iter()
            .map(|g| lo + (g - 1.0) / 7.0 * (hi - lo))
            .collect()
    }
}

struct Pools {
    by_size: Vec<Vec<Segment>>,
    mean_interval: f64,
    amplitude_rate: f64,
}

/// Segments of every requested size with pooled sampling and amplitude
/// statistics.
fn size_pools(cfg: &SizeExperiment) -> Result<Pools> {
    let max_size = cfg.sizes.iter().copied().max().unwrap_or(0);
    let per_axis = cfg
        .skewness_values()
        .into_par_iter()
        .enumerate()
        .map(|(i, g)| {
            let axis_cfg =
                GammaAxisConfig::new(g, cfg.scale, cfg.period, derive_seed(cfg.seed, 0, i as u64));
            let times = generate_gamma_axis(&axis_cfg)?;
            let series = generate_model(cfg.system, &times, derive_seed(cfg.seed, 1, i as u64))?;
            let segs = segment(
                &series,
                &SegmentationConfig::new(cfg.window, 0.0).with_end(cfg.period),
            )?;
            let kept: Vec<Segment> = segs.into_iter().filter(|s| s.size() <= max_size).collect();
            let abs_diff: f64 = series.differences().iter().map(|d| d.abs()).sum();
            Ok((kept, series.len(), abs_diff))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut by_size = vec![Vec::new(); max_size + 1];
    let (mut samples, mut steps, mut abs_diff) = (0usize, 0usize, 0.0);
    for (segs, len, d) in per_axis {
        samples += len;
        steps += len - 1;
        abs_diff += d;
        for s in segs {
            by_size[s.size()].push(s);
        }
    }
    if abs_diff == 0.0 {
        return Err(Error::Degenerate(
            "superpopulation amplitudes are constant".into(),
        ));
    }
    Ok(Pools {
        by_size,
        mean_interval: cfg.period * cfg.axes as f64 / samples as f64,
        amplitude_rate: steps as f64 / abs_diff,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeShiftingCosts {
    /// Cost parameters after defaults were resolved.
    pub costs: CostParams,
    pub matrices: ShiftingCosts,
}

pub fn size_shifting_experiment(cfg: &SizeExperiment) -> Result<SizeShiftingCosts> {
    if cfg.sizes.is_empty() {
        return Err(Error::invalid("size grid is empty"));
    }
    if cfg.axes == 0 {
        return Err(Error::invalid("superpopulation needs at least one axis"));
    }
    check_replications(cfg.replications)?;
    let (lo, hi) = cfg.skewness_range;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::invalid("skewness range must satisfy 0 < lo <= hi"));
    }
    let pools = size_pools(cfg)?;
    let costs = CostParams {
        max_shift_cost: cfg.max_shift_cost,
        amplitude_cost: cfg.amplitude_cost.unwrap_or(pools.amplitude_rate),
        indel_cost: cfg
            .indel_cost
            .unwrap_or_else(|| superpopulation_indel_cost(cfg.system)),
        tau: cfg.tau.unwrap_or(pools.mean_interval),
    };
    costs.validate()?;
    let n = cfg.sizes.len();
    let cells = (0..n * n)
        .into_par_iter()
        .map(|c| {
            let (a, b) = (
                &pools.by_size[cfg.sizes[c / n]],
                &pools.by_size[cfg.sizes[c % n]],
            );
            if a.is_empty() || b.is_empty() {
                return (None, None);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 2, c as u64));
            let samples: Vec<(f64, usize, usize)> = (0..cfg.replications)
                .map(|_| {
                    let sa = &a[rng.random_range(0..a.len())];
                    let sb = &b[rng.random_range(0..b.len())];
                    (
                        edit_distance_with_policy(sa, sb, &costs, cfg.policy),
                        sa.size(),
                        sb.size(),
                    )
                })
                .collect();
            summarize(&samples, costs.indel_cost)
        })
        .collect();
    let labels: Vec<f64> = cfg.sizes.iter().map(|&s| s as f64).collect();
    Ok(SizeShiftingCosts {
        costs,
        matrices: assemble(labels.clone(), labels, cfg.replications, cells),
    })
}

/// Closed form, direct summation and Monte Carlo views of `|X - Y|` for
/// Poisson counts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SkellamCheck {
    pub lambda1: f64,
    pub lambda2: f64,
    /// `Σ_{k ≤ 200} P(|X - Y| = k)`.
    pub pmf_sum: f64,
    pub expected_closed: f64,
    pub expected_direct: f64,
    pub expected_monte_carlo: f64,
    /// Largest standardized deviation of a histogram bin from its expected
    /// count, over bins expecting at least 5 draws.
    pub max_bin_z: f64,
    pub draws: usize,
}

const SKELLAM_TERMS: i64 = 200;

pub fn skellam_check(lambda1: f64, lambda2: f64, draws: usize, seed: u64) -> Result<SkellamCheck> {
    if draws == 0 {
        return Err(Error::invalid("need at least one Monte Carlo draw"));
    }
    let pmf: Vec<f64> = (0..=SKELLAM_TERMS)
        .map(|k| skellam_pmf(k, lambda1, lambda2))
        .collect::<Result<_>>()?;
    let pmf_sum = pmf.iter().sum();
    let expected_direct = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    let expected_closed = expected_abs_difference(lambda1, lambda2)?;
    let px = Poisson::new(lambda1).map_err(|e| Error::invalid(e.to_string()))?;
    let py = Poisson::new(lambda2).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hist = vec![0usize; pmf.len()];
    let mut total = 0.0;
    for _ in 0..draws {
        let k = (px.sample(&mut rng) - py.sample(&mut rng)).abs();
        total += k;
        if let Some(h) = hist.get_mut(k as usize) {
            *h += 1;
        }
    }
    let n = draws as f64;
    let max_bin_z = pmf
        .iter()
        .zip(&hist)
        .filter(|(p, _)| n * **p >= 5.0)
        .map(|(p, &c)| (c as f64 - n * p).abs() / (n * p * (1.0 - p)).sqrt())
        .fold(0.0, f64::max);
    Ok(SkellamCheck {
        lambda1,
        lambda2,
        pmf_sum,
        expected_closed,
        expected_direct,
        expected_monte_carlo: total / n,
        max_bin_z,
        draws,
    })
}
