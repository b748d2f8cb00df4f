// SPDX-License-Identifier: MIT OR Apache-2.0

//! End-to-end analysis: segmentation, cost selection, banded distances and
//! sliding-window DET, for one series or for a series with its SRC ensemble.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medit::{
    estimate_lambda_k, optimize_lambda_s, BandedDistances, CostParams, LambdaGrid,
    LambdaOptimization,
};
use crate::recurrence::{sliding_window_det, DetPoint, RqaParams, WindowSpec};
use crate::series::{segment, IrregularSeries, Segment, SegmentationConfig};
use crate::stats::{nearest_rank, sorted_copy};
use crate::surrogates::{
    realization_seed, surrogate_from_parts, PairPopulation, PairSampler, SurrogateConfig,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub segmentation: SegmentationConfig,
    /// `Λ_0`.
    pub max_shift_cost: f64,
    /// `Λ_k`; estimated from each series when absent.
    pub amplitude_cost: Option<f64>,
    /// Logistic location; the mean sampling interval when absent.
    pub tau: Option<f64>,
    /// Fixed `Λ_S`; optimized on `grid` when absent.
    pub lambda_s: Option<f64>,
    pub grid: LambdaGrid,
    /// At most this many evenly spaced segments enter the `Λ_S` optimization.
    pub optimization_segments: usize,
    pub rqa: RqaParams,
    pub window: WindowSpec,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            segmentation: SegmentationConfig::new(1.0, 0.0),
            max_shift_cost: 1.0,
            amplitude_cost: Some(1.0),
            tau: None,
            lambda_s: None,
            grid: LambdaGrid::default(),
            optimization_segments: 400,
            rqa: RqaParams::default(),
            window: WindowSpec::new(200, 0.75),
        }
    }
}

impl PipelineParams {
    /// Costs for `series` with a placeholder `Λ_S` of 1.
    pub fn base_costs(&self, series: &IrregularSeries) -> Result<CostParams> {
        let amplitude_cost = match self.amplitude_cost {
            Some(v) => v,
            None => estimate_lambda_k(series)?,
        };
        let tau = match self.tau {
            Some(v) => v,
            None => series.mean_interval_from(self.segmentation.origin),
        };
        let p = CostParams {
            max_shift_cost: self.max_shift_cost,
            amplitude_cost,
            indel_cost: 1.0,
            tau,
        };
        p.validate()?;
        Ok(p)
    }
}

/// Up to `limit` segments at evenly spaced positions, first and last included.
pub fn spread_subset(segments: &[Segment], limit: usize) -> Vec<Segment> {
    let n = segments.len();
    if n <= limit || limit < 2 {
        return segments.to_vec();
    }
    (0..limit)
        .map(|i| {
            let k = (i as f64 * (n - 1) as f64 / (limit - 1) as f64).round() as usize;
            segments[k].clone()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesAnalysis {
    pub costs: CostParams,
    /// Present when `Λ_S` was optimized rather than given.
    pub optimization: Option<LambdaOptimization>,
    pub det: Vec<DetPoint>,
}

pub fn choose_lambda_s(
    segments: &[Segment],
    base: &CostParams,
    params: &PipelineParams,
) -> Result<LambdaOptimization> {
    let subset = spread_subset(segments, params.optimization_segments);
    optimize_lambda_s(&subset, base, &params.grid)
}

fn analyze_segments(
    series: &IrregularSeries,
    segments: &[Segment],
    params: &PipelineParams,
    lambda_s: Option<f64>,
) -> Result<SeriesAnalysis> {
    let base = params.base_costs(series)?;
    let (indel, optimization) = match lambda_s.or(params.lambda_s) {
        Some(v) => (v, None),
        None => {
            let opt = choose_lambda_s(segments, &base, params)?;
            (opt.lambda_s, Some(opt))
        }
    };
    let costs = base.with_indel(indel);
    costs.validate()?;
    params.window.validate()?;
    let band = BandedDistances::from_segments(segments, &costs, params.window.size - 1);
    let det = sliding_window_det(&band, &params.window, &params.rqa)?;
    Ok(SeriesAnalysis {
        costs,
        optimization,
        det,
    })
}

/// Sliding-window DET of one series. `lambda_s` overrides both the optimizer
/// and `params.lambda_s`.
pub fn analyze_series(
    series: &IrregularSeries,
    params: &PipelineParams,
    lambda_s: Option<f64>,
) -> Result<SeriesAnalysis> {
    let segments = segment(series, &params.segmentation)?;
    analyze_segments(series, &segments, params, lambda_s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrectedPoint {
    pub center: f64,
    pub det_real: Option<f64>,
    /// 95% nearest-rank quantile of the surrogate DETs in this window.
    pub det_q95: Option<f64>,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleDet {
    pub real: SeriesAnalysis,
    /// `Λ_S` used for every surrogate, from the pilot realization.
    pub surrogate_lambda_s: f64,
    pub pilot_optimization: Option<LambdaOptimization>,
    /// `surrogate_det[k][w]` is DET of realization `k` in window `w`.
    pub surrogate_det: Vec<Vec<Option<f64>>>,
    pub corrected: Vec<CorrectedPoint>,
    pub max_iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionConfig {
    pub realizations: usize,
    pub surrogates: SurrogateConfig,
    /// Optimize `Λ_S` for every realization instead of once on the pilot.
    pub per_surrogate_lambda: bool,
    pub quantile: f64,
}

impl Default for CorrectionConfig {
    fn default() -> Self {
        Self {
            realizations: 200,
            surrogates: SurrogateConfig::default(),
            per_surrogate_lambda: false,
            quantile: 0.95,
        }
    }
}

/// Real DET, surrogate quantile and their ratio in every window. Windows
/// with undefined DET are dropped from the quantile; a missing value in
/// either input makes the ratio missing.
pub fn ensemble_det(
    series: &IrregularSeries,
    params: &PipelineParams,
    correction: &CorrectionConfig,
    seed: u64,
) -> Result<EnsembleDet> {
    if correction.realizations == 0 {
        return Err(Error::invalid("need at least one surrogate realization"));
    }
    if !(correction.quantile > 0.0 && correction.quantile <= 1.0) {
        return Err(Error::invalid("quantile must lie in (0, 1]"));
    }
    let segments = segment(series, &params.segmentation)?;
    let sampler = PairSampler::new(
        PairPopulation::from_series(series),
        correction.surrogates.weights,
    )?;
    let surrogate = |k: usize| {
        surrogate_from_parts(
            series,
            &segments,
            &params.segmentation,
            &sampler,
            correction.surrogates.reanchor,
            realization_seed(seed, k),
        )
    };

    let real = analyze_segments(series, &segments, params, None)?;

    let pilot = surrogate(0)?;
    let pilot_segments = segment(&pilot.series, &params.segmentation)?;
    let pilot_analysis = analyze_segments(&pilot.series, &pilot_segments, params, None)?;
    let lambda_src = pilot_analysis.costs.indel_cost;
    let fixed = if correction.per_surrogate_lambda {
        None
    } else {
        Some(lambda_src)
    };

    let rest: Vec<(Vec<Option<f64>>, usize)> = (1..correction.realizations)
        .into_par_iter()
        .map(|k| {
            let sur = surrogate(k)?;
            let segs = segment(&sur.series, &params.segmentation)?;
            let a = analyze_segments(&sur.series, &segs, params, fixed.or(params.lambda_s))?;
            let it = sur.iterations.iter().copied().max().unwrap_or(0);
            Ok((a.det.iter().map(|p| p.det).collect(), it))
        })
        .collect::<Result<_>>()?;

    let mut surrogate_det = vec![pilot_analysis.det.iter().map(|p| p.det).collect::<Vec<_>>()];
    let mut max_iterations = pilot.iterations.iter().copied().max().unwrap_or(0);
    for (d, it) in rest {
        surrogate_det.push(d);
        max_iterations = max_iterations.max(it);
    }

    let corrected = real
        .det
        .iter()
        .enumerate()
        .map(|(w, p)| {
            let column: Vec<f64> = surrogate_det.iter().filter_map(|d| d[w]).collect();
            let q = if column.is_empty() {
                None
            } else {
                Some(nearest_rank(&sorted_copy(&column), correction.quantile))
            };
            let ratio = match (p.det, q) {
                (Some(r), Some(q)) if q > 0.0 => Some(r / q),
                _ => None,
            };
            CorrectedPoint {
                center: p.center,
                det_real: p.det,
                det_q95: q,
                ratio,
            }
        })
        .collect();

    Ok(EnsembleDet {
        real,
        surrogate_lambda_s: lambda_src,
        pilot_optimization: pilot_analysis.optimization,
        surrogate_det,
        corrected,
        max_iterations,
    })
}
