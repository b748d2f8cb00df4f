// SPDX-License-Identifier: MIT OR Apache-2.0

//! Sampling-rate-constrained (SRC) surrogates.
//!
//! Every segment of the source is rebuilt with the same number of samples by
//! drawing (interval, amplitude difference) pairs with replacement from the
//! whole record. A draw whose cumulated intervals overrun the segment is
//! discarded and redrawn with Beta weights tilted towards short intervals.

use std::sync::OnceLock;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::rng_from;
use crate::series::{segment, IrregularSeries, Segment, SegmentationConfig};

/// One consecutive pair of the source series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntervalAmplitudePair {
    pub interval: f64,
    pub difference: f64,
    /// Position `i` of the pair `(x_i, x_{i+1})` in the source.
    pub source: usize,
}

/// All consecutive pairs sorted by ascending interval, with the abscissa used
/// for weighting. Rank 1 is the longest interval, so the abscissa grows as
/// intervals shrink. Tied intervals share their average abscissa.
#[derive(Clone, Debug)]
pub struct PairPopulation {
    pairs: Vec<IntervalAmplitudePair>,
    abscissa: Vec<f64>,
}

impl PairPopulation {
    pub fn from_series(series: &IrregularSeries) -> Self {
        let t = series.times();
        let v = series.values();
        let mut pairs: Vec<IntervalAmplitudePair> = (0..t.len() - 1)
            .map(|i| IntervalAmplitudePair {
                interval: t[i + 1] - t[i],
                difference: v[i + 1] - v[i],
                source: i,
            })
            .collect();
        pairs.sort_by(|a, b| {
            a.interval
                .total_cmp(&b.interval)
                .then(a.source.cmp(&b.source))
        });
        let m = pairs.len();
        let mut abscissa = vec![0.0; m];
        let mut p = 0;
        while p < m {
            let mut q = p + 1;
            while q < m && pairs[q].interval == pairs[p].interval {
                q += 1;
            }
            let avg = (p..q)
                .map(|k| ((m - k) as f64 - 0.5) / m as f64)
                .sum::<f64>()
                / (q - p) as f64;
            abscissa[p..q].fill(avg);
            p = q;
        }
        Self { pairs, abscissa }
    }

    pub fn pairs(&self) -> &[IntervalAmplitudePair] {
        &self.pairs
    }

    pub fn abscissa(&self) -> &[f64] {
        &self.abscissa
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    pub alpha0: f64,
    pub beta: f64,
    pub delta_alpha: f64,
    pub max_iterations: usize,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self {
            alpha0: 1.0,
            beta: 1.0,
            delta_alpha: 0.15,
            max_iterations: 1000,
        }
    }
}

impl WeightConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha0 >= 1.0 && self.beta >= 1.0) {
            return Err(Error::invalid(
                "weight parameters need alpha0 >= 1 and beta >= 1",
            ));
        }
        if !(self.delta_alpha > 0.0 && self.delta_alpha.is_finite()) {
            return Err(Error::invalid("delta_alpha must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be >= 1"));
        }
        Ok(())
    }

    /// `α_l` after `l` failed iterations.
    pub fn alpha(&self, level: usize) -> f64 {
        self.alpha0 + level as f64 * self.delta_alpha
    }
}

/// Relative Beta(α, β) weights of abscissae, scaled so the largest is 1.
/// The normalizing constant cancels in weighted draws.
pub fn beta_weights(abscissa: &[f64], alpha: f64, beta: f64) -> Vec<f64> {
    let logs: Vec<f64> = abscissa
        .iter()
        .map(|&x| (alpha - 1.0) * x.ln() + (beta - 1.0) * (1.0 - x).ln())
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    logs.iter().map(|l| (l - top).exp()).collect()
}

/// Weighted pair sampler with one lazily built table per iteration level.
pub struct PairSampler {
    population: PairPopulation,
    weights: WeightConfig,
    levels: Vec<OnceLock<WeightedIndex<f64>>>,
}

impl PairSampler {
    pub fn new(population: PairPopulation, weights: WeightConfig) -> Result<Self> {
        weights.validate()?;
        if population.is_empty() {
            return Err(Error::invalid("pair population is empty"));
        }
        let levels = (0..weights.max_iterations)
            .map(|_| OnceLock::new())
            .collect();
        Ok(Self {
            population,
            weights,
            levels,
        })
    }

    pub fn population(&self) -> &PairPopulation {
        &self.population
    }

    pub fn weights(&self) -> &WeightConfig {
        &self.weights
    }

    fn table(&self, level: usize) -> &WeightedIndex<f64> {
        self.levels[level].get_or_init(|| {
            let w = beta_weights(
                &self.population.abscissa,
                self.weights.alpha(level),
                self.weights.beta,
            );
            WeightedIndex::new(w).expect("largest weight is 1")
        })
    }

    /// Draws one pair index at iteration level `level`.
    pub fn draw<R: Rng + ?Sized>(&self, level: usize, rng: &mut R) -> usize {
        self.table(level).sample(rng)
    }

    /// Expected drawn interval at iteration level `level`.
    pub fn expected_interval(&self, level: usize) -> f64 {
        let w = beta_weights(
            &self.population.abscissa,
            self.weights.alpha(level),
            self.weights.beta,
        );
        let total: f64 = w.iter().sum();
        w.iter()
            .zip(&self.population.pairs)
            .map(|(w, p)| w * p.interval)
            .sum::<f64>()
            / total
    }
}

/// Accepted draw for one segment.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentDraw {
    /// Times relative to the segment start.
    pub rel_times: Vec<f64>,
    /// Indices into the sampler's population, in draw order.
    pub pairs: Vec<usize>,
    /// Attempts used, 0 for an empty segment.
    pub iterations: usize,
}

/// Draws `size` pairs whose cumulated intervals, added to `start`, stay
/// strictly below `end`. Every failed attempt redraws the whole segment at
/// the next weight level.
pub fn generate_segment_surrogate<R: Rng + ?Sized>(
    size: usize,
    start: f64,
    end: f64,
    sampler: &PairSampler,
    segment_index: usize,
    rng: &mut R,
) -> Result<SegmentDraw> {
    if size == 0 {
        return Ok(SegmentDraw {
            rel_times: Vec::new(),
            pairs: Vec::new(),
            iterations: 0,
        });
    }
    let pairs = sampler.population.pairs();
    let mut picked = Vec::with_capacity(size);
    let mut abs_times = Vec::with_capacity(size);
    for level in 0..sampler.weights.max_iterations {
        picked.clear();
        abs_times.clear();
        let mut rel = 0.0;
        let mut prev = start;
        let mut ok = true;
        for _ in 0..size {
            let k = sampler.draw(level, rng);
            picked.push(k);
            rel += pairs[k].interval;
            let t = start + rel;
            if !(t > prev && t < end) {
                ok = false;
                break;
            }
            abs_times.push(t);
            prev = t;
        }
        if ok {
            return Ok(SegmentDraw {
                rel_times: abs_times.iter().map(|t| t - start).collect(),
                pairs: picked,
                iterations: level + 1,
            });
        }
    }
    Err(Error::Convergence {
        segment: segment_index,
        iterations: sampler.weights.max_iterations,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SurrogateConfig {
    pub weights: WeightConfig,
    /// Restart the amplitude path in every segment at the last source value
    /// before the segment, instead of cumulating across the whole record.
    pub reanchor: bool,
}

/// One SRC surrogate realization.
#[derive(Clone, Debug, PartialEq)]
pub struct SrcSurrogate {
    pub series: IrregularSeries,
    /// Attempts per segment.
    pub iterations: Vec<usize>,
    /// Population index of every sample's pair.
    pub pairs: Vec<usize>,
}

/// Builds one surrogate of `series` segmented by `cfg`.
pub fn generate_src_surrogate(
    series: &IrregularSeries,
    cfg: &SegmentationConfig,
    scfg: &SurrogateConfig,
    seed: u64,
) -> Result<SrcSurrogate> {
    let segments = segment(series, cfg)?;
    let sampler = PairSampler::new(PairPopulation::from_series(series), scfg.weights)?;
    surrogate_from_parts(series, &segments, cfg, &sampler, scfg.reanchor, seed)
}

pub(crate) fn surrogate_from_parts(
    series: &IrregularSeries,
    segments: &[Segment],
    cfg: &SegmentationConfig,
    sampler: &PairSampler,
    reanchor: bool,
    seed: u64,
) -> Result<SrcSurrogate> {
    let mut rng = rng_from(seed);
    let pop = sampler.population().pairs();
    let src_t = series.times();
    let src_v = series.values();
    let mut times = Vec::with_capacity(series.len());
    let mut values = Vec::with_capacity(series.len());
    let mut pairs = Vec::with_capacity(series.len());
    let mut iterations = Vec::with_capacity(segments.len());
    let mut level = src_v[0];
    for seg in segments {
        let end = cfg.window_start(seg.index + 1);
        let draw = generate_segment_surrogate(
            seg.size(),
            seg.start_time,
            end,
            sampler,
            seg.index,
            &mut rng,
        )?;
        if reanchor && !draw.pairs.is_empty() {
            let before = src_t.partition_point(|&t| t < seg.start_time);
            level = src_v[before.saturating_sub(1)];
        }
        for (rel, &k) in draw.rel_times.iter().zip(&draw.pairs) {
            level += pop[k].difference;
            times.push(seg.start_time + rel);
            values.push(level);
            pairs.push(k);
        }
        iterations.push(draw.iterations);
    }
    let series = IrregularSeries::new(times, values)?
        .with_units(series.time_unit.clone(), series.value_unit.clone());
    Ok(SrcSurrogate {
        series,
        iterations,
        pairs,
    })
}

#[derive(Clone, Debug)]
pub struct SurrogateEnsemble {
    pub seed: u64,
    pub config: SurrogateConfig,
    pub realizations: Vec<SrcSurrogate>,
}

impl SurrogateEnsemble {
    pub fn len(&self) -> usize {
        self.realizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realizations.is_empty()
    }

    /// Largest number of attempts any segment needed.
    pub fn max_iterations(&self) -> usize {
        self.realizations
            .iter()
            .flat_map(|r| r.iterations.iter().copied())
            .max()
            .unwrap_or(0)
    }

    /// Mean attempts over non-empty segments.
    pub fn mean_iterations(&self) -> f64 {
        let it: Vec<usize> = self
            .realizations
            .iter()
            .flat_map(|r| r.iterations.iter().copied().filter(|&i| i > 0))
            .collect();
        if it.is_empty() {
            0.0
        } else {
            it.iter().sum::<usize>() as f64 / it.len() as f64
        }
    }
}

/// Seed of realization `index` in an ensemble seeded with `base`.
pub fn realization_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add(index as u64)
}

/// `count` surrogates, realization `i` seeded with `seed + i`.
pub fn generate_ensemble(
    series: &IrregularSeries,
    cfg: &SegmentationConfig,
    scfg: &SurrogateConfig,
    count: usize,
    seed: u64,
) -> Result<SurrogateEnsemble> {
    let segments = segment(series, cfg)?;
    let sampler = PairSampler::new(PairPopulation::from_series(series), scfg.weights)?;
    let realizations = (0..count)
        .into_par_iter()
        .map(|i| {
            surrogate_from_parts(
                series,
                &segments,
                cfg,
                &sampler,
                scfg.reanchor,
                realization_seed(seed, i),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SurrogateEnsemble {
        seed,
        config: *scfg,
        realizations,
    })
}
