// SPDX-License-Identifier: MIT OR Apache-2.0

//! Choice of the deletion/adding cost by making the pairwise distance
//! population as close to normal as possible.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CostParams;
use crate::error::{Error, Result};
use crate::series::Segment;
use crate::stats::{ks_statistic_normal, standardize};

const MIN_SEGMENTS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self {
            lo: 0.1,
            hi: 10.0,
            step: 0.1,
        }
    }
}

impl LambdaGrid {
    pub fn single(value: f64) -> Self {
        Self {
            lo: value,
            hi: value,
            step: 1.0,
        }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.lo > 0.0) || !(self.hi >= self.lo) || !(self.step > 0.0) {
            return Err(Error::invalid(format!(
                "invalid grid lo={} hi={} step={}",
                self.lo, self.hi, self.step
            )));
        }
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..n).map(|i| self.lo + i as f64 * self.step).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsPoint {
    pub lambda_s: f64,
    /// `None` where the distance population has zero variance.
    pub statistic: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaOptimization {
    pub lambda_s: f64,
    pub statistic: f64,
    pub curve: Vec<KsPoint>,
}

impl LambdaOptimization {
    /// True if the optimum lies strictly below the statistic at both grid
    /// endpoints.
    pub fn has_interior_minimum(&self) -> bool {
        let first = self.curve.first().and_then(|p| p.statistic);
        let last = self.curve.last().and_then(|p| p.statistic);
        match (first, last) {
            (Some(f), Some(l)) => self.statistic < f && self.statistic < l,
            _ => false,
        }
    }
}

/// KS distance between the standardized population and `N(0, 1)`.
pub fn ks_objective(distances: &[f64]) -> Option<f64> {
    standardize(distances).map(|z| ks_statistic_normal(&z))
}

/// Evaluates the KS objective on every grid value, with `population(Λ_S)`
/// supplying the distances, and returns the minimizer (first one on ties).
pub fn optimize_over_grid<F>(grid: &LambdaGrid, population: F) -> Result<LambdaOptimization>
where
    F: Fn(f64) -> Vec<f64>,
{
    let curve: Vec<KsPoint> = grid
        .values()?
        .into_iter()
        .map(|lambda_s| KsPoint {
            lambda_s,
            statistic: ks_objective(&population(lambda_s)),
        })
        .collect();
    finish(curve)
}

fn finish(curve: Vec<KsPoint>) -> Result<LambdaOptimization> {
    let best = curve
        .iter()
        .filter_map(|p| p.statistic.map(|s| (p.lambda_s, s)))
        .fold(None, |acc: Option<(f64, f64)>, (l, s)| match acc {
            Some((_, bs)) if bs <= s => acc,
            _ => Some((l, s)),
        });
    let (lambda_s, statistic) = best.ok_or_else(|| {
        Error::Degenerate("distance population has zero variance at every grid value".into())
    })?;
    Ok(LambdaOptimization {
        lambda_s,
        statistic,
        curve,
    })
}

/// Picks `Λ_S` on `grid` so that all pairwise distances between `segments`
/// look most normal. The other cost parameters are taken from `base`.
pub fn optimize_lambda_s(
    segments: &[Segment],
    base: &CostParams,
    grid: &LambdaGrid,
) -> Result<LambdaOptimization> {
    if segments.len() < MIN_SEGMENTS {
        return Err(Error::invalid(format!(
            "need at least {MIN_SEGMENTS} segments to optimize the deletion cost, got {}",
            segments.len()
        )));
    }
    let lambdas = grid.values()?;
    base.with_indel(lambdas[0]).validate()?;
    let n = segments.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    // One row per pair, one column per grid value. The pair costs do not
    // depend on Λ_S, so they are computed once per pair.
    let per_pair: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| pair_distances(&segments[i], &segments[j], base, &lambdas))
        .collect();
    let curve = lambdas
        .iter()
        .enumerate()
        .map(|(k, &lambda_s)| {
            let column: Vec<f64> = per_pair.iter().map(|row| row[k]).collect();
            KsPoint {
                lambda_s,
                statistic: ks_objective(&column),
            }
        })
        .collect();
    finish(curve)
}

fn pair_distances(a: &Segment, b: &Segment, base: &CostParams, lambdas: &[f64]) -> Vec<f64> {
    let (ta, la) = (a.rel_times(), a.amplitudes());
    let (tb, lb) = (b.rel_times(), b.amplitudes());
    let (na, nb) = (ta.len(), tb.len());
    let cost: Vec<f64> = (0..na)
        .flat_map(|i| (0..nb).map(move |j| (i, j)))
        .map(|(i, j)| base.pair_cost(ta[i], la[i], tb[j], lb[j]))
        .collect();
    let mut prev = vec![0.0; nb + 1];
    let mut cur = vec![0.0; nb + 1];
    lambdas
        .iter()
        .map(|&s| {
            for (j, v) in prev.iter_mut().enumerate() {
                *v = j as f64 * s;
            }
            for i in 1..=na {
                cur[0] = i as f64 * s;
                for j in 1..=nb {
                    let sub = prev[j - 1] + cost[(i - 1) * nb + (j - 1)];
                    cur[j] = (prev[j] + s).min(cur[j - 1] + s).min(sub);
                }
                std::mem::swap(&mut prev, &mut cur);
            }
            prev[nb]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medit::edit_distance;
    use crate::stats::ks_critical_05;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_segments(n: usize, seed: u64) -> Vec<Segment> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let size = rng.random_range(0..8);
                let mut t: Vec<f64> = (0..size).map(|_| rng.random::<f64>()).collect();
                t.sort_by(f64::total_cmp);
                let v = (0..size).map(|_| rng.random::<f64>()).collect();
                Segment::from_relative(i, i as f64, 1.0, t, v).unwrap()
            })
            .collect()
    }

    #[test]
    fn grid_values() {
        let g = LambdaGrid::default().values().unwrap();
        assert_eq!(g.len(), 100);
        assert!((g[99] - 10.0).abs() < 1e-9);
        assert_eq!(LambdaGrid::single(2.5).values().unwrap(), vec![2.5]);
        assert!(LambdaGrid {
            lo: 0.0,
            hi: 1.0,
            step: 0.1
        }
        .values()
        .is_err());
    }

    #[test]
    fn single_point_grid_returns_it() {
        let segs = random_segments(12, 1);
        let r = optimize_lambda_s(&segs, &CostParams::default(), &LambdaGrid::single(2.5)).unwrap();
        assert_eq!(r.lambda_s, 2.5);
        assert_eq!(r.curve.len(), 1);
    }

    #[test]
    fn precomputed_pair_costs_agree_with_direct_dp() {
        let segs = random_segments(12, 2);
        let base = CostParams {
            tau: 0.2,
            ..CostParams::default()
        };
        let lambdas = [0.3, 1.0, 4.0];
        for a in &segs {
            for b in &segs {
                let fast = pair_distances(a, b, &base, &lambdas);
                for (k, &s) in lambdas.iter().enumerate() {
                    assert_eq!(fast[k], edit_distance(a, b, &base.with_indel(s)));
                }
            }
        }
    }

    #[test]
    fn normal_population_passes_ks() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 2000;
        let r = optimize_over_grid(
            &LambdaGrid {
                lo: 1.0,
                hi: 3.0,
                step: 1.0,
            },
            |s| vec![2.0 * s; n],
        );
        assert!(matches!(r, Err(Error::Degenerate(_))));

        let sample: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let r = optimize_over_grid(
            &LambdaGrid {
                lo: 1.0,
                hi: 3.0,
                step: 1.0,
            },
            |s| sample.iter().map(|z| 5.0 + s * z).collect(),
        )
        .unwrap();
        assert!(r.statistic < ks_critical_05(n), "KS {}", r.statistic);
    }

    #[test]
    fn too_few_segments() {
        let segs = random_segments(5, 4);
        assert!(optimize_lambda_s(&segs, &CostParams::default(), &LambdaGrid::default()).is_err());
    }
}
