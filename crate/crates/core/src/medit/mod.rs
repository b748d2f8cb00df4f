// SPDX-License-Identifier: MIT OR Apache-2.0

//! Modified edit distance between segments of an irregular series.
//!
//! Transforming one segment into another uses three operations: shifting a
//! sample in time (logistic cost saturating at `Λ_0`), changing its amplitude
//! (`Λ_k` per unit), and deleting or adding a sample (`Λ_S` each). The
//! distance is the cheapest combination, found by an alignment DP over
//! order-preserving matchings.

mod distance;
mod matrix;
mod optimize;

pub use distance::{
    edit_alignment, edit_distance, edit_distance_events, edit_distance_with_policy, DeletionPolicy,
    EditOp, SegmentAlignment,
};
pub use matrix::{BandedDistances, DistanceMatrix, DistanceView, SubMatrix};
pub use optimize::{
    ks_objective, optimize_lambda_s, optimize_over_grid, KsPoint, LambdaGrid, LambdaOptimization,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::IrregularSeries;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// `Λ_0`, the saturation level of the shifting cost.
    pub max_shift_cost: f64,
    /// `Λ_k`, cost per unit of amplitude change.
    pub amplitude_cost: f64,
    /// `Λ_S`, cost of deleting or adding one sample.
    pub indel_cost: f64,
    /// Location of the logistic shifting cost, in time units.
    pub tau: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            max_shift_cost: 1.0,
            amplitude_cost: 1.0,
            indel_cost: 1.0,
            tau: 1.0,
        }
    }
}

impl CostParams {
    /// Default costs with `τ` set to the mean sampling interval `T / M`.
    pub fn for_series(series: &IrregularSeries, origin: f64) -> Self {
        Self {
            tau: series.mean_interval_from(origin),
            ..Self::default()
        }
    }

    pub fn with_indel(mut self, indel_cost: f64) -> Self {
        self.indel_cost = indel_cost;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.max_shift_cost,
            self.amplitude_cost,
            self.indel_cost,
            self.tau,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("cost parameters must be finite"));
        }
        if self.max_shift_cost < 0.0 || self.amplitude_cost < 0.0 {
            return Err(Error::invalid("shift and amplitude costs must be >= 0"));
        }
        if !(self.indel_cost > 0.0) {
            return Err(Error::invalid("deletion/adding cost must be > 0"));
        }
        if !(self.tau > 0.0) {
            return Err(Error::invalid("logistic location tau must be > 0"));
        }
        Ok(())
    }

    /// Cost of matching sample `(ta, la)` with `(tb, lb)`. Coinciding samples
    /// need no operation and cost nothing.
    #[inline]
    pub fn pair_cost(&self, ta: f64, la: f64, tb: f64, lb: f64) -> f64 {
        if ta == tb && la == lb {
            return 0.0;
        }
        logistic_shift_cost((ta - tb).abs(), self.tau, self.max_shift_cost)
            + self.amplitude_cost * (la - lb).abs()
    }
}

/// `Λ_0 / (1 + exp(-(dt - τ)))`.
#[inline]
pub fn logistic_shift_cost(dt: f64, tau: f64, max_cost: f64) -> f64 {
    max_cost / (1.0 + (-(dt - tau)).exp())
}

/// Amplitude cost rate `(M - 1) / Σ |x_i - x_{i+1}|`.
pub fn estimate_lambda_k(series: &IrregularSeries) -> Result<f64> {
    let total: f64 = series.differences().iter().map(|d| d.abs()).sum();
    if total == 0.0 {
        return Err(Error::Degenerate(
            "constant series: amplitude cost rate is undefined".into(),
        ));
    }
    Ok((series.len() - 1) as f64 / total)
}
