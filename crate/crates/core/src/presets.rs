// SPDX-License-Identifier: MIT OR Apache-2.0

//! Ready-made configurations for the reference experiments.

use crate::generators::{Ar1RampConfig, GammaAxisConfig, RateShiftAxisConfig};
use crate::pipeline::PipelineParams;
use crate::recurrence::{RqaParams, WindowSpec};
use crate::series::SegmentationConfig;

pub const REFERENCE_PERIOD: f64 = 5000.0;
pub const REFERENCE_CHANGE_TIME: f64 = 1250.0;
/// Interval scale shared by all synthetic axes.
pub const DEFAULT_SCALE: f64 = 0.2;
pub const REFERENCE_SCALE: f64 = 0.25;

/// AR(1) with autocorrelation time growing linearly from 0.5 to 20 on an
/// axis whose interval skewness jumps from 0.5 to 8 at `t = 1250`. With a
/// common scale of 0.25 the mean sampling rate rises fourfold.
pub fn reference_ramp(seed: u64) -> Ar1RampConfig {
    Ar1RampConfig {
        tau_start: 0.5,
        tau_end: 20.0,
        axis: RateShiftAxisConfig {
            before: GammaAxisConfig::new(0.5, REFERENCE_SCALE, REFERENCE_PERIOD, seed),
            after: GammaAxisConfig::new(8.0, REFERENCE_SCALE, REFERENCE_PERIOD, seed),
            change_time: REFERENCE_CHANGE_TIME,
            period: REFERENCE_PERIOD,
            seed,
        },
        seed: seed.wrapping_add(1),
    }
}

/// Unit segments, windows of 200 segments with 75% overlap, 15% recurrence.
pub fn reference_pipeline() -> PipelineParams {
    PipelineParams {
        segmentation: SegmentationConfig::new(1.0, 0.0),
        rqa: RqaParams {
            rate: 0.15,
            l_min: 2,
            theiler: 1,
        },
        window: WindowSpec::new(200, 0.75),
        ..PipelineParams::default()
    }
}

/// Interval skewness values of the axes used for cost matrices, spread
/// evenly over `[1, 8]`.
pub fn superpopulation_skewness(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => (0..count)
            .map(|i| 1.0 + 7.0 * i as f64 / (count - 1) as f64)
            .collect(),
    }
}
