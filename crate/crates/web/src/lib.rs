// SPDX-License-Identifier: MIT OR Apache-2.0

//! Browser bindings. Every entry point returns a JSON string.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use srcrqa::generators::{generate_gamma_axis, generate_model, GammaAxisConfig, ModelSystem};
use srcrqa::medit::{edit_alignment, EditOp};
use srcrqa::pipeline::{analyze_series, PipelineParams};
use srcrqa::recurrence::{det, diagonal_histogram, threshold_by_rate, WindowSpec};
use srcrqa::series::{segment, segment_sizes};
use srcrqa::surrogates::{generate_src_surrogate, SurrogateConfig};
use srcrqa::{CostParams, DistanceMatrix, IrregularSeries, Segment, SegmentationConfig};

/// Segments shown in the recurrence plot.
const PLOT_SEGMENTS: usize = 150;

fn js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn model_series(
    system: &str,
    skewness: f64,
    period: f64,
    seed: u64,
) -> Result<IrregularSeries, JsError> {
    let system = ModelSystem::from_tag(system).map_err(js)?;
    let axis =
        generate_gamma_axis(&GammaAxisConfig::new(skewness, 0.2, period, seed)).map_err(js)?;
    generate_model(system, &axis, seed.wrapping_add(1)).map_err(js)
}

#[derive(Serialize)]
struct RecurrenceDemo {
    times: Vec<f64>,
    values: Vec<f64>,
    lambda_s: f64,
    size: usize,
    threshold: f64,
    /// Upper-triangle recurrences `(i, j)` with `i < j`.
    points: Vec<(usize, usize)>,
    det: Option<f64>,
}

/// Model series, optimized deletion cost and the recurrence plot of its
/// first segments at recurrence rate `rate`.
#[wasm_bindgen]
pub fn recurrence_demo(
    system: &str,
    skewness: f64,
    seed: u32,
    rate: f64,
) -> Result<String, JsError> {
    let period = PLOT_SEGMENTS as f64;
    let s = model_series(system, skewness, period, u64::from(seed))?;
    let params = PipelineParams {
        window: WindowSpec::new(PLOT_SEGMENTS, 0.0),
        ..PipelineParams::default()
    };
    let analysis = analyze_series(&s, &params, None).map_err(js)?;
    let segs = segment(&s, &params.segmentation).map_err(js)?;
    let m = DistanceMatrix::from_segments(&segs, &analysis.costs);
    let rp = threshold_by_rate(&m, rate, params.rqa.theiler).map_err(js)?;
    let d = det(&diagonal_histogram(&rp), params.rqa.l_min).ok();
    let out = RecurrenceDemo {
        times: s.times().to_vec(),
        values: s.values().to_vec(),
        lambda_s: analysis.costs.indel_cost,
        size: rp.size(),
        threshold: rp.threshold,
        points: rp.upper_coordinates(),
        det: d,
    };
    serde_json::to_string(&out).map_err(js)
}

#[derive(Deserialize)]
struct AlignRequest {
    /// `[offset, amplitude]` rows, offsets in `[0, 1)`.
    a: Vec<(f64, f64)>,
    b: Vec<(f64, f64)>,
    max_shift_cost: f64,
    amplitude_cost: f64,
    indel_cost: f64,
    tau: f64,
}

#[derive(Serialize)]
struct AlignResponse {
    distance: f64,
    ops: Vec<EditOp>,
}

fn unit_segment(mut rows: Vec<(f64, f64)>) -> Result<Segment, JsError> {
    rows.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (t, v) = rows.into_iter().unzip();
    Segment::from_relative(0, 0.0, 1.0, t, v).map_err(js)
}

/// Optimal operation sequence between two unit segments.
#[wasm_bindgen]
pub fn align_segments(request: &str) -> Result<String, JsError> {
    let r: AlignRequest = serde_json::from_str(request).map_err(js)?;
    let p = CostParams {
        max_shift_cost: r.max_shift_cost,
        amplitude_cost: r.amplitude_cost,
        indel_cost: r.indel_cost,
        tau: r.tau,
    };
    p.validate().map_err(js)?;
    let a = unit_segment(r.a)?;
    let b = unit_segment(r.b)?;
    let al = edit_alignment(&a, &b, &p);
    serde_json::to_string(&AlignResponse {
        distance: al.distance,
        ops: al.ops,
    })
    .map_err(js)
}

#[derive(Serialize)]
struct SurrogateDemo {
    times: Vec<f64>,
    values: Vec<f64>,
    surrogate_times: Vec<f64>,
    surrogate_values: Vec<f64>,
    sizes: Vec<usize>,
    sizes_preserved: bool,
    max_iterations: usize,
}

/// A model series next to one SRC surrogate of it.
#[wasm_bindgen]
pub fn src_surrogates(
    system: &str,
    skewness: f64,
    period: f64,
    seed: u32,
) -> Result<String, JsError> {
    let s = model_series(system, skewness, period, u64::from(seed))?;
    let cfg = SegmentationConfig::new(1.0, 0.0);
    let sur = generate_src_surrogate(&s, &cfg, &SurrogateConfig::default(), u64::from(seed) + 7)
        .map_err(js)?;
    let sizes = segment_sizes(&segment(&s, &cfg).map_err(js)?);
    let sur_sizes = segment_sizes(&segment(&sur.series, &cfg).map_err(js)?);
    let out = SurrogateDemo {
        times: s.times().to_vec(),
        values: s.values().to_vec(),
        surrogate_times: sur.series.times().to_vec(),
        surrogate_values: sur.series.values().to_vec(),
        sizes_preserved: sizes == sur_sizes,
        sizes,
        max_iterations: sur.iterations.iter().copied().max().unwrap_or(0),
    };
    serde_json::to_string(&out).map_err(js)
}
