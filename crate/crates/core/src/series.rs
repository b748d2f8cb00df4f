// SPDX-License-Identifier: MIT OR Apache-2.0

//! Irregular time series and their segmentation into fixed-duration windows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing sample times with one amplitude per sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrregularSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    #[serde(default)]
    pub time_unit: String,
    #[serde(default)]
    pub value_unit: String,
}

impl IrregularSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::invalid(format!(
                "times ({}) and values ({}) differ in length",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::invalid(format!(
                "a series needs at least 2 samples, got {}",
                times.len()
            )));
        }
        if let Some(i) = times
            .iter()
            .chain(values.iter())
            .position(|v| !v.is_finite())
        {
            return Err(Error::invalid(format!("non-finite entry at position {i}")));
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::invalid(format!(
                "times must be strictly increasing (violated at index {})",
                i + 1
            )));
        }
        Ok(Self {
            times,
            values,
            time_unit: String::new(),
            value_unit: String::new(),
        })
    }

    pub fn with_units(
        mut self,
        time_unit: impl Into<String>,
        value_unit: impl Into<String>,
    ) -> Self {
        self.time_unit = time_unit.into();
        self.value_unit = value_unit.into();
        self
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Time between first and last sample.
    pub fn span(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    /// Sampling intervals `t_i - t_{i-1}`.
    pub fn intervals(&self) -> Vec<f64> {
        self.times.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Successive amplitude differences `x_i - x_{i-1}`.
    pub fn differences(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Average sampling interval `T / M` with `T` measured from `origin` to the
    /// last sample.
    pub fn mean_interval_from(&self, origin: f64) -> f64 {
        (self.times[self.times.len() - 1] - origin) / self.len() as f64
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.times, self.values)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentationConfig {
    /// Time period `w` covered by every segment.
    pub window: f64,
    /// Left edge of the first window.
    pub origin: f64,
    /// Optional right edge of the record. Windows are added until this time is
    /// covered even if they end up empty.
    #[serde(default)]
    pub end: Option<f64>,
}

impl SegmentationConfig {
    pub fn new(window: f64, origin: f64) -> Self {
        Self {
            window,
            origin,
            end: None,
        }
    }

    pub fn with_end(mut self, end: f64) -> Self {
        self.end = Some(end);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.window > 0.0 && self.window.is_finite()) {
            return Err(Error::invalid(format!(
                "window duration must be positive and finite, got {}",
                self.window
            )));
        }
        if !self.origin.is_finite() {
            return Err(Error::invalid("segmentation origin must be finite"));
        }
        Ok(())
    }

    /// Left edge of window `index`.
    pub fn window_start(&self, index: usize) -> f64 {
        self.origin + index as f64 * self.window
    }

    /// Index of the half-open window `[start, start + w)` containing `t`.
    pub fn window_index(&self, t: f64) -> usize {
        let mut idx = ((t - self.origin) / self.window).floor().max(0.0) as usize;
        while idx > 0 && t < self.window_start(idx) {
            idx -= 1;
        }
        while t >= self.window_start(idx + 1) {
            idx += 1;
        }
        idx
    }
}

/// One window of a segmented series.
///
/// Relative times are offsets from `start_time` and lie in `[0, duration)`.
/// The absolute sample times are kept alongside so a segmentation can be
/// undone without floating point drift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub index: usize,
    pub start_time: f64,
    pub duration: f64,
    rel_times: Vec<f64>,
    abs_times: Vec<f64>,
    amplitudes: Vec<f64>,
}

impl Segment {
    /// Builds a segment from window-relative offsets.
    pub fn from_relative(
        index: usize,
        start_time: f64,
        duration: f64,
        rel_times: Vec<f64>,
        amplitudes: Vec<f64>,
    ) -> Result<Self> {
        if rel_times.len() != amplitudes.len() {
            return Err(Error::invalid(
                "segment times and amplitudes differ in length",
            ));
        }
        if !(duration > 0.0) {
            return Err(Error::invalid("segment duration must be positive"));
        }
        if rel_times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("segment offsets must be sorted ascending"));
        }
        if rel_times.iter().any(|&t| !(0.0..duration).contains(&t)) {
            return Err(Error::invalid(format!(
                "segment offsets must lie in [0, {duration})"
            )));
        }
        let abs_times = rel_times.iter().map(|&r| start_time + r).collect();
        Ok(Self {
            index,
            start_time,
            duration,
            rel_times,
            abs_times,
            amplitudes,
        })
    }

    pub fn empty(index: usize, start_time: f64, duration: f64) -> Self {
        Self {
            index,
            start_time,
            duration,
            rel_times: Vec::new(),
            abs_times: Vec::new(),
            amplitudes: Vec::new(),
        }
    }

    fn push(&mut self, abs_time: f64, amplitude: f64) {
        let mut rel = abs_time - self.start_time;
        if rel >= self.duration {
            rel = prev_below(self.duration);
        }
        self.rel_times.push(rel.max(0.0));
        self.abs_times.push(abs_time);
        self.amplitudes.push(amplitude);
    }

    pub fn rel_times(&self) -> &[f64] {
        &self.rel_times
    }

    pub fn abs_times(&self) -> &[f64] {
        &self.abs_times
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn size(&self) -> usize {
        self.rel_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rel_times.is_empty()
    }

    /// Same samples, but with all offsets divided by the window duration so
    /// they fall into `[0, 1)`.
    pub fn normalized(&self) -> Segment {
        let mut out = self.clone();
        for r in &mut out.rel_times {
            *r /= self.duration;
        }
        out.duration = 1.0;
        out
    }
}

fn prev_below(x: f64) -> f64 {
    f64::from_bits(x.to_bits() - 1)
}

/// Splits a series into contiguous windows of equal duration.
///
/// Every sample lands in exactly one window `[start, start + w)`; windows
/// without samples are kept as empty segments.
pub fn segment(series: &IrregularSeries, cfg: &SegmentationConfig) -> Result<Vec<Segment>> {
    segment_parts(series.times(), series.values(), cfg)
}

pub(crate) fn segment_parts(
    times: &[f64],
    values: &[f64],
    cfg: &SegmentationConfig,
) -> Result<Vec<Segment>> {
    cfg.validate()?;
    if times.is_empty() {
        return Err(Error::invalid("cannot segment an empty series"));
    }
    if cfg.origin > times[0] {
        return Err(Error::invalid(format!(
            "segmentation origin {} lies after the first sample {}",
            cfg.origin, times[0]
        )));
    }
    let last = times[times.len() - 1];
    let mut count = cfg.window_index(last) + 1;
    if let Some(end) = cfg.end {
        if end > cfg.origin {
            let covering = ((end - cfg.origin) / cfg.window).ceil() as usize;
            count = count.max(covering);
        }
    }
    let mut segments: Vec<Segment> = (0..count)
        .map(|i| Segment::empty(i, cfg.window_start(i), cfg.window))
        .collect();
    let mut idx = 0;
    for (&t, &v) in times.iter().zip(values) {
        while t >= cfg.window_start(idx + 1) {
            idx += 1;
        }
        segments[idx].push(t, v);
    }
    Ok(segments)
}

/// Inverse of [`segment`]: concatenates the samples of all segments.
pub fn concatenate(segments: &[Segment]) -> Result<IrregularSeries> {
    let total: usize = segments.iter().map(Segment::size).sum();
    let mut times = Vec::with_capacity(total);
    let mut values = Vec::with_capacity(total);
    for s in segments {
        times.extend_from_slice(s.abs_times());
        values.extend_from_slice(s.amplitudes());
    }
    IrregularSeries::new(times, values)
}

pub fn segment_sizes(segments: &[Segment]) -> Vec<usize> {
    segments.iter().map(Segment::size).collect()
}
