// SPDX-License-Identifier: MIT OR Apache-2.0

//! Recurrence plots from distance matrices, diagonal line statistics and DET.
//!
//! Cells with `|i - j| < max(1, theiler)` are never counted: the line of
//! identity (LOI) and its Theiler neighbourhood are excluded both from the
//! threshold quantile and from the line histogram.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medit::{DistanceView, SubMatrix};
use crate::stats::nearest_rank;

/// Symmetric binary matrix with a unit main diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct RecurrencePlot {
    size: usize,
    cells: Vec<bool>,
    pub threshold: f64,
    pub target_rate: f64,
    /// Fraction of counted (off-Theiler) cells that are recurrent.
    pub realized_rate: f64,
    pub theiler: usize,
}

impl RecurrencePlot {
    /// Wraps an explicit binary matrix; the diagonal is forced to 1.
    pub fn from_cells(rows: &[Vec<bool>], theiler: usize) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("recurrence matrix must be square"));
        }
        let mut cells = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::invalid("recurrence matrix must be symmetric"));
                }
                cells[i * n + j] = i == j || rows[i][j];
            }
        }
        let mut rp = Self {
            size: n,
            cells,
            threshold: f64::NAN,
            target_rate: f64::NAN,
            realized_rate: 0.0,
            theiler,
        };
        rp.realized_rate = rp.counted_rate();
        Ok(rp)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.size + j]
    }

    fn first_offset(&self) -> usize {
        self.theiler.max(1)
    }

    fn counted_rate(&self) -> f64 {
        let first = self.first_offset();
        let (mut hits, mut total) = (0usize, 0usize);
        for i in 0..self.size {
            for j in (i + first)..self.size {
                total += 1;
                hits += self.get(i, j) as usize;
            }
        }
        if total == 0 {
            0.0
        } else {
            hits as f64 / total as f64
        }
    }

    /// Recurrent cells in the upper triangle, `(i, j)` with `i < j`.
    pub fn upper_coordinates(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.size {
            for j in (i + 1)..self.size {
                if self.get(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Thresholds `d` so that a fraction `rate` of the counted cells recur. The
/// threshold is the nearest-rank `rate` quantile of the off-LOI distances.
pub fn threshold_by_rate<V: DistanceView + ?Sized>(
    d: &V,
    rate: f64,
    theiler: usize,
) -> Result<RecurrencePlot> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::invalid(format!(
            "recurrence rate must lie in (0, 1), got {rate}"
        )));
    }
    let n = d.size();
    let first = theiler.max(1);
    let mut population = Vec::with_capacity(n * n / 2);
    for i in 0..n {
        for j in (i + first)..n {
            population.push(d.get(i, j));
        }
    }
    if population.is_empty() {
        return Err(Error::invalid(format!(
            "a {n}x{n} matrix has no cells outside the Theiler window {theiler}"
        )));
    }
    population.sort_by(f64::total_cmp);
    let eps = nearest_rank(&population, rate);
    let hits = population.partition_point(|&v| v <= eps);
    let mut cells = vec![false; n * n];
    for i in 0..n {
        cells[i * n + i] = true;
        for j in (i + 1)..n {
            let r = d.get(i, j) <= eps;
            cells[i * n + j] = r;
            cells[j * n + i] = r;
        }
    }
    Ok(RecurrencePlot {
        size: n,
        cells,
        threshold: eps,
        target_rate: rate,
        realized_rate: hits as f64 / population.len() as f64,
        theiler,
    })
}

/// Counts `P(l)` of maximal diagonal runs of recurrences, both triangles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiagonalHistogram {
    /// `counts[l]` is `P(l)`; index 0 is unused.
    pub counts: Vec<u64>,
}

impl DiagonalHistogram {
    pub fn count(&self, l: usize) -> u64 {
        self.counts.get(l).copied().unwrap_or(0)
    }

    /// `Σ l P(l)`, the number of recurrence points on counted diagonals.
    pub fn points(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(l, &c)| l as u64 * c)
            .sum()
    }
}

pub fn diagonal_histogram(rp: &RecurrencePlot) -> DiagonalHistogram {
    let n = rp.size();
    let mut counts = vec![0u64; n + 1];
    for k in rp.first_offset()..n {
        let mut run = 0usize;
        for i in 0..(n - k) {
            if rp.get(i, i + k) {
                run += 1;
            } else if run > 0 {
                counts[run] += 2;
                run = 0;
            }
        }
        if run > 0 {
            counts[run] += 2;
        }
    }
    DiagonalHistogram { counts }
}

/// Fraction of recurrence points on diagonal lines of length `>= l_min`.
pub fn det(hist: &DiagonalHistogram, l_min: usize) -> Result<f64> {
    if l_min < 1 {
        return Err(Error::invalid("minimum line length must be >= 1"));
    }
    let total = hist.points();
    if total == 0 {
        return Err(Error::UndefinedDet);
    }
    let long: u64 = hist
        .counts
        .iter()
        .enumerate()
        .skip(l_min)
        .map(|(l, &c)| l as u64 * c)
        .sum();
    Ok(long as f64 / total as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RqaParams {
    pub rate: f64,
    pub l_min: usize,
    pub theiler: usize,
}

impl Default for RqaParams {
    fn default() -> Self {
        Self {
            rate: 0.15,
            l_min: 2,
            theiler: 1,
        }
    }
}

/// DET of the whole matrix; `None` when no off-LOI cell recurs.
pub fn det_of<V: DistanceView + ?Sized>(d: &V, params: &RqaParams) -> Result<Option<f64>> {
    let rp = threshold_by_rate(d, params.rate, params.theiler)?;
    match det(&diagonal_histogram(&rp), params.l_min) {
        Ok(v) => Ok(Some(v)),
        Err(Error::UndefinedDet) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Sliding window over consecutive segments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    /// Number of segments per window.
    pub size: usize,
    /// Fraction of a window shared with the next one.
    pub overlap: f64,
}

impl WindowSpec {
    pub fn new(size: usize, overlap: f64) -> Self {
        Self { size, overlap }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < 2 {
            return Err(Error::invalid("window must span at least 2 segments"));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::invalid(format!(
                "window overlap must lie in [0, 1), got {}",
                self.overlap
            )));
        }
        if self.stride() < 1 {
            return Err(Error::invalid("window stride rounds to zero"));
        }
        Ok(())
    }

    pub fn stride(&self) -> usize {
        (self.size as f64 * (1.0 - self.overlap)).round() as usize
    }

    /// First segment index of every window fitting into `total` segments.
    pub fn starts(&self, total: usize) -> Vec<usize> {
        if total < self.size {
            return Vec::new();
        }
        (0..=(total - self.size)).step_by(self.stride()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DetPoint {
    pub start_index: usize,
    /// Mean start time of the window's segments.
    pub center: f64,
    pub det: Option<f64>,
}

/// DET in each window; every window is thresholded at `params.rate` on its own.
pub fn sliding_window_det<V: DistanceView + ?Sized>(
    d: &V,
    spec: &WindowSpec,
    params: &RqaParams,
) -> Result<Vec<DetPoint>> {
    spec.validate()?;
    if d.size() < spec.size {
        return Err(Error::invalid(format!(
            "{} segments do not fill one window of {}",
            d.size(),
            spec.size
        )));
    }
    spec.starts(d.size())
        .into_par_iter()
        .map(|start| {
            let sub = SubMatrix::new(d, start, spec.size);
            let center = (0..spec.size).map(|i| sub.start_time(i)).sum::<f64>() / spec.size as f64;
            Ok(DetPoint {
                start_index: start,
                center,
                det: det_of(&sub, params)?,
            })
        })
        .collect()
}
