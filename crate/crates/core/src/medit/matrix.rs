// SPDX-License-Identifier: MIT OR Apache-2.0

use rayon::prelude::*;

use super::{edit_distance, CostParams};
use crate::error::{Error, Result};
use crate::series::Segment;

/// Read access to a symmetric matrix of segment distances.
pub trait DistanceView: Sync {
    fn size(&self) -> usize;
    fn get(&self, i: usize, j: usize) -> f64;
    /// Start time of the segment behind row `i`.
    fn start_time(&self, i: usize) -> f64;
}

/// Dense symmetric distance matrix stored as its strict upper triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    upper: Vec<f64>,
    start_times: Vec<f64>,
}

#[inline]
fn packed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl DistanceMatrix {
    pub fn from_segments(segments: &[Segment], p: &CostParams) -> Self {
        let start_times = segments.iter().map(|s| s.start_time).collect();
        Self::from_fn(start_times, |i, j| {
            edit_distance(&segments[i], &segments[j], p)
        })
    }

    /// Evaluates `f(i, j)` for every `i < j`, in parallel over rows.
    pub fn from_fn<F>(start_times: Vec<f64>, f: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        let n = start_times.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| ((i + 1)..n).map(|j| f(i, j)).collect())
            .collect();
        Self {
            size: n,
            upper: rows.into_iter().flatten().collect(),
            start_times,
        }
    }

    /// Builds from the packed upper triangle, row-major.
    pub fn from_upper(start_times: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = start_times.len();
        if upper.len() != n * n.saturating_sub(1) / 2 {
            return Err(Error::Format(format!(
                "upper triangle of a {n}x{n} matrix needs {} entries, got {}",
                n * n.saturating_sub(1) / 2,
                upper.len()
            )));
        }
        if upper.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Format(
                "distances must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            size: n,
            upper,
            start_times,
        })
    }

    /// Builds from full rows, checking symmetry and a zero diagonal.
    pub fn from_dense(start_times: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        let n = start_times.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Format(format!("expected a {n}x{n} matrix")));
        }
        for i in 0..n {
            if rows[i][i] != 0.0 {
                return Err(Error::Format(format!("nonzero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::Format(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        let upper = (0..n)
            .flat_map(|i| rows[i][(i + 1)..].iter().copied())
            .collect();
        Self::from_upper(start_times, upper)
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn start_times(&self) -> &[f64] {
        &self.start_times
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.size).map(|j| self.get(i, j)).collect()
    }
}

impl DistanceView for DistanceMatrix {
    fn size(&self) -> usize {
        self.size
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.upper[packed_index(self.size, i, j)],
            std::cmp::Ordering::Greater => self.upper[packed_index(self.size, j, i)],
        }
    }

    fn start_time(&self, i: usize) -> f64 {
        self.start_times[i]
    }
}

/// Distances restricted to `|i - j| <= bandwidth`, enough for sliding windows
/// of `bandwidth + 1` consecutive segments.
#[derive(Clone, Debug)]
pub struct BandedDistances {
    size: usize,
    bandwidth: usize,
    data: Vec<f64>,
    start_times: Vec<f64>,
}

impl BandedDistances {
    pub fn from_segments(segments: &[Segment], p: &CostParams, bandwidth: usize) -> Self {
        let n = segments.len();
        let data: Vec<f64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                (1..=bandwidth).map(move |k| {
                    let j = i + k;
                    if j < n {
                        edit_distance(&segments[i], &segments[j], p)
                    } else {
                        f64::NAN
                    }
                })
            })
            .collect();
        Self {
            size: n,
            bandwidth,
            data,
            start_times: segments.iter().map(|s| s.start_time).collect(),
        }
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }
}

impl DistanceView for BandedDistances {
    fn size(&self) -> usize {
        self.size
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        if lo == hi {
            return 0.0;
        }
        let k = hi - lo;
        assert!(k <= self.bandwidth, "({i}, {j}) lies outside the band");
        self.data[lo * self.bandwidth + k - 1]
    }

    fn start_time(&self, i: usize) -> f64 {
        self.start_times[i]
    }
}

/// Square block `[offset, offset + size)` of another view.
pub struct SubMatrix<'a, V: DistanceView + ?Sized> {
    base: &'a V,
    offset: usize,
    size: usize,
}

impl<'a, V: DistanceView + ?Sized> SubMatrix<'a, V> {
    pub fn new(base: &'a V, offset: usize, size: usize) -> Self {
        assert!(offset + size <= base.size());
        Self { base, offset, size }
    }
}

impl<V: DistanceView + ?Sized> DistanceView for SubMatrix<'_, V> {
    fn size(&self) -> usize {
        self.size
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.base.get(self.offset + i, self.offset + j)
    }

    fn start_time(&self, i: usize) -> f64 {
        self.base.start_time(self.offset + i)
    }
}
