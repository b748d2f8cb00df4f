// SPDX-License-Identifier: MIT OR Apache-2.0

//! Recurrence quantification of irregularly sampled series.
//!
//! Series are cut into fixed-duration segments, segments are compared with a
//! modified edit distance, and the resulting distance matrix is thresholded
//! into a recurrence plot. Sliding-window determinism (DET) is corrected for
//! sampling-induced artifacts with sampling-rate-constrained (SRC)
//! surrogates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod generators;
pub mod io;
pub mod medit;
pub mod oracles;
pub mod pipeline;
pub mod preprocess;
pub mod presets;
pub mod recurrence;
pub mod series;
pub mod stats;
pub mod surrogates;

pub use error::{Error, Result};
pub use medit::{CostParams, DistanceMatrix, DistanceView};
pub use recurrence::{RqaParams, WindowSpec};
pub use series::{IrregularSeries, Segment, SegmentationConfig};
