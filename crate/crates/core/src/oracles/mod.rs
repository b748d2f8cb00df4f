// SPDX-License-Identifier: MIT OR Apache-2.0

//! Analytical results for exponentially sampled events and the Monte Carlo
//! cost-matrix experiments they are checked against.

mod experiments;
mod special;

pub use experiments::{
    deletion_cost_matrix, derive_seed, rate_shifting_experiment, size_shifting_experiment,
    skellam_check, superpopulation_indel_cost, CostMatrixResult, DeletionMode, MatrixKind,
    RateExperiment, ShiftingCosts, SizeExperiment, SizeShiftingCosts, SkellamCheck,
};
pub use special::{
    bessel_i, erlang_pdf, expected_abs_difference, expected_deletion_cost, exponential_pdf,
    marcum_q, poisson_pmf, skellam_pmf, SKELLAM_MAX_RATE,
};
