// SPDX-License-Identifier: MIT OR Apache-2.0

use serde::{Deserialize, Serialize};

use super::{logistic_shift_cost, CostParams};
use crate::series::Segment;

/// Which samples may be deleted or added.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeletionPolicy {
    /// Deletions compete freely with shifts.
    #[default]
    Competing,
    /// Only the `|N_a - N_b|` deletions needed to equalize sizes; every sample
    /// of the smaller segment is shifted.
    BasicOnly,
}

/// Alignment DP over order-preserving matchings with `D[i][0] = i Λ_S`,
/// `D[0][j] = j Λ_S`.
fn align<F>(na: usize, nb: usize, indel: f64, policy: DeletionPolicy, pair: F) -> f64
where
    F: Fn(usize, usize) -> f64,
{
    match policy {
        DeletionPolicy::Competing => align_competing(na, nb, indel, pair),
        DeletionPolicy::BasicOnly if na >= nb => align_basic(na, nb, indel, pair),
        DeletionPolicy::BasicOnly => align_basic(nb, na, indel, |i, j| pair(j, i)),
    }
}

fn align_competing<F: Fn(usize, usize) -> f64>(na: usize, nb: usize, indel: f64, pair: F) -> f64 {
    let mut prev: Vec<f64> = (0..=nb).map(|j| j as f64 * indel).collect();
    let mut cur = vec![0.0; nb + 1];
    for i in 1..=na {
        cur[0] = i as f64 * indel;
        for j in 1..=nb {
            let del = prev[j] + indel;
            let add = cur[j - 1] + indel;
            let sub = prev[j - 1] + pair(i - 1, j - 1);
            cur[j] = del.min(add).min(sub);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[nb]
}

// Requires na >= nb; every sample of the shorter side gets matched.
fn align_basic<F: Fn(usize, usize) -> f64>(na: usize, nb: usize, indel: f64, pair: F) -> f64 {
    let mut prev: Vec<f64> = (0..=nb)
        .map(|j| if j == 0 { 0.0 } else { f64::INFINITY })
        .collect();
    let mut cur = vec![f64::INFINITY; nb + 1];
    for i in 1..=na {
        cur[0] = i as f64 * indel;
        for j in 1..=nb.min(i) {
            let del = prev[j] + indel;
            let sub = prev[j - 1] + pair(i - 1, j - 1);
            cur[j] = del.min(sub);
        }
        for c in cur.iter_mut().skip(i + 1) {
            *c = f64::INFINITY;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[nb]
}

/// Minimum transformation cost between two segments, using window-relative
/// sample times.
pub fn edit_distance(a: &Segment, b: &Segment, p: &CostParams) -> f64 {
    edit_distance_with_policy(a, b, p, DeletionPolicy::Competing)
}

pub fn edit_distance_with_policy(
    a: &Segment,
    b: &Segment,
    p: &CostParams,
    policy: DeletionPolicy,
) -> f64 {
    let (ta, la) = (a.rel_times(), a.amplitudes());
    let (tb, lb) = (b.rel_times(), b.amplitudes());
    align(ta.len(), tb.len(), p.indel_cost, policy, |i, j| {
        p.pair_cost(ta[i], la[i], tb[j], lb[j])
    })
}

/// Event variant: amplitudes are ignored and shifting is linear,
/// `Λ_0 |t_a - t_b|`. With `normalize_to_unit` each segment's offsets are
/// divided by its window duration first.
pub fn edit_distance_events(
    a: &Segment,
    b: &Segment,
    shift_rate: f64,
    indel: f64,
    normalize_to_unit: bool,
    policy: DeletionPolicy,
) -> f64 {
    let scale_a = if normalize_to_unit {
        1.0 / a.duration
    } else {
        1.0
    };
    let scale_b = if normalize_to_unit {
        1.0 / b.duration
    } else {
        1.0
    };
    let (ta, tb) = (a.rel_times(), b.rel_times());
    align(ta.len(), tb.len(), indel, policy, |i, j| {
        shift_rate * (ta[i] * scale_a - tb[j] * scale_b).abs()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum EditOp {
    Shift {
        a: usize,
        b: usize,
        shift_cost: f64,
        amplitude_cost: f64,
    },
    Delete {
        a: usize,
    },
    Add {
        b: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentAlignment {
    pub distance: f64,
    pub ops: Vec<EditOp>,
}

impl SegmentAlignment {
    /// Matched `(a, b)` index pairs in order.
    pub fn matching(&self) -> Vec<(usize, usize)> {
        self.ops
            .iter()
            .filter_map(|op| match op {
                EditOp::Shift { a, b, .. } => Some((*a, *b)),
                _ => None,
            })
            .collect()
    }
}

/// Full-table DP with backtracking; returns one optimal sequence of
/// operations. Same cost as [`edit_distance`].
pub fn edit_alignment(a: &Segment, b: &Segment, p: &CostParams) -> SegmentAlignment {
    let (ta, la) = (a.rel_times(), a.amplitudes());
    let (tb, lb) = (b.rel_times(), b.amplitudes());
    let (na, nb) = (ta.len(), tb.len());
    let s = p.indel_cost;
    let mut d = vec![vec![0.0; nb + 1]; na + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i as f64 * s;
    }
    for j in 0..=nb {
        d[0][j] = j as f64 * s;
    }
    for i in 1..=na {
        for j in 1..=nb {
            let sub = d[i - 1][j - 1] + p.pair_cost(ta[i - 1], la[i - 1], tb[j - 1], lb[j - 1]);
            d[i][j] = (d[i - 1][j] + s).min(d[i][j - 1] + s).min(sub);
        }
    }
    let mut ops = Vec::new();
    let (mut i, mut j) = (na, nb);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 {
            let c = p.pair_cost(ta[i - 1], la[i - 1], tb[j - 1], lb[j - 1]);
            if d[i][j] == d[i - 1][j - 1] + c {
                let coincide = c == 0.0;
                ops.push(EditOp::Shift {
                    a: i - 1,
                    b: j - 1,
                    shift_cost: if coincide {
                        0.0
                    } else {
                        logistic_shift_cost((ta[i - 1] - tb[j - 1]).abs(), p.tau, p.max_shift_cost)
                    },
                    amplitude_cost: if coincide {
                        0.0
                    } else {
                        p.amplitude_cost * (la[i - 1] - lb[j - 1]).abs()
                    },
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && d[i][j] == d[i - 1][j] + s {
            ops.push(EditOp::Delete { a: i - 1 });
            i -= 1;
        } else {
            ops.push(EditOp::Add { b: j - 1 });
            j -= 1;
        }
    }
    ops.reverse();
    SegmentAlignment {
        distance: d[na][nb],
        ops,
    }
}
