// SPDX-License-Identifier: MIT OR Apache-2.0

#![allow(dead_code)]

use srcrqa::{CostParams, Segment};

/// Minimum cost over every order-preserving matching, by exhaustive search.
pub fn brute_force_distance(a: &Segment, b: &Segment, p: &CostParams) -> f64 {
    fn go(
        a: &Segment,
        b: &Segment,
        p: &CostParams,
        i: usize,
        j0: usize,
        matched: usize,
        acc: f64,
    ) -> f64 {
        let (na, nb) = (a.size(), b.size());
        if i == na {
            return acc + p.indel_cost * (na + nb - 2 * matched) as f64;
        }
        let mut best = go(a, b, p, i + 1, j0, matched, acc);
        for j in j0..nb {
            let c = p.pair_cost(
                a.rel_times()[i],
                a.amplitudes()[i],
                b.rel_times()[j],
                b.amplitudes()[j],
            );
            best = best.min(go(a, b, p, i + 1, j + 1, matched + 1, acc + c));
        }
        best
    }
    go(a, b, p, 0, 0, 0, 0.0)
}

pub fn unit_segment(index: usize, mut rel: Vec<f64>, amps: Vec<f64>) -> Segment {
    rel.sort_by(f64::total_cmp);
    Segment::from_relative(index, index as f64, 1.0, rel, amps).unwrap()
}
