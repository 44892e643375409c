//! Slow reference implementations used to check the fast paths.
//!
//! Everything here enumerates subsets or partitions and is only meant for
//! inputs of a dozen elements or fewer.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::graph::SocialGraph;

/// `σ_p` for `p = 0..=N` by summing over all subsets.
pub fn esp_brute_force(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n + 1];
    for mask in 0u32..(1 << n) {
        let prod: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| values[i]).product();
        out[mask.count_ones() as usize] += prod;
    }
    out
}

/// Exact `σ_p` for `p = 0..=N` by subset enumeration.
pub fn esp_exact(values: &[BigRational]) -> Vec<BigRational> {
    let n = values.len();
    let one = BigRational::from_integer(BigInt::from(1));
    let mut out = vec![BigRational::from_integer(BigInt::from(0)); n + 1];
    for mask in 0u32..(1 << n) {
        let mut prod = one.clone();
        for (i, v) in values.iter().enumerate() {
            if mask >> i & 1 == 1 {
                prod *= v;
            }
        }
        out[mask.count_ones() as usize] += prod;
    }
    out
}

/// Exact `σ^{k̄}_p` for `p = 0..N`.
pub fn esp_excluding_exact(values: &[BigRational], k: usize) -> Vec<BigRational> {
    let rest: Vec<BigRational> = values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .map(|(_, v)| v.clone())
        .collect();
    esp_exact(&rest)
}

/// Converts an `f64` to the rational it represents exactly.
pub fn exact_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// `E[Σ_{k∈C} x_k u_k / Σ_{j∈C} u_j]` over all `m`-subsets `C`, with
/// `P(C) ∝ Π_{j∈C} q_j`; weights and `u` are given as logarithms.
pub fn ratio_expectation(log_q: &[f64], x: &[f64], log_u: &[f64], m: usize) -> f64 {
    let n = log_q.len();
    let mut terms = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != m {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let log_p: f64 = members.iter().map(|&i| log_q[i]).sum();
        if log_p == f64::NEG_INFINITY {
            continue;
        }
        let top = members.iter().map(|&i| log_u[i]).fold(f64::NEG_INFINITY, f64::max);
        let den: f64 = members.iter().map(|&i| (log_u[i] - top).exp()).sum();
        let num: f64 = members.iter().map(|&i| x[i] * (log_u[i] - top).exp()).sum();
        terms.push((log_p, num / den));
    }
    let top = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = terms.iter().map(|t| (t.0 - top).exp()).sum();
    terms.iter().map(|t| (t.0 - top).exp() * t.1).sum::<f64>() / z
}

/// All-pairs hop distances; `u32::MAX` between components.
pub fn all_pairs_distances(graph: &SocialGraph) -> Vec<Vec<u32>> {
    let n = graph.n();
    (0..n as u32)
        .map(|s| {
            let mut dist = vec![u32::MAX; n];
            dist[s as usize] = 0;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in graph.neighbors(u) {
                    if dist[v as usize] == u32::MAX {
                        dist[v as usize] = dist[u as usize] + 1;
                        queue.push_back(v);
                    }
                }
            }
            dist
        })
        .collect()
}

/// Fewest boxes of pairwise distance `≤ l_b` that partition the nodes.
///
/// Dynamic programming over node subsets, `O(3^n)`.
pub fn min_box_cover(graph: &SocialGraph, l_b: u32) -> usize {
    let n = graph.n();
    assert!(n <= 16, "exhaustive covering is limited to 16 nodes");
    if n == 0 {
        return 0;
    }
    let dist = all_pairs_distances(graph);
    let full = (1usize << n) - 1;
    let mut valid = vec![false; full + 1];
    valid[0] = true;
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        valid[mask] = valid[rest]
            && (0..n)
                .filter(|&j| rest >> j & 1 == 1)
                .all(|j| dist[low][j] <= l_b);
    }
    let mut best = vec![usize::MAX; full + 1];
    best[0] = 0;
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        // Boxes containing the lowest node of `mask`.
        let mut sub = rest;
        loop {
            let boxed = sub | low;
            if valid[boxed] && best[mask ^ boxed] != usize::MAX {
                best[mask] = best[mask].min(best[mask ^ boxed] + 1);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    best[full]
}
