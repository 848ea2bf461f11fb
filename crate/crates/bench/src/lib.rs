//! Workload generators shared by the benchmarks.

use compeval_core::multiset::{enumerate_estimates, MultisetEstimate};
use compeval_core::scales::MultisetScale;

/// Deterministic pseudo-random integer points in `[0, span)^dim`.
pub fn grid_points(n: usize, dim: usize, span: u64, seed: u64) -> Vec<Vec<u64>> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = move || {
        // xorshift64*
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        state.wrapping_mul(2685821657736338717)
    };
    (0..n).map(|_| (0..dim).map(|_| next() % span).collect()).collect()
}

/// Pointwise dominance for minimised integer vectors.
pub fn dominates_min(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a != b
}

/// Every `step`-th estimate of `P^{l,n}`, cycling, `count` in total.
pub fn multiset_inputs(levels: usize, elements: u32, count: usize, step: usize) -> Vec<MultisetEstimate> {
    let scale = MultisetScale::new(levels, elements).expect("valid scale");
    let all = enumerate_estimates(&scale);
    (0..count).map(|i| all[(i * step) % all.len()].clone()).collect()
}
