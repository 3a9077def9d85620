//! Shared inputs for the training benchmarks.

use sparse_center::{synthetic, Dataset};

/// Sample count used across benchmarks.
pub const N_SAMPLES: usize = 256;

/// Feature counts swept by the scaling benchmarks.
pub const FEATURE_COUNTS: [usize; 3] = [1 << 10, 1 << 12, 1 << 14];

/// Uniform features with alternating labels, seeded by `m`.
pub fn workload(m: usize) -> Dataset {
    synthetic::uniform(m, N_SAMPLES, m as u64)
}

/// Weighted-median input of length `p`: standard normal values with class-balanced weights.
pub fn median_input(p: usize) -> (Vec<f64>, Vec<f64>) {
    let d = synthetic::gaussian(1, p, p as u64);
    let w = d
        .labels()
        .iter()
        .map(|l| match l {
            sparse_center::Label::Positive => 1.0 / d.n_positive() as f64,
            sparse_center::Label::Negative => 1.0 / d.n_negative() as f64,
        })
        .collect();
    (d.feature(0).to_vec(), w)
}
