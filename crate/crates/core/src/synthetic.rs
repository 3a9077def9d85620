//! Seeded synthetic datasets for tests, benchmarks and demos.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::{Dataset, Label};
use crate::eval::seeded_rng;

/// Alternating labels `+, -, +, -, ...` so both classes are present for `n >= 2`.
pub fn alternating_labels(n: usize) -> Vec<Label> {
    (0..n)
        .map(|j| if j % 2 == 0 { Label::Positive } else { Label::Negative })
        .collect()
}

/// Random labels with the first sample positive and the second negative.
pub fn random_labels(n: usize, seed: u64) -> Vec<Label> {
    let mut rng = seeded_rng(seed, 1);
    (0..n)
        .map(|j| match j {
            0 => Label::Positive,
            1 => Label::Negative,
            _ if rng.random::<bool>() => Label::Positive,
            _ => Label::Negative,
        })
        .collect()
}

/// `m x n` i.i.d. standard normal features with random labels.
pub fn gaussian(m: usize, n: usize, seed: u64) -> Dataset {
    let mut rng = seeded_rng(seed, 0);
    let values = (0..m * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    Dataset::from_feature_major(values, m, random_labels(n, seed)).expect("valid synthetic dataset")
}

/// Features on a small integer grid, so ties and repeated values are common.
pub fn integer_grid(m: usize, n: usize, levels: i32, seed: u64) -> Dataset {
    let mut rng = seeded_rng(seed, 0);
    let values = (0..m * n).map(|_| f64::from(rng.random_range(0..levels))).collect();
    Dataset::from_feature_major(values, m, random_labels(n, seed)).expect("valid synthetic dataset")
}

/// Features uniform on `[0, 1)` with alternating labels; cheap to generate at scale.
pub fn uniform(m: usize, n: usize, seed: u64) -> Dataset {
    let mut rng = seeded_rng(seed, 0);
    let values = (0..m * n).map(|_| rng.random::<f64>()).collect();
    Dataset::from_feature_major(values, m, alternating_labels(n)).expect("valid synthetic dataset")
}

/// Two Gaussian classes that differ only on `signal` features.
///
/// Every feature is standard normal noise scaled by `noise_sd`; on signal
/// features positives are shifted by `+separation / 2` and negatives by
/// `-separation / 2`. Labels alternate.
pub fn two_blobs(m: usize, n: usize, signal: &[usize], separation: f64, noise_sd: f64, seed: u64) -> Dataset {
    let mut rng = seeded_rng(seed, 0);
    let labels = alternating_labels(n);
    let mut values = Vec::with_capacity(m * n);
    for i in 0..m {
        let shift = if signal.contains(&i) { separation / 2.0 } else { 0.0 };
        for label in &labels {
            let z: f64 = StandardNormal.sample(&mut rng);
            let sign = f64::from(label.sign());
            values.push(sign * shift + noise_sd * z);
        }
    }
    Dataset::from_feature_major(values, m, labels).expect("valid synthetic dataset")
}

/// The same features with labels permuted uniformly at random.
pub fn shuffle_labels(d: &Dataset, seed: u64) -> Dataset {
    let mut labels = d.labels().to_vec();
    crate::eval::shuffle(&mut labels, &mut seeded_rng(seed, 2));
    let values = d.features().flat_map(|r| r.iter().copied()).collect();
    let out = Dataset::from_feature_major(values, d.n_features(), labels).expect("permutation keeps both classes");
    match d.feature_names() {
        Some(names) => out.with_feature_names(names.to_vec()).expect("same width"),
        None => out,
    }
}
