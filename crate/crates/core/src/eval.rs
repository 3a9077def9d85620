//! Repeated train/test evaluation and sparsity-accuracy curves.
//!
//! # Randomness
//!
//! All randomness comes from ChaCha8 keyed with the 64-bit seed in
//! little-endian order in the first eight key bytes (remaining bytes zero),
//! with the split index as the stream number. Shuffles are Fisher-Yates from
//! the back, drawing `j = floor(u * (i + 1) / 2^64)` for each 64-bit output
//! `u`. Both pieces are fully specified, so splits reproduce on any platform.

use std::io::Write;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::model::CenterModel;
use crate::trainer::{ScaledArtifacts, TrainOptions};

/// ChaCha8 generator for `(seed, stream)`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// In-place Fisher-Yates shuffle with multiply-shift index draws.
pub fn shuffle<T>(items: &mut [T], rng: &mut impl RngCore) {
    for i in (1..items.len()).rev() {
        let j = ((u128::from(rng.next_u64()) * (i as u128 + 1)) >> 64) as usize;
        items.swap(i, j);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitStrategy {
    /// Each class is split separately in the requested proportion.
    #[default]
    Stratified,
    /// One split over all samples; fails if a class misses the training set.
    Uniform,
}

impl std::str::FromStr for SplitStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stratified" => Ok(SplitStrategy::Stratified),
            "uniform" => Ok(SplitStrategy::Uniform),
            other => Err(Error::InvalidArgument(format!(
                "unknown split strategy {other:?} (expected stratified or uniform)"
            ))),
        }
    }
}

/// Held-out samples; unlike a [`Dataset`] either class may be absent.
#[derive(Debug, Clone, PartialEq)]
pub struct Holdout {
    pub samples: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
    /// Positions of the held-out samples in the source dataset.
    pub indices: Vec<usize>,
}

impl Holdout {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Dataset,
    pub test: Holdout,
    pub train_indices: Vec<usize>,
}

/// Stratified split keeping `round(fraction * n_c)` samples of each class for training.
pub fn split(d: &Dataset, fraction: f64, seed: u64) -> Result<Split> {
    split_with(d, fraction, &mut seeded_rng(seed, 0), SplitStrategy::Stratified)
}

pub fn split_with(d: &Dataset, fraction: f64, rng: &mut impl RngCore, strategy: SplitStrategy) -> Result<Split> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let mut train_indices = Vec::new();
    match strategy {
        SplitStrategy::Stratified => {
            let part = d.partition();
            for (label, mut idx) in [(Label::Positive, part.positive), (Label::Negative, part.negative)] {
                shuffle(&mut idx, rng);
                let keep = (fraction * idx.len() as f64).round() as usize;
                if keep == 0 {
                    return Err(Error::InvalidArgument(format!(
                        "{label} class has {} samples, too few for a training fraction of {fraction}",
                        idx.len()
                    )));
                }
                train_indices.extend_from_slice(&idx[..keep]);
            }
        }
        SplitStrategy::Uniform => {
            let mut idx: Vec<usize> = (0..d.n_samples()).collect();
            shuffle(&mut idx, rng);
            let keep = (fraction * idx.len() as f64).round() as usize;
            train_indices.extend_from_slice(&idx[..keep]);
        }
    }
    train_indices.sort_unstable();
    if train_indices.len() == d.n_samples() {
        return Err(Error::InvalidArgument(format!(
            "fraction {fraction} leaves no test samples out of {}",
            d.n_samples()
        )));
    }
    let mut in_train = vec![false; d.n_samples()];
    for &j in &train_indices {
        in_train[j] = true;
    }
    let test_indices: Vec<usize> = (0..d.n_samples()).filter(|&j| !in_train[j]).collect();
    let train = d.select_samples(&train_indices)?;
    let test = Holdout {
        samples: test_indices.iter().map(|&j| d.sample(j)).collect(),
        labels: test_indices.iter().map(|&j| d.labels()[j]).collect(),
        indices: test_indices,
    };
    Ok(Split {
        train,
        test,
        train_indices,
    })
}

/// Accuracy and balanced accuracy (mean recall over the classes present).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub accuracy: f64,
    pub balanced_accuracy: f64,
}

pub fn score(model: &CenterModel, test: &Holdout) -> Result<Scores> {
    if test.is_empty() {
        return Err(Error::InvalidArgument("empty test set".into()));
    }
    // [negative, positive]
    let mut hits = [0usize; 2];
    let mut totals = [0usize; 2];
    for (x, &y) in test.samples.iter().zip(&test.labels) {
        let c = usize::from(y == Label::Positive);
        totals[c] += 1;
        if model.predict(x)?.label == y {
            hits[c] += 1;
        }
    }
    let accuracy = (hits[0] + hits[1]) as f64 / test.len() as f64;
    let recalls: Vec<f64> = (0..2)
        .filter(|&c| totals[c] > 0)
        .map(|c| hits[c] as f64 / totals[c] as f64)
        .collect();
    let balanced_accuracy = recalls.iter().sum::<f64>() / recalls.len() as f64;
    Ok(Scores {
        accuracy,
        balanced_accuracy,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub train: TrainOptions,
    pub k_list: Vec<usize>,
    pub n_splits: usize,
    pub fraction: f64,
    pub seed: u64,
    pub strategy: SplitStrategy,
}

impl EvalConfig {
    /// 50 stratified 80/20 splits.
    pub fn new(train: TrainOptions, k_list: Vec<usize>, seed: u64) -> Self {
        EvalConfig {
            train,
            k_list,
            n_splits: 50,
            fraction: 0.8,
            seed,
            strategy: SplitStrategy::Stratified,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub k: usize,
    pub mean_accuracy: f64,
    pub sd_accuracy: f64,
    pub mean_balanced_accuracy: f64,
    /// Wall-clock seconds per split to fit and extract the model.
    pub mean_train_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub per_k: Vec<EvalRecord>,
    pub n_splits: usize,
    pub split_fraction: f64,
    pub seed: u64,
}

impl EvalReport {
    pub fn record(&self, k: usize) -> Option<&EvalRecord> {
        self.per_k.iter().find(|r| r.k == k)
    }

    /// Writes `k,mean_acc,sd_acc,mean_bal_acc,mean_train_time_s`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["k", "mean_acc", "sd_acc", "mean_bal_acc", "mean_train_time_s"])?;
        for r in &self.per_k {
            wtr.write_record([
                r.k.to_string(),
                format!("{:?}", r.mean_accuracy),
                format!("{:?}", r.sd_accuracy),
                format!("{:?}", r.mean_balanced_accuracy),
                format!("{:?}", r.mean_train_time_s),
            ])?;
        }
        wtr.flush().map_err(|e| Error::io("<report output>", e))?;
        Ok(())
    }
}

/// Trains on each split and scores every requested `k` on the held-out part.
///
/// The ranking is fitted once per split; models for each `k` are read off it.
pub fn evaluate(d: &Dataset, cfg: &EvalConfig) -> Result<EvalReport> {
    if cfg.n_splits == 0 {
        return Err(Error::InvalidArgument("at least one split is required".into()));
    }
    let m = d.n_features();
    if let Some(&k) = cfg.k_list.iter().find(|&&k| k > m) {
        return Err(Error::KOutOfRange { k, m });
    }
    let nk = cfg.k_list.len();
    // [split][k]
    let mut acc = vec![vec![0.0; nk]; cfg.n_splits];
    let mut bal = vec![vec![0.0; nk]; cfg.n_splits];
    let mut time = vec![vec![0.0; nk]; cfg.n_splits];

    for s in 0..cfg.n_splits {
        let mut rng = seeded_rng(cfg.seed, s as u64);
        let sp = split_with(d, cfg.fraction, &mut rng, cfg.strategy)?;
        let start = Instant::now();
        let artifacts = ScaledArtifacts::fit(&sp.train, cfg.train)?;
        let fit_time = start.elapsed().as_secs_f64();
        for (c, &k) in cfg.k_list.iter().enumerate() {
            let start = Instant::now();
            let model = artifacts.model(k)?;
            time[s][c] = fit_time + start.elapsed().as_secs_f64();
            let sc = score(&model, &sp.test)?;
            acc[s][c] = sc.accuracy;
            bal[s][c] = sc.balanced_accuracy;
        }
    }

    let ns = cfg.n_splits as f64;
    let column = |table: &[Vec<f64>], c: usize| table.iter().map(|row| row[c]).collect::<Vec<f64>>();
    let per_k = cfg
        .k_list
        .iter()
        .enumerate()
        .map(|(c, &k)| {
            let a = column(&acc, c);
            let mean = a.iter().sum::<f64>() / ns;
            let sd = if cfg.n_splits > 1 {
                (a.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (ns - 1.0)).sqrt()
            } else {
                0.0
            };
            EvalRecord {
                k,
                mean_accuracy: mean,
                sd_accuracy: sd,
                mean_balanced_accuracy: column(&bal, c).iter().sum::<f64>() / ns,
                mean_train_time_s: column(&time, c).iter().sum::<f64>() / ns,
            }
        })
        .collect();
    Ok(EvalReport {
        per_k,
        n_splits: cfg.n_splits,
        split_fraction: cfg.fraction,
        seed: cfg.seed,
    })
}
