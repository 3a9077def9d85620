//! Exact sparse l1-center training.
//!
//! The l1 objective separates per feature. A feature allowed to differ costs
//! `d_pos + d_neg` (class medians); a shared feature costs `d_all`, the
//! dispersion about the class-balanced weighted median. Keeping the `k`
//! features with the most negative `e = d_pos + d_neg - d_all` is optimal.

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::l2::check_centers;
use crate::model::{CenterModel, ModelKind};
use crate::path::SparsityPath;
use crate::ranking::{top_k, RankOrder, RankedScores};
use crate::stats::{DispersionTriple, MedianSummary};

/// Gains above zero but at most this are treated as round-off and clamped.
pub const GAIN_ROUND_OFF: f64 = 1e-9;

/// Everything needed to build the optimal l1 model for any `k` in `O(m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct L1TrainArtifacts {
    pub median_pos: Vec<f64>,
    pub median_neg: Vec<f64>,
    pub pooled_median: Vec<f64>,
    /// Dispersions with `e` already clamped to be nonpositive.
    pub dispersions: DispersionTriple,
    /// Features by increasing `e`, ties by ascending index.
    pub ranking: RankedScores,
    feature_names: Option<Vec<String>>,
}

impl L1TrainArtifacts {
    pub fn fit(d: &Dataset) -> Result<Self> {
        let (summary, names) = summarize(d)?;
        let ranking = RankedScores::new(summary.dispersions.e.clone(), RankOrder::Ascending);
        Ok(L1TrainArtifacts {
            median_pos: summary.median_pos,
            median_neg: summary.median_neg,
            pooled_median: summary.pooled,
            dispersions: summary.dispersions,
            ranking,
            feature_names: names,
        })
    }

    pub fn n_features(&self) -> usize {
        self.pooled_median.len()
    }

    pub fn model(&self, k: usize) -> Result<CenterModel> {
        if k > self.n_features() {
            return Err(Error::KOutOfRange {
                k,
                m: self.n_features(),
            });
        }
        build_model(
            &self.median_pos,
            &self.median_neg,
            &self.pooled_median,
            self.ranking.selected(k),
            k,
            self.feature_names.clone(),
        )
    }

    /// `sum_{i in set} (d_pos + d_neg) + sum_{i not in set} d_all`.
    pub fn decomposed_objective(&self, set: &[usize]) -> f64 {
        let t = &self.dispersions;
        let mut in_set = vec![false; self.n_features()];
        for &i in set {
            in_set[i] = true;
        }
        (0..self.n_features())
            .map(|i| if in_set[i] { t.d_pos[i] + t.d_neg[i] } else { t.d_all[i] })
            .sum()
    }
}

fn summarize(d: &Dataset) -> Result<(MedianSummary, Option<Vec<String>>)> {
    let mut summary = MedianSummary::compute(d);
    for (i, e) in summary.dispersions.e.iter_mut().enumerate() {
        if *e > GAIN_ROUND_OFF {
            return Err(Error::Consistency(format!(
                "dispersion gain e = {e:e} > 0 at feature {}",
                d.feature_name(i)
            )));
        }
        if *e > 0.0 {
            *e = 0.0;
        }
    }
    Ok((summary, d.feature_names().map(<[String]>::to_vec)))
}

fn build_model(
    median_pos: &[f64],
    median_neg: &[f64],
    pooled: &[f64],
    selected: Vec<usize>,
    k: usize,
    feature_names: Option<Vec<String>>,
) -> Result<CenterModel> {
    let mut theta_pos = pooled.to_vec();
    let mut theta_neg = pooled.to_vec();
    for &i in &selected {
        theta_pos[i] = median_pos[i];
        theta_neg[i] = median_neg[i];
    }
    CenterModel::new(ModelKind::L1, k, selected, theta_pos, theta_neg)?.with_feature_names(feature_names)
}

/// Trains the optimal sparse l1-center classifier with at most `k` differing coordinates.
pub fn train_l1(d: &Dataset, k: usize) -> Result<CenterModel> {
    if k > d.n_features() {
        return Err(Error::KOutOfRange { k, m: d.n_features() });
    }
    let (s, names) = summarize(d)?;
    let selected = top_k(&s.dispersions.e, k, RankOrder::Ascending);
    build_model(&s.median_pos, &s.median_neg, &s.pooled, selected, k, names)
}

/// Objectives for every `k` from a single ranking of `e`.
pub fn sparsity_path_l1(d: &Dataset) -> Result<SparsityPath> {
    let art = L1TrainArtifacts::fit(d)?;
    let t = &art.dispersions;
    let order = art.ranking.order();
    let m = order.len();
    // objective(k) = prefix of (d_pos + d_neg) + suffix of d_all along the ranking
    let mut suffix = vec![0.0; m + 1];
    for r in (0..m).rev() {
        suffix[r] = suffix[r + 1] + t.d_all[order[r]];
    }
    let mut objectives = Vec::with_capacity(m + 1);
    let mut prefix = 0.0;
    objectives.push(suffix[0]);
    for (r, &i) in order.iter().enumerate() {
        prefix += t.d_pos[i] + t.d_neg[i];
        objectives.push(prefix + suffix[r + 1]);
    }
    Ok(SparsityPath {
        kind: ModelKind::L1,
        ranking: art.ranking,
        objectives,
    })
}

/// `(1/n_pos) sum_{pos} ||x - theta_pos||_1 + (1/n_neg) sum_{neg} ||x - theta_neg||_1`.
pub fn objective_l1(d: &Dataset, theta_pos: &[f64], theta_neg: &[f64]) -> Result<f64> {
    check_centers(d, theta_pos, theta_neg)?;
    let (n_pos, n_neg) = (d.n_positive() as f64, d.n_negative() as f64);
    let (mut sp, mut sn) = (0.0, 0.0);
    for (i, row) in d.features().enumerate() {
        for (v, label) in row.iter().zip(d.labels()) {
            match label {
                Label::Positive => sp += (v - theta_pos[i]).abs(),
                Label::Negative => sn += (v - theta_neg[i]).abs(),
            }
        }
    }
    Ok(sp / n_pos + sn / n_neg)
}
