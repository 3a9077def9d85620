//! Exact sparse l2-center training.
//!
//! For a fixed set `D` of features allowed to differ, the optimal centers are
//! the class centroids on `D` and the centroid midpoint elsewhere, and the
//! optimal objective is `cost' - 1/2 * sum_{i in D} delta_i^2` with
//! `delta = centroid_pos - centroid_neg`. The best `D` of size `k` therefore
//! keeps the `k` largest `|delta_i|`.

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::model::{CenterModel, ModelKind};
use crate::path::SparsityPath;
use crate::ranking::{top_k, RankOrder, RankedScores};
use crate::stats::{class_centroids, update_centroid_in_place};

/// Everything needed to build the optimal l2 model for any `k` in `O(m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct L2TrainArtifacts {
    pub centroid_pos: Vec<f64>,
    pub centroid_neg: Vec<f64>,
    pub midpoint: Vec<f64>,
    pub delta: Vec<f64>,
    /// Features by decreasing `|delta|`, ties by ascending index.
    pub ranking: RankedScores,
    feature_names: Option<Vec<String>>,
}

impl L2TrainArtifacts {
    pub fn fit(d: &Dataset) -> Self {
        let c = class_centroids(d);
        Self::from_centroids(c.center_pos, c.center_neg, d.feature_names().map(<[String]>::to_vec))
    }

    fn from_centroids(centroid_pos: Vec<f64>, centroid_neg: Vec<f64>, feature_names: Option<Vec<String>>) -> Self {
        let midpoint = midpoint(&centroid_pos, &centroid_neg);
        let delta = difference(&centroid_pos, &centroid_neg);
        let ranking = RankedScores::new(delta.clone(), RankOrder::DescendingAbs);
        L2TrainArtifacts {
            centroid_pos,
            centroid_neg,
            midpoint,
            delta,
            ranking,
            feature_names,
        }
    }

    pub fn n_features(&self) -> usize {
        self.delta.len()
    }

    /// The optimal model keeping the first `k` ranked features.
    pub fn model(&self, k: usize) -> Result<CenterModel> {
        check_k(k, self.n_features())?;
        build_model(
            &self.centroid_pos,
            &self.centroid_neg,
            &self.midpoint,
            self.ranking.selected(k),
            k,
            self.feature_names.clone(),
        )
    }
}

fn midpoint(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| (p + q) / 2.0).collect()
}

fn difference(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| p - q).collect()
}

fn check_k(k: usize, m: usize) -> Result<()> {
    if k > m {
        Err(Error::KOutOfRange { k, m })
    } else {
        Ok(())
    }
}

fn build_model(
    centroid_pos: &[f64],
    centroid_neg: &[f64],
    midpoint: &[f64],
    selected: Vec<usize>,
    k: usize,
    feature_names: Option<Vec<String>>,
) -> Result<CenterModel> {
    let mut theta_pos = midpoint.to_vec();
    let mut theta_neg = midpoint.to_vec();
    for &i in &selected {
        theta_pos[i] = centroid_pos[i];
        theta_neg[i] = centroid_neg[i];
    }
    CenterModel::new(ModelKind::L2, k, selected, theta_pos, theta_neg)?.with_feature_names(feature_names)
}

/// Trains the optimal sparse l2-center classifier with at most `k` differing coordinates.
///
/// Runs in `O(mn)` for the centroids plus a partial selection of the top `k`.
pub fn train_l2(d: &Dataset, k: usize) -> Result<CenterModel> {
    check_k(k, d.n_features())?;
    let c = class_centroids(d);
    train_from_centroids(
        &c.center_pos,
        &c.center_neg,
        k,
        d.feature_names().map(<[String]>::to_vec),
    )
}

fn train_from_centroids(
    centroid_pos: &[f64],
    centroid_neg: &[f64],
    k: usize,
    feature_names: Option<Vec<String>>,
) -> Result<CenterModel> {
    let mid = midpoint(centroid_pos, centroid_neg);
    let delta = difference(centroid_pos, centroid_neg);
    let selected = top_k(&delta, k, RankOrder::DescendingAbs);
    build_model(centroid_pos, centroid_neg, &mid, selected, k, feature_names)
}

/// The data-dependent constant `cost'`: the per-class mean squared norms minus
/// `1/2 * ||centroid_pos + centroid_neg||^2`.
pub fn l2_cost_constant(d: &Dataset, centroid_pos: &[f64], centroid_neg: &[f64]) -> f64 {
    let (n_pos, n_neg) = (d.n_positive() as f64, d.n_negative() as f64);
    d.features()
        .enumerate()
        .map(|(i, row)| {
            let (mut sp, mut sn) = (0.0, 0.0);
            for (v, label) in row.iter().zip(d.labels()) {
                match label {
                    Label::Positive => sp += v * v,
                    Label::Negative => sn += v * v,
                }
            }
            let s = centroid_pos[i] + centroid_neg[i];
            sp / n_pos + sn / n_neg - 0.5 * s * s
        })
        .sum()
}

/// Objectives for every `k` from a single full ranking.
pub fn sparsity_path_l2(d: &Dataset) -> SparsityPath {
    let art = L2TrainArtifacts::fit(d);
    let base = l2_cost_constant(d, &art.centroid_pos, &art.centroid_neg);
    let mut objectives = Vec::with_capacity(art.n_features() + 1);
    let mut gain = 0.0;
    objectives.push(base);
    for &i in art.ranking.order() {
        gain += art.delta[i] * art.delta[i];
        objectives.push(base - 0.5 * gain);
    }
    SparsityPath {
        kind: ModelKind::L2,
        ranking: art.ranking,
        objectives,
    }
}

/// `(1/n_pos) sum_{pos} ||x - theta_pos||^2 + (1/n_neg) sum_{neg} ||x - theta_neg||^2`.
pub fn objective_l2(d: &Dataset, theta_pos: &[f64], theta_neg: &[f64]) -> Result<f64> {
    check_centers(d, theta_pos, theta_neg)?;
    let (n_pos, n_neg) = (d.n_positive() as f64, d.n_negative() as f64);
    let (mut sp, mut sn) = (0.0, 0.0);
    for (i, row) in d.features().enumerate() {
        for (v, label) in row.iter().zip(d.labels()) {
            match label {
                Label::Positive => sp += (v - theta_pos[i]) * (v - theta_pos[i]),
                Label::Negative => sn += (v - theta_neg[i]) * (v - theta_neg[i]),
            }
        }
    }
    Ok(sp / n_pos + sn / n_neg)
}

pub(crate) fn check_centers(d: &Dataset, theta_pos: &[f64], theta_neg: &[f64]) -> Result<()> {
    for t in [theta_pos, theta_neg] {
        if t.len() != d.n_features() {
            return Err(Error::DimensionMismatch {
                expected: d.n_features(),
                found: t.len(),
            });
        }
        if t.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("centers must be finite".into()));
        }
    }
    Ok(())
}

pub(crate) fn check_index_set(set: &[usize], m: usize) -> Result<()> {
    let mut seen = vec![false; m];
    for &i in set {
        if i >= m {
            return Err(Error::InvalidArgument(format!(
                "feature index {i} out of range for {m} features"
            )));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidArgument(format!("feature index {i} repeated")));
        }
    }
    Ok(())
}

/// Optimal l2 objective when exactly the features in `set` may differ,
/// `cost' - 1/2 * ||delta_set||^2`.
pub fn closed_form_optimum_l2(d: &Dataset, set: &[usize]) -> Result<f64> {
    check_index_set(set, d.n_features())?;
    let c = class_centroids(d);
    let base = l2_cost_constant(d, &c.center_pos, &c.center_neg);
    let gain: f64 = set
        .iter()
        .map(|&i| {
            let delta = c.center_pos[i] - c.center_neg[i];
            delta * delta
        })
        .sum();
    Ok(base - 0.5 * gain)
}

/// Streaming trainer keeping only the two running centroids.
///
/// `observe` costs `O(m)`; `snapshot` reruns the top-`k` selection.
#[derive(Debug, Clone, Default)]
pub struct OnlineL2Trainer {
    centroid_pos: Vec<f64>,
    centroid_neg: Vec<f64>,
    n_pos: u64,
    n_neg: u64,
    dim: Option<usize>,
}

impl OnlineL2Trainer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fixes the dimension up front instead of taking it from the first sample.
    pub fn with_dimension(m: usize) -> Self {
        OnlineL2Trainer {
            dim: Some(m),
            ..Self::default()
        }
    }

    pub fn counts(&self) -> (u64, u64) {
        (self.n_pos, self.n_neg)
    }

    pub fn observe(&mut self, sample: &[f64], label: Label) -> Result<()> {
        let m = *self.dim.get_or_insert(sample.len());
        if sample.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: sample.len(),
            });
        }
        if sample.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("sample is not finite".into()));
        }
        let (center, count) = match label {
            Label::Positive => (&mut self.centroid_pos, &mut self.n_pos),
            Label::Negative => (&mut self.centroid_neg, &mut self.n_neg),
        };
        if *count == 0 {
            center.clear();
            center.extend_from_slice(sample);
        } else {
            update_centroid_in_place(center, *count, sample);
        }
        *count += 1;
        Ok(())
    }

    pub fn snapshot(&self, k: usize) -> Result<CenterModel> {
        if self.n_pos == 0 {
            return Err(Error::EmptyClass(Label::Positive));
        }
        if self.n_neg == 0 {
            return Err(Error::EmptyClass(Label::Negative));
        }
        check_k(k, self.centroid_pos.len())?;
        train_from_centroids(&self.centroid_pos, &self.centroid_neg, k, None)
    }
}
