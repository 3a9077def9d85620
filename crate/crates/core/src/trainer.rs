//! Kind-agnostic entry points over the l1 and l2 trainers.

use crate::dataset::{standardize_with_ddof, Dataset, FeatureScale, ScaleMode};
use crate::error::Result;
use crate::l1::{objective_l1, sparsity_path_l1, train_l1, L1TrainArtifacts};
use crate::l2::{objective_l2, sparsity_path_l2, train_l2, L2TrainArtifacts};
use crate::model::{CenterModel, ModelKind};
use crate::path::SparsityPath;

pub fn train(d: &Dataset, kind: ModelKind, k: usize) -> Result<CenterModel> {
    match kind {
        ModelKind::L1 => train_l1(d, k),
        ModelKind::L2 => train_l2(d, k),
    }
}

pub fn sparsity_path(d: &Dataset, kind: ModelKind) -> Result<SparsityPath> {
    match kind {
        ModelKind::L1 => sparsity_path_l1(d),
        ModelKind::L2 => Ok(sparsity_path_l2(d)),
    }
}

pub fn objective(d: &Dataset, kind: ModelKind, theta_pos: &[f64], theta_neg: &[f64]) -> Result<f64> {
    match kind {
        ModelKind::L1 => objective_l1(d, theta_pos, theta_neg),
        ModelKind::L2 => objective_l2(d, theta_pos, theta_neg),
    }
}

/// Training statistics from which the optimal model for every `k` follows in `O(m)`.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainArtifacts {
    L1(L1TrainArtifacts),
    L2(L2TrainArtifacts),
}

impl TrainArtifacts {
    pub fn fit(d: &Dataset, kind: ModelKind) -> Result<Self> {
        Ok(match kind {
            ModelKind::L1 => TrainArtifacts::L1(L1TrainArtifacts::fit(d)?),
            ModelKind::L2 => TrainArtifacts::L2(L2TrainArtifacts::fit(d)),
        })
    }

    pub fn model(&self, k: usize) -> Result<CenterModel> {
        match self {
            TrainArtifacts::L1(a) => a.model(k),
            TrainArtifacts::L2(a) => a.model(k),
        }
    }
}

/// Training options shared by the CLI and the evaluation harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainOptions {
    pub kind: ModelKind,
    pub scale: ScaleMode,
    /// Delta degrees of freedom for `sd`/`variance` scaling.
    pub ddof: usize,
}

impl TrainOptions {
    pub fn new(kind: ModelKind) -> Self {
        TrainOptions {
            kind,
            scale: ScaleMode::None,
            ddof: 1,
        }
    }

    pub fn with_scale(mut self, scale: ScaleMode) -> Self {
        self.scale = scale;
        self
    }
}

/// Artifacts fitted on (optionally) rescaled data, plus the scale to attach to models.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledArtifacts {
    pub artifacts: TrainArtifacts,
    pub scale: Option<FeatureScale>,
    /// The dataset the artifacts were fitted on (after scaling).
    pub training_data: Dataset,
}

impl ScaledArtifacts {
    pub fn fit(d: &Dataset, opts: TrainOptions) -> Result<Self> {
        let (training_data, scale) = match opts.scale {
            ScaleMode::None => (d.clone(), None),
            mode => {
                let (scaled, scale) = standardize_with_ddof(d, mode, opts.ddof)?;
                (scaled, Some(scale))
            }
        };
        let artifacts = TrainArtifacts::fit(&training_data, opts.kind)?;
        Ok(ScaledArtifacts {
            artifacts,
            scale,
            training_data,
        })
    }

    /// Optimal model at sparsity `k`; it accepts raw (unscaled) inputs.
    pub fn model(&self, k: usize) -> Result<CenterModel> {
        let model = self.artifacts.model(k)?;
        match &self.scale {
            Some(s) => model.with_scale(s.clone()),
            None => Ok(model),
        }
    }
}
