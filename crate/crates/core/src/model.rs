//! Trained center classifiers and their JSON model file.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::dataset::{FeatureScale, Label};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Distance used by a center classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    L1,
    L2,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::L1 => "l1",
            ModelKind::L2 => "l2",
        })
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(ModelKind::L1),
            "l2" => Ok(ModelKind::L2),
            other => Err(Error::InvalidArgument(format!(
                "unknown model kind {other:?} (expected l1 or l2)"
            ))),
        }
    }
}

/// Outcome of [`CenterModel::decide`], keeping exact ties distinct.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Positive,
    Negative,
    Tie,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    pub delta: f64,
}

/// A (possibly sparse) two-class center classifier.
///
/// The centers agree exactly on every feature outside `selected`, so only
/// selected features influence the decision. When `scale` is present the
/// centers live in scaled coordinates and raw inputs are divided by
/// `scale.sigma()` before evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterModel {
    kind: ModelKind,
    k: usize,
    selected: Vec<usize>,
    theta_pos: Vec<f64>,
    theta_neg: Vec<f64>,
    scale: Option<FeatureScale>,
    feature_names: Option<Vec<String>>,
    // ||theta_neg||^2 - ||theta_pos||^2, summed over `selected`
    l2_offset: f64,
}

impl CenterModel {
    pub fn new(
        kind: ModelKind,
        k: usize,
        selected: Vec<usize>,
        theta_pos: Vec<f64>,
        theta_neg: Vec<f64>,
    ) -> Result<Self> {
        let m = theta_pos.len();
        if theta_neg.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: theta_neg.len(),
            });
        }
        if k > m {
            return Err(Error::KOutOfRange { k, m });
        }
        if selected.len() > k {
            return Err(Error::InvalidModel(format!(
                "{} selected features exceed k = {k}",
                selected.len()
            )));
        }
        if selected.windows(2).any(|w| w[0] >= w[1]) || selected.last().is_some_and(|&i| i >= m) {
            return Err(Error::InvalidModel(
                "selected features must be strictly increasing indices below m".into(),
            ));
        }
        if theta_pos.iter().chain(&theta_neg).any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("centers must be finite".into()));
        }
        let mut sel = selected.iter().peekable();
        for i in 0..m {
            if sel.peek() == Some(&&i) {
                sel.next();
            } else if theta_pos[i] != theta_neg[i] {
                return Err(Error::InvalidModel(format!("centers differ at unselected feature {i}")));
            }
        }
        let l2_offset = selected
            .iter()
            .map(|&i| theta_neg[i] * theta_neg[i] - theta_pos[i] * theta_pos[i])
            .sum();
        Ok(CenterModel {
            kind,
            k,
            selected,
            theta_pos,
            theta_neg,
            scale: None,
            feature_names: None,
            l2_offset,
        })
    }

    pub fn with_scale(mut self, scale: FeatureScale) -> Result<Self> {
        if scale.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: scale.len(),
            });
        }
        self.scale = Some(scale);
        Ok(self)
    }

    pub fn with_feature_names(mut self, names: Option<Vec<String>>) -> Result<Self> {
        if let Some(n) = &names {
            if n.len() != self.n_features() {
                return Err(Error::DimensionMismatch {
                    expected: self.n_features(),
                    found: n.len(),
                });
            }
        }
        self.feature_names = names;
        Ok(self)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_features(&self) -> usize {
        self.theta_pos.len()
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn theta_pos(&self) -> &[f64] {
        &self.theta_pos
    }

    pub fn theta_neg(&self) -> &[f64] {
        &self.theta_neg
    }

    pub fn scale(&self) -> Option<&FeatureScale> {
        self.scale.as_ref()
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn selected_names(&self) -> Vec<String> {
        self.selected
            .iter()
            .map(|&i| match &self.feature_names {
                Some(names) => names[i].clone(),
                None => format!("x{i}"),
            })
            .collect()
    }

    /// `||x - theta_neg||^2 - ||x - theta_pos||^2` (l2) or
    /// `||x - theta_neg||_1 - ||x - theta_pos||_1` (l1).
    ///
    /// Positive values favor the positive class. Only selected coordinates
    /// are visited; the l2 case uses the linear form
    /// `offset + 2 x^T (theta_pos - theta_neg)`.
    pub fn discriminant(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: x.len(),
            });
        }
        let coord = |i: usize| match &self.scale {
            Some(s) => x[i] / s.sigma()[i],
            None => x[i],
        };
        Ok(match self.kind {
            ModelKind::L2 => {
                let linear: f64 = self
                    .selected
                    .iter()
                    .map(|&i| coord(i) * (self.theta_pos[i] - self.theta_neg[i]))
                    .sum();
                self.l2_offset + 2.0 * linear
            }
            ModelKind::L1 => self
                .selected
                .iter()
                .map(|&i| {
                    let v = coord(i);
                    (v - self.theta_neg[i]).abs() - (v - self.theta_pos[i]).abs()
                })
                .sum(),
        })
    }

    /// Label by the sign of the discriminant; an exact tie goes to the positive class.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let delta = self.discriminant(x)?;
        let label = if delta >= 0.0 { Label::Positive } else { Label::Negative };
        Ok(Prediction { label, delta })
    }

    /// Like [`predict`](Self::predict) but reports `Tie` when the discriminant is zero.
    pub fn decide(&self, x: &[f64]) -> Result<Decision> {
        let delta = self.discriminant(x)?;
        Ok(if delta > 0.0 {
            Decision::Positive
        } else if delta < 0.0 {
            Decision::Negative
        } else {
            Decision::Tie
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFileOut {
            format_version: MODEL_FORMAT_VERSION,
            kind: self.kind,
            k: self.k,
            selected: &self.selected,
            theta_pos: reals(&self.theta_pos)?,
            theta_neg: reals(&self.theta_neg)?,
            scale: self.scale.as_ref().map(|s| reals(s.sigma())).transpose()?,
            feature_names: self.feature_names.as_deref(),
        };
        let mut s = serde_json::to_string_pretty(&file)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ModelFileIn = serde_json::from_str(s)?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidModel(format!(
                "unsupported format_version {}",
                file.format_version
            )));
        }
        let mut model = CenterModel::new(file.kind, file.k, file.selected, file.theta_pos, file.theta_neg)?;
        if let Some(sigma) = file.scale {
            model = model.with_scale(FeatureScale::new(sigma)?)?;
        }
        model.with_feature_names(file.feature_names)
    }
}

/// Formats a real with 17 significant digits, enough to round-trip any f64.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn reals(values: &[f64]) -> Result<Vec<Box<RawValue>>> {
    values
        .iter()
        .map(|&v| RawValue::from_string(format_real(v)).map_err(Error::from))
        .collect()
}

#[derive(Serialize)]
struct ModelFileOut<'a> {
    format_version: u32,
    kind: ModelKind,
    k: usize,
    selected: &'a [usize],
    theta_pos: Vec<Box<RawValue>>,
    theta_neg: Vec<Box<RawValue>>,
    scale: Option<Vec<Box<RawValue>>>,
    feature_names: Option<&'a [String]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFileIn {
    format_version: u32,
    kind: ModelKind,
    k: usize,
    selected: Vec<usize>,
    theta_pos: Vec<f64>,
    theta_neg: Vec<f64>,
    scale: Option<Vec<f64>>,
    feature_names: Option<Vec<String>>,
}
