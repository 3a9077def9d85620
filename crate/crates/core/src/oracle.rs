//! Brute-force reference for the sparse trainers.
//!
//! Enumerates every feature set of size `k`, builds that set's optimal centers
//! with deliberately naive routines (plain sums, sorted-copy medians, and a
//! candidate scan for the pooled weighted center), evaluates the full
//! objective numerically, and keeps the minimum. Nothing here calls into the
//! fast trainers or the shared statistics code.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::model::{CenterModel, ModelKind};

/// Largest feature count the oracle will enumerate.
pub const MAX_ORACLE_FEATURES: usize = 16;

/// Relative tolerance used to compare objectives.
pub const ORACLE_RTOL: f64 = 1e-9;

/// `|a - b| <= rtol * max(1, |a|, |b|)`.
pub fn objectives_agree(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best_objective: f64,
    /// Every set whose objective agrees with the best within [`ORACLE_RTOL`].
    pub best_sets: Vec<Vec<usize>>,
    pub per_set_objectives: BTreeMap<Vec<usize>, f64>,
}

/// Optimal centers for a fixed set of differing features.
#[derive(Debug, Clone, PartialEq)]
pub struct SetOptimum {
    pub theta_pos: Vec<f64>,
    pub theta_neg: Vec<f64>,
    pub objective: f64,
}

pub fn brute_force(d: &Dataset, k: usize, kind: ModelKind) -> Result<OracleResult> {
    let m = d.n_features();
    if m > MAX_ORACLE_FEATURES {
        return Err(Error::EnumerationLimit {
            m,
            limit: MAX_ORACLE_FEATURES,
        });
    }
    if k > m {
        return Err(Error::KOutOfRange { k, m });
    }
    let mut per_set_objectives = BTreeMap::new();
    for set in (0..m).combinations(k) {
        let opt = set_optimum(d, &set, kind);
        per_set_objectives.insert(set, opt.objective);
    }
    let best_objective = per_set_objectives.values().copied().fold(f64::INFINITY, f64::min);
    let best_sets = per_set_objectives
        .iter()
        .filter(|(_, &v)| objectives_agree(v, best_objective, ORACLE_RTOL))
        .map(|(s, _)| s.clone())
        .collect();
    Ok(OracleResult {
        best_objective,
        best_sets,
        per_set_objectives,
    })
}

/// Closed-form optimum for one set: class centers on `set`, the shared
/// (midpoint or pooled weighted median) center elsewhere.
pub fn set_optimum(d: &Dataset, set: &[usize], kind: ModelKind) -> SetOptimum {
    let m = d.n_features();
    let mut theta_pos = Vec::with_capacity(m);
    let mut theta_neg = Vec::with_capacity(m);
    for i in 0..m {
        let (pos, neg) = split_by_class(d, i);
        if set.contains(&i) {
            let (a, b) = match kind {
                ModelKind::L2 => (mean(&pos), mean(&neg)),
                ModelKind::L1 => (median(&pos), median(&neg)),
            };
            theta_pos.push(a);
            theta_neg.push(b);
        } else {
            let shared = match kind {
                ModelKind::L2 => 0.5 * (mean(&pos) + mean(&neg)),
                ModelKind::L1 => pooled_l1_center(&pos, &neg),
            };
            theta_pos.push(shared);
            theta_neg.push(shared);
        }
    }
    let objective = objective(d, &theta_pos, &theta_neg, kind);
    SetOptimum {
        theta_pos,
        theta_neg,
        objective,
    }
}

/// Numerically evaluated training objective.
pub fn objective(d: &Dataset, theta_pos: &[f64], theta_neg: &[f64], kind: ModelKind) -> f64 {
    let loss = |v: f64| match kind {
        ModelKind::L2 => v * v,
        ModelKind::L1 => v.abs(),
    };
    let mut total = 0.0;
    for j in 0..d.n_samples() {
        let x = d.sample(j);
        let (theta, n) = match d.labels()[j] {
            Label::Positive => (theta_pos, d.n_positive()),
            Label::Negative => (theta_neg, d.n_negative()),
        };
        let dist: f64 = x.iter().zip(theta).map(|(a, b)| loss(a - b)).sum();
        total += dist / n as f64;
    }
    total
}

/// Compares a trained model against the oracle at the same `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub model_objective: f64,
    pub oracle_objective: f64,
    pub objective_matches: bool,
    pub set_is_optimal: bool,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.objective_matches && self.set_is_optimal
    }
}

pub fn verify_model(d: &Dataset, model: &CenterModel) -> Result<Verdict> {
    let oracle = brute_force(d, model.k(), model.kind())?;
    let model_objective = objective(d, model.theta_pos(), model.theta_neg(), model.kind());
    let objective_matches = objectives_agree(model_objective, oracle.best_objective, ORACLE_RTOL);
    let set_is_optimal = oracle.best_sets.iter().any(|s| s.as_slice() == model.selected());
    Ok(Verdict {
        model_objective,
        oracle_objective: oracle.best_objective,
        objective_matches,
        set_is_optimal,
    })
}

fn split_by_class(d: &Dataset, i: usize) -> (Vec<f64>, Vec<f64>) {
    let row = d.feature(i);
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (j, &v) in row.iter().enumerate() {
        match d.labels()[j] {
            Label::Positive => pos.push(v),
            Label::Negative => neg.push(v),
        }
    }
    (pos, neg)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let p = s.len();
    if p % 2 == 1 {
        s[p / 2]
    } else {
        0.5 * (s[p / 2 - 1] + s[p / 2])
    }
}

/// Minimizes `(1/n_pos) sum |pos - t| + (1/n_neg) sum |neg - t|` over the data
/// values, where a piecewise-linear convex function attains its minimum.
fn pooled_l1_center(pos: &[f64], neg: &[f64]) -> f64 {
    let cost = |t: f64| {
        pos.iter().map(|v| (v - t).abs()).sum::<f64>() / pos.len() as f64
            + neg.iter().map(|v| (v - t).abs()).sum::<f64>() / neg.len() as f64
    };
    pos.iter()
        .chain(neg)
        .copied()
        .map(|t| (cost(t), t))
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.partial_cmp(&b.1).unwrap()))
        .map(|(_, t)| t)
        .expect("both classes are nonempty")
}
