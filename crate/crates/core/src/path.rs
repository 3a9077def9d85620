use crate::model::ModelKind;
use crate::ranking::RankedScores;

/// Optimal training objective for every sparsity level `k = 0..=m`.
///
/// The selected set at level `k` is the first `k` entries of one shared
/// ranking, so the sets are nested.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsityPath {
    pub kind: ModelKind,
    pub ranking: RankedScores,
    /// `objectives[k]` is the optimum with at most `k` differing coordinates.
    pub objectives: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub k: usize,
    pub objective: f64,
    /// Feature that entered the selection at this `k` (none at `k = 0`).
    pub added: Option<usize>,
}

impl SparsityPath {
    pub fn n_features(&self) -> usize {
        self.ranking.order().len()
    }

    pub fn selected(&self, k: usize) -> Vec<usize> {
        self.ranking.selected(k)
    }

    pub fn records(&self) -> impl Iterator<Item = PathRecord> + '_ {
        self.objectives.iter().enumerate().map(|(k, &objective)| PathRecord {
            k,
            objective,
            added: k.checked_sub(1).map(|r| self.ranking.order()[r]),
        })
    }
}
