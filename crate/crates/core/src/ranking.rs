//! Deterministic feature orderings.
//!
//! Both trainers rank features by a per-feature score and keep a prefix of the
//! ranking. Ties are always broken by ascending feature index, so the order is
//! a total order and every prefix is reproducible.

use std::cmp::Ordering;

/// Direction in which scores are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankOrder {
    /// Largest `|score|` first (l2: `|delta|`).
    DescendingAbs,
    /// Smallest score first (l1: most negative `e` first).
    Ascending,
}

impl RankOrder {
    fn compare(self, scores: &[f64], a: usize, b: usize) -> Ordering {
        let by_score = match self {
            RankOrder::DescendingAbs => scores[b].abs().total_cmp(&scores[a].abs()),
            RankOrder::Ascending => scores[a].total_cmp(&scores[b]),
        };
        by_score.then(a.cmp(&b))
    }
}

/// Per-feature scores and the full total order they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedScores {
    scores: Vec<f64>,
    order: Vec<usize>,
    direction: RankOrder,
}

impl RankedScores {
    /// Sorts all features once, `O(m log m)`.
    pub fn new(scores: Vec<f64>, direction: RankOrder) -> Self {
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_unstable_by(|&a, &b| direction.compare(&scores, a, b));
        RankedScores {
            scores,
            order,
            direction,
        }
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Feature indices, best first.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn direction(&self) -> RankOrder {
        self.direction
    }

    /// The first `k` ranked features, sorted by index.
    pub fn selected(&self, k: usize) -> Vec<usize> {
        let mut s = self.order[..k].to_vec();
        s.sort_unstable();
        s
    }
}

/// Indices of the `k` best-ranked scores, sorted by feature index.
///
/// Uses selection followed by a sort of the kept prefix, `O(m + k log k)`.
/// Returns exactly the first `k` entries of [`RankedScores::new`]'s order.
pub fn top_k(scores: &[f64], k: usize, direction: RankOrder) -> Vec<usize> {
    let m = scores.len();
    assert!(k <= m, "top_k: k = {k} exceeds {m}");
    let mut idx: Vec<usize> = (0..m).collect();
    if k == 0 {
        return Vec::new();
    }
    if k < m {
        idx.select_nth_unstable_by(k - 1, |&a, &b| direction.compare(scores, a, b));
        idx.truncate(k);
    }
    idx.sort_unstable();
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ties_break_by_index() {
        let r = RankedScores::new(vec![1.0, -3.0, 3.0, 0.0, -1.0], RankOrder::DescendingAbs);
        assert_eq!(r.order(), &[1, 2, 0, 4, 3]);
        let r = RankedScores::new(vec![-2.0, 0.0, -2.0, -5.0], RankOrder::Ascending);
        assert_eq!(r.order(), &[3, 0, 2, 1]);
        assert_eq!(r.selected(3), vec![0, 2, 3]);
    }

    #[test]
    fn top_k_edges() {
        let s = [0.5, -4.0, 2.0];
        assert!(top_k(&s, 0, RankOrder::DescendingAbs).is_empty());
        assert_eq!(top_k(&s, 3, RankOrder::DescendingAbs), vec![0, 1, 2]);
        assert_eq!(top_k(&s, 1, RankOrder::DescendingAbs), vec![1]);
        assert_eq!(top_k(&s, 1, RankOrder::Ascending), vec![1]);
    }

    proptest! {
        #[test]
        fn top_k_matches_full_sort(
            scores in prop::collection::vec((-4i32..4).prop_map(f64::from), 0..30),
            k_frac in 0.0f64..=1.0,
            asc in any::<bool>(),
        ) {
            let dir = if asc { RankOrder::Ascending } else { RankOrder::DescendingAbs };
            let k = ((scores.len() as f64) * k_frac).floor() as usize;
            let ranked = RankedScores::new(scores.clone(), dir);
            prop_assert_eq!(top_k(&scores, k, dir), ranked.selected(k));
        }
    }
}
