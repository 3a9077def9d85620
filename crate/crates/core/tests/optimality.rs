//! Fast trainers against brute-force enumeration, plus the identities the
//! closed forms rest on.

use itertools::Itertools;
use proptest::prelude::*;
use sparse_center::l1::L1TrainArtifacts;
use sparse_center::oracle::{self, objectives_agree};
use sparse_center::{
    brute_force, class_centroids, closed_form_optimum_l2, objective_l1, objective_l2, sparsity_path_l1,
    sparsity_path_l2, standardize, train_l1, train_l2, Dataset, Label, ModelKind, ScaleMode,
};

const RTOL: f64 = 1e-9;

fn labels_from_mask(mask: &[bool]) -> Vec<Label> {
    mask.iter()
        .map(|&b| if b { Label::Positive } else { Label::Negative })
        .collect()
}

/// Random dataset with `m` features and `n` samples; values either continuous
/// or drawn from a coarse grid so that ties and duplicates occur.
fn arb_dataset(
    m_range: std::ops::RangeInclusive<usize>,
    n_range: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = Dataset> {
    (m_range, n_range, any::<bool>()).prop_flat_map(|(m, n, coarse)| {
        let value = if coarse {
            (-3i32..=3).prop_map(f64::from).boxed()
        } else {
            (-4.0f64..4.0).boxed()
        };
        (
            prop::collection::vec(value, m * n),
            prop::collection::vec(any::<bool>(), n - 2),
        )
            .prop_map(move |(values, mask)| {
                let mut labels = vec![Label::Positive, Label::Negative];
                labels.extend(labels_from_mask(&mask));
                Dataset::from_feature_major(values, m, labels).unwrap()
            })
    })
}

fn nonzero(v: &[f64]) -> usize {
    v.iter().filter(|x| **x != 0.0).count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn l2_matches_brute_force(d in arb_dataset(2..=8, 4..=16)) {
        for k in 0..=d.n_features() {
            let model = train_l2(&d, k).unwrap();
            let got = objective_l2(&d, model.theta_pos(), model.theta_neg()).unwrap();
            let oracle = brute_force(&d, k, ModelKind::L2).unwrap();
            prop_assert!(objectives_agree(got, oracle.best_objective, RTOL), "k={k}: {got} vs {}", oracle.best_objective);
            prop_assert!(oracle.best_sets.iter().any(|s| s.as_slice() == model.selected()));
        }
    }

    #[test]
    fn l1_matches_brute_force(d in arb_dataset(2..=7, 4..=14)) {
        for k in 0..=d.n_features() {
            let model = train_l1(&d, k).unwrap();
            let got = objective_l1(&d, model.theta_pos(), model.theta_neg()).unwrap();
            let oracle = brute_force(&d, k, ModelKind::L1).unwrap();
            prop_assert!(objectives_agree(got, oracle.best_objective, RTOL), "k={k}: {got} vs {}", oracle.best_objective);
            prop_assert!(oracle.best_sets.iter().any(|s| s.as_slice() == model.selected()));
        }
    }

    #[test]
    fn cardinality_bound(d in arb_dataset(1..=10, 2..=12)) {
        for k in 0..=d.n_features() {
            for model in [train_l2(&d, k).unwrap(), train_l1(&d, k).unwrap()] {
                let diff: Vec<f64> = model.theta_pos().iter().zip(model.theta_neg()).map(|(a, b)| a - b).collect();
                prop_assert!(nonzero(&diff) <= k);
            }
            let c = class_centroids(&d);
            let delta: Vec<f64> = c.center_pos.iter().zip(&c.center_neg).map(|(a, b)| a - b).collect();
            if nonzero(&delta) >= k {
                let m = train_l2(&d, k).unwrap();
                let diff: Vec<f64> = m.theta_pos().iter().zip(m.theta_neg()).map(|(a, b)| a - b).collect();
                prop_assert_eq!(nonzero(&diff), k);
            }
        }
    }

    #[test]
    fn closed_form_matches_objective_for_every_set(d in arb_dataset(1..=6, 2..=12)) {
        let m = d.n_features();
        for k in 0..=m {
            for set in (0..m).combinations(k) {
                let opt = oracle::set_optimum(&d, &set, ModelKind::L2);
                let numeric = objective_l2(&d, &opt.theta_pos, &opt.theta_neg).unwrap();
                let closed = closed_form_optimum_l2(&d, &set).unwrap();
                prop_assert!(objectives_agree(numeric, closed, RTOL), "{set:?}: {numeric} vs {closed}");
            }
        }
    }

    #[test]
    fn l1_objective_decomposes(d in arb_dataset(1..=10, 2..=15)) {
        let art = L1TrainArtifacts::fit(&d).unwrap();
        for k in 0..=d.n_features() {
            let model = train_l1(&d, k).unwrap();
            let direct = objective_l1(&d, model.theta_pos(), model.theta_neg()).unwrap();
            let decomposed = art.decomposed_objective(model.selected());
            prop_assert!((direct - decomposed).abs() <= 1e-10 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn paths_are_nested_and_monotone(d in arb_dataset(1..=12, 2..=12)) {
        let m = d.n_features();
        let p2 = sparsity_path_l2(&d);
        let p1 = sparsity_path_l1(&d).unwrap();
        for p in [&p2, &p1] {
            prop_assert_eq!(p.objectives.len(), m + 1);
            for k in 0..m {
                let a = p.selected(k);
                let b = p.selected(k + 1);
                prop_assert!(a.iter().all(|i| b.contains(i)));
                prop_assert!(p.objectives[k + 1] <= p.objectives[k] + 1e-12);
            }
        }
        for k in 0..=m {
            let m2 = train_l2(&d, k).unwrap();
            prop_assert_eq!(p2.selected(k), m2.selected().to_vec());
            let o2 = objective_l2(&d, m2.theta_pos(), m2.theta_neg()).unwrap();
            prop_assert!(objectives_agree(o2, p2.objectives[k], RTOL));
            let m1 = train_l1(&d, k).unwrap();
            prop_assert_eq!(p1.selected(k), m1.selected().to_vec());
            let o1 = objective_l1(&d, m1.theta_pos(), m1.theta_neg()).unwrap();
            prop_assert!(objectives_agree(o1, p1.objectives[k], RTOL));
        }
    }

    #[test]
    fn gain_never_positive(d in arb_dataset(1..=12, 2..=20)) {
        let t = sparse_center::dispersion_triple(&d);
        prop_assert!(t.e.iter().all(|&e| e <= 1e-9));
    }

    #[test]
    fn sample_order_is_irrelevant(d in arb_dataset(1..=6, 2..=10), seed in any::<u64>()) {
        let mut order: Vec<usize> = (0..d.n_samples()).collect();
        sparse_center::eval::shuffle(&mut order, &mut sparse_center::eval::seeded_rng(seed, 0));
        let p = d.select_samples(&order).unwrap();
        for k in 0..=d.n_features() {
            let (a, b) = (train_l2(&d, k).unwrap(), train_l2(&p, k).unwrap());
            prop_assert_eq!(a.selected(), b.selected());
            for (x, y) in a.theta_pos().iter().zip(b.theta_pos()) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
            prop_assert_eq!(train_l1(&d, k).unwrap(), train_l1(&p, k).unwrap());
        }
    }

    #[test]
    fn feature_permutation_permutes_selection(d in arb_dataset(2..=8, 2..=10), seed in any::<u64>()) {
        // distinct continuous scores avoid index tie-breaks
        let m = d.n_features();
        let mut perm: Vec<usize> = (0..m).collect();
        sparse_center::eval::shuffle(&mut perm, &mut sparse_center::eval::seeded_rng(seed, 0));
        let rows: Vec<Vec<f64>> = perm.iter().map(|&i| d.feature(i).to_vec()).collect();
        let q = Dataset::from_feature_rows(&rows, d.labels().to_vec()).unwrap();
        let delta: Vec<f64> = {
            let c = class_centroids(&d);
            c.center_pos.iter().zip(&c.center_neg).map(|(a, b)| (a - b).abs()).collect()
        };
        let distinct = delta.iter().tuple_combinations().all(|(a, b)| a != b);
        prop_assume!(distinct);
        for k in 0..=m {
            let mut mapped: Vec<usize> = train_l2(&q, k).unwrap().selected().iter().map(|&r| perm[r]).collect();
            mapped.sort_unstable();
            prop_assert_eq!(mapped, train_l2(&d, k).unwrap().selected().to_vec());
        }
    }
}

#[test]
fn duplicate_negatives_leave_pooled_statistics_unchanged() {
    let d = sparse_center::synthetic::integer_grid(6, 11, 5, 4);
    let neg: Vec<usize> = d.partition().negative;
    let mut idx: Vec<usize> = (0..d.n_samples()).collect();
    idx.extend(&neg);
    let doubled = d.select_samples(&idx).unwrap();
    let a = L1TrainArtifacts::fit(&d).unwrap();
    let b = L1TrainArtifacts::fit(&doubled).unwrap();
    assert_eq!(a.pooled_median, b.pooled_median);
    for i in 0..6 {
        assert!((a.dispersions.d_all[i] - b.dispersions.d_all[i]).abs() <= 1e-12);
    }
}

#[test]
fn medians_resist_an_outlier() {
    let d = sparse_center::synthetic::gaussian(4, 15, 8);
    let before = sparse_center::class_medians(&d);
    let mut rows: Vec<Vec<f64>> = d.features().map(<[f64]>::to_vec).collect();
    let j = d.partition().positive[0];
    rows[2][j] = 1e12;
    let e = Dataset::from_feature_rows(&rows, d.labels().to_vec()).unwrap();
    let after = sparse_center::class_medians(&e);
    for i in [0, 1, 3] {
        assert_eq!(before.center_pos[i], after.center_pos[i]);
        assert_eq!(before.center_neg[i], after.center_neg[i]);
    }
    assert_eq!(before.center_neg[2], after.center_neg[2]);
    let rest: Vec<f64> = d
        .partition()
        .positive
        .iter()
        .filter(|&&p| p != j)
        .map(|&p| d.feature(2)[p])
        .collect();
    let lo = rest.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rest.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!(after.center_pos[2] >= lo && after.center_pos[2] <= hi);
}

/// Golden-section minimization of a convex function on `[lo, hi]`.
fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - r * (hi - lo);
        let b = lo + r * (hi - lo);
        if f(a) <= f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    f(0.5 * (lo + hi))
}

/// Per-coordinate numeric minimization confirms the closed-form per-set optimum.
#[test]
fn closed_form_set_optimum_matches_numeric_search() {
    for seed in 0..6 {
        let d = if seed % 2 == 0 {
            sparse_center::synthetic::gaussian(4, 9, seed)
        } else {
            sparse_center::synthetic::integer_grid(4, 10, 4, seed)
        };
        let part = d.partition();
        let (np, nn) = (d.n_positive() as f64, d.n_negative() as f64);
        for kind in [ModelKind::L1, ModelKind::L2] {
            let loss = |v: f64| match kind {
                ModelKind::L1 => v.abs(),
                ModelKind::L2 => v * v,
            };
            for set in [vec![], vec![1], vec![0, 3], vec![0, 1, 2, 3]] {
                let opt = oracle::set_optimum(&d, &set, kind);
                let mut numeric = 0.0;
                for i in 0..4 {
                    let row = d.feature(i);
                    let lo = row.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
                    let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0;
                    let class_cost =
                        |idx: &[usize], n: f64, t: f64| idx.iter().map(|&j| loss(row[j] - t)).sum::<f64>() / n;
                    numeric += if set.contains(&i) {
                        golden_min(|t| class_cost(&part.positive, np, t), lo, hi)
                            + golden_min(|t| class_cost(&part.negative, nn, t), lo, hi)
                    } else {
                        golden_min(
                            |t| class_cost(&part.positive, np, t) + class_cost(&part.negative, nn, t),
                            lo,
                            hi,
                        )
                    };
                }
                assert!(
                    (opt.objective - numeric).abs() <= 1e-7 * numeric.max(1.0),
                    "{kind} {set:?}: closed {} vs numeric {numeric}",
                    opt.objective
                );
                assert!(opt.objective <= numeric + 1e-12 * numeric.max(1.0));
            }
        }
    }
}

#[test]
fn scaled_training_equals_training_on_transformed_data() {
    let d = sparse_center::synthetic::gaussian(7, 30, 21);
    let rows: Vec<Vec<f64>> = d
        .features()
        .map(|r| r.iter().map(|v| v * 3.0 + 1.0).collect())
        .collect();
    let d = Dataset::from_feature_rows(&rows, d.labels().to_vec()).unwrap();
    let (scaled, scale) = standardize(&d, ScaleMode::Sd).unwrap();
    let manual_rows: Vec<Vec<f64>> = d
        .features()
        .map(|row| {
            let mean = row.iter().sum::<f64>() / row.len() as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (row.len() - 1) as f64;
            row.iter().map(|v| v / var.sqrt()).collect()
        })
        .collect();
    let manual = Dataset::from_feature_rows(&manual_rows, d.labels().to_vec()).unwrap();
    for k in 0..=7 {
        let a = train_l2(&scaled, k).unwrap();
        let b = train_l2(&manual, k).unwrap();
        assert_eq!(a.selected(), b.selected());
        for (x, y) in a.theta_pos().iter().zip(b.theta_pos()) {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }
    let back = scale.unscale(&scaled).unwrap();
    for i in 0..7 {
        for (x, y) in back.feature(i).iter().zip(d.feature(i)) {
            assert!((x - y).abs() <= 1e-12 * y.abs());
        }
    }
}
