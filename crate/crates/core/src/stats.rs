//! Class centers and the weighted-median machinery behind the sparse l1 trainer.

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};

/// Relative tolerance used when testing `W(zeta) == W_total / 2`.
pub const HALF_WEIGHT_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterKind {
    Mean,
    Median,
}

/// Per-class centers of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassCenters {
    pub center_pos: Vec<f64>,
    pub center_neg: Vec<f64>,
    pub kind: CenterKind,
}

/// Minimizer of `sum_i w_i |z_i - theta|` together with the minimum value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedMedian {
    pub theta: f64,
    pub dispersion: f64,
}

/// Median dispersions per feature: within each class about the class median
/// (`d_pos`, `d_neg`), pooled about the class-balanced weighted median
/// (`d_all`), and the gain `e = d_pos + d_neg - d_all`.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionTriple {
    pub d_pos: Vec<f64>,
    pub d_neg: Vec<f64>,
    pub d_all: Vec<f64>,
    pub e: Vec<f64>,
}

/// Weighted median of `z` under nonnegative weights `w`.
///
/// With `W(zeta)` the total weight of points `<= zeta`, the median is the
/// smallest support point reaching half the total weight; when it reaches
/// exactly half (up to [`HALF_WEIGHT_RTOL`]), the midpoint between it and the
/// next larger positive-weight point is returned instead. Zero-weight points
/// carry no mass and never act as the next point.
pub fn weighted_median(z: &[f64], w: &[f64]) -> Result<WeightedMedian> {
    if z.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: z.len(),
            found: w.len(),
        });
    }
    if z.is_empty() {
        return Err(Error::InvalidArgument("weighted median of an empty sequence".into()));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("weighted median input is not finite".into()));
    }
    if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
    }
    let mut support: Vec<(f64, f64)> = z
        .iter()
        .zip(w)
        .filter(|(_, &wi)| wi > 0.0)
        .map(|(&zi, &wi)| (zi, wi))
        .collect();
    if support.is_empty() {
        return Err(Error::InvalidArgument("all weights are zero".into()));
    }
    support.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let theta = median_of_sorted(&support);
    let dispersion = z.iter().zip(w).map(|(zi, wi)| wi * (zi - theta).abs()).sum();
    Ok(WeightedMedian { theta, dispersion })
}

/// Weighted median of `(value, weight)` pairs sorted by value, all weights positive.
fn median_of_sorted(sorted: &[(f64, f64)]) -> f64 {
    let total: f64 = sorted.iter().map(|p| p.1).sum();
    let half = total / 2.0;
    let tol = HALF_WEIGHT_RTOL * total;
    let mut cum = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let value = sorted[i].0;
        // equal values form one support point
        while i < sorted.len() && sorted[i].0 == value {
            cum += sorted[i].1;
            i += 1;
        }
        if cum >= half - tol {
            if cum <= half + tol && i < sorted.len() {
                return 0.5 * (value + sorted[i].0);
            }
            return value;
        }
    }
    // only reachable through round-off in `cum`
    sorted[sorted.len() - 1].0
}

/// Uniform-weight median of already sorted values.
fn median_of_sorted_uniform(sorted: &[f64]) -> f64 {
    let p = sorted.len();
    if p % 2 == 1 {
        sorted[p / 2]
    } else {
        let (lo, hi) = (sorted[p / 2 - 1], sorted[p / 2]);
        if lo == hi {
            lo
        } else {
            0.5 * (lo + hi)
        }
    }
}

/// Per-class arithmetic means, summed in ascending sample order.
pub fn class_centroids(d: &Dataset) -> ClassCenters {
    let (n_pos, n_neg) = (d.n_positive() as f64, d.n_negative() as f64);
    let mut center_pos = Vec::with_capacity(d.n_features());
    let mut center_neg = Vec::with_capacity(d.n_features());
    for row in d.features() {
        let (mut sp, mut sn) = (0.0, 0.0);
        for (v, label) in row.iter().zip(d.labels()) {
            match label {
                Label::Positive => sp += v,
                Label::Negative => sn += v,
            }
        }
        center_pos.push(sp / n_pos);
        center_neg.push(sn / n_neg);
    }
    ClassCenters {
        center_pos,
        center_neg,
        kind: CenterKind::Mean,
    }
}

/// Per-class medians (uniform weights, midpoint rule for even counts).
pub fn class_medians(d: &Dataset) -> ClassCenters {
    let summary = MedianSummary::compute(d);
    ClassCenters {
        center_pos: summary.median_pos,
        center_neg: summary.median_neg,
        kind: CenterKind::Median,
    }
}

/// Dispersion vectors and their gain `e`, without clamping.
pub fn dispersion_triple(d: &Dataset) -> DispersionTriple {
    MedianSummary::compute(d).dispersions
}

/// Everything the sparse l1 trainer needs, computed in one pass per feature.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct MedianSummary {
    pub median_pos: Vec<f64>,
    pub median_neg: Vec<f64>,
    pub pooled: Vec<f64>,
    pub dispersions: DispersionTriple,
}

impl MedianSummary {
    pub fn compute(d: &Dataset) -> Self {
        let m = d.n_features();
        let (n_pos, n_neg) = (d.n_positive(), d.n_negative());
        let (w_pos, w_neg) = (1.0 / n_pos as f64, 1.0 / n_neg as f64);
        let labels = d.labels();

        let mut out = MedianSummary {
            median_pos: Vec::with_capacity(m),
            median_neg: Vec::with_capacity(m),
            pooled: Vec::with_capacity(m),
            dispersions: DispersionTriple {
                d_pos: Vec::with_capacity(m),
                d_neg: Vec::with_capacity(m),
                d_all: Vec::with_capacity(m),
                e: Vec::with_capacity(m),
            },
        };
        let mut pos = Vec::with_capacity(n_pos);
        let mut neg = Vec::with_capacity(n_neg);
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(n_pos + n_neg);

        for row in d.features() {
            pos.clear();
            neg.clear();
            for (&v, label) in row.iter().zip(labels) {
                match label {
                    Label::Positive => pos.push(v),
                    Label::Negative => neg.push(v),
                }
            }
            pos.sort_unstable_by(f64::total_cmp);
            neg.sort_unstable_by(f64::total_cmp);
            let mu_pos = median_of_sorted_uniform(&pos);
            let mu_neg = median_of_sorted_uniform(&neg);

            // pooled support: merge the two sorted class lists
            merged.clear();
            let (mut a, mut b) = (0, 0);
            while a < pos.len() || b < neg.len() {
                if b == neg.len() || (a < pos.len() && pos[a] <= neg[b]) {
                    merged.push((pos[a], w_pos));
                    a += 1;
                } else {
                    merged.push((neg[b], w_neg));
                    b += 1;
                }
            }
            let mu = median_of_sorted(&merged);

            // sorted order keeps the sums independent of sample order
            let abs_dev = |xs: &[f64], c: f64| xs.iter().map(|v| (v - c).abs()).sum::<f64>();
            let (sp, sn) = (abs_dev(&pos, mu_pos), abs_dev(&neg, mu_neg));
            let sa = w_pos * abs_dev(&pos, mu) + w_neg * abs_dev(&neg, mu);
            let dp = sp / n_pos as f64;
            let dn = sn / n_neg as f64;
            out.median_pos.push(mu_pos);
            out.median_neg.push(mu_neg);
            out.pooled.push(mu);
            out.dispersions.d_pos.push(dp);
            out.dispersions.d_neg.push(dn);
            out.dispersions.d_all.push(sa);
            out.dispersions.e.push((dp + dn) - sa);
        }
        out
    }
}

/// One step of the running mean: `(count/(count+1)) * center + (1/(count+1)) * sample`.
/// With `count == 0` the result is `sample`.
pub fn recursive_centroid_update(center: &[f64], count: u64, new_sample: &[f64]) -> Vec<f64> {
    let mut out = center.to_vec();
    if count == 0 {
        out.clear();
        out.extend_from_slice(new_sample);
    } else {
        update_centroid_in_place(&mut out, count, new_sample);
    }
    out
}

pub(crate) fn update_centroid_in_place(center: &mut [f64], count: u64, sample: &[f64]) {
    let nu = count as f64;
    let keep = nu / (nu + 1.0);
    let add = 1.0 / (nu + 1.0);
    for (c, x) in center.iter_mut().zip(sample) {
        *c = keep * *c + add * x;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Label::{Negative as N, Positive as P};
    use proptest::prelude::*;

    /// Objective value of a candidate center.
    fn l1_cost(z: &[f64], w: &[f64], theta: f64) -> f64 {
        z.iter().zip(w).map(|(zi, wi)| wi * (zi - theta).abs()).sum()
    }

    /// The piecewise-linear objective is minimized at a data point or at a
    /// midpoint of consecutive distinct data points.
    fn scan_minimum(z: &[f64], w: &[f64]) -> f64 {
        let mut pts: Vec<f64> = z.to_vec();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut cands = pts.clone();
        cands.extend(pts.windows(2).map(|p| 0.5 * (p[0] + p[1])));
        cands.iter().map(|&t| l1_cost(z, w, t)).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn weighted_median_examples() {
        let r = weighted_median(&[3.0, 1.0, 2.0], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((r.theta, r.dispersion), (2.0, 2.0));
        let r = weighted_median(&[0.0, 10.0], &[1.0, 1.0]).unwrap();
        assert_eq!((r.theta, r.dispersion), (5.0, 10.0));
        let r = weighted_median(&[0.0, 10.0], &[3.0, 1.0]).unwrap();
        assert_eq!((r.theta, r.dispersion), (0.0, 10.0));

        let (z, w) = ([1.0, 2.0, 3.0, 4.0], [1.0, 1.0, 1.0, 10.0]);
        let r = weighted_median(&z, &w).unwrap();
        // scan: cost(3) = 2+1+0+10 = 13, cost(4) = 3+2+1 = 6, cost(3.5) = 2.5+1.5+0.5+5 = 9.5
        assert_eq!(scan_minimum(&z, &w), 6.0);
        assert_eq!(r.theta, 4.0);
        assert_eq!(r.dispersion, 6.0);
    }

    #[test]
    fn weighted_median_errors() {
        assert!(weighted_median(&[], &[]).is_err());
        assert!(weighted_median(&[1.0, 2.0], &[0.0, 0.0]).is_err());
        assert!(weighted_median(&[f64::NAN], &[1.0]).is_err());
        assert!(weighted_median(&[1.0], &[-1.0]).is_err());
        assert!(weighted_median(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn zero_weight_points_are_ignored() {
        // 5 has no mass, so the midpoint partner of 0 is 10
        let r = weighted_median(&[0.0, 5.0, 10.0], &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(r.theta, 5.0);
        let r = weighted_median(&[0.0, 3.0, 10.0], &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(r.theta, 5.0);
    }

    #[test]
    fn repeated_values_pool_their_weight() {
        // W(3) = 2 = total/2, next support point 7
        let r = weighted_median(&[3.0, 3.0, 7.0, 7.0], &[1.0; 4]).unwrap();
        assert_eq!(r.theta, 5.0);
        let r = weighted_median(&[3.0, 3.0, 3.0, 7.0], &[1.0; 4]).unwrap();
        assert_eq!(r.theta, 3.0);
    }

    #[test]
    fn half_weight_with_round_off() {
        // 0.1 + 0.2 != 0.3 in binary, but W(1) should count as half of the total
        let r = weighted_median(&[1.0, 1.0, 2.0], &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(r.theta, 1.5);
    }

    #[test]
    fn centroid_examples() {
        let d = Dataset::from_samples(
            &[vec![1.0, 0.0], vec![3.0, 0.0], vec![0.0, 2.0], vec![0.0, 4.0]],
            vec![P, P, N, N],
        )
        .unwrap();
        let c = class_centroids(&d);
        assert_eq!(c.center_pos, vec![2.0, 0.0]);
        assert_eq!(c.center_neg, vec![0.0, 3.0]);
        assert_eq!(c.kind, CenterKind::Mean);

        let d = Dataset::from_samples(&[vec![1.5, -2.0], vec![7.0, 0.25]], vec![P, N]).unwrap();
        let c = class_centroids(&d);
        assert_eq!(c.center_pos, vec![1.5, -2.0]);
        assert_eq!(c.center_neg, vec![7.0, 0.25]);

        let d = Dataset::from_samples(&vec![vec![0.3, 4.0]; 3], vec![P, N, N]).unwrap();
        let c = class_centroids(&d);
        assert_eq!(c.center_pos, c.center_neg);
    }

    #[test]
    fn median_examples() {
        let d = Dataset::from_feature_rows(
            &[vec![1.0, 2.0, 9.0, 0.0, 10.0], vec![9.0, 1.0, 2.0, 3.0, 3.0]],
            vec![P, P, P, N, N],
        )
        .unwrap();
        let c = class_medians(&d);
        assert_eq!(c.center_pos, vec![2.0, 2.0]);
        assert_eq!(c.center_neg, vec![5.0, 3.0]);

        let d = Dataset::from_feature_rows(&[vec![3.0, 3.0, 7.0, 7.0, 0.0]], vec![P, P, P, P, N]).unwrap();
        assert_eq!(class_medians(&d).center_pos, vec![5.0]);
    }

    #[test]
    fn dispersion_examples() {
        let d = Dataset::from_feature_rows(&[vec![4.0; 4], vec![0.0, 0.0, 10.0, 10.0]], vec![P, P, N, N]).unwrap();
        let t = dispersion_triple(&d);
        assert_eq!((t.d_pos[0], t.d_neg[0], t.d_all[0], t.e[0]), (0.0, 0.0, 0.0, 0.0));
        // pooled median of {0,0,10,10} at weights 1/2 is 5, dispersion 4 * (1/2 * 5)
        assert_eq!((t.d_pos[1], t.d_neg[1], t.d_all[1], t.e[1]), (0.0, 0.0, 10.0, -10.0));
    }

    #[test]
    fn centroid_update_examples() {
        assert_eq!(recursive_centroid_update(&[0.0, 0.0], 0, &[7.0, 7.0]), vec![7.0, 7.0]);
        assert_eq!(recursive_centroid_update(&[], 0, &[7.0, 7.0]), vec![7.0, 7.0]);
        assert_eq!(recursive_centroid_update(&[2.0, 0.0], 2, &[5.0, 3.0]), vec![3.0, 1.0]);
    }

    fn arb_weighted() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..=8)
            .prop_flat_map(|p| {
                (
                    prop::collection::vec((-5i32..=5).prop_map(|v| v as f64 * 0.5), p),
                    prop::collection::vec(prop_oneof![Just(0.0), Just(1.0), Just(0.5), 0.01f64..3.0], p),
                )
            })
            .prop_filter("positive total weight", |(_, w)| w.iter().sum::<f64>() > 0.0)
    }

    proptest! {
        #[test]
        fn weighted_median_is_minimal((z, w) in arb_weighted()) {
            let r = weighted_median(&z, &w).unwrap();
            let best = scan_minimum(&z, &w);
            prop_assert!(r.dispersion <= best + 1e-12, "{} > {}", r.dispersion, best);
            prop_assert!((l1_cost(&z, &w, r.theta) - r.dispersion).abs() <= 1e-12);
        }

        #[test]
        fn weighted_median_satisfies_median_inequalities((z, w) in arb_weighted()) {
            let r = weighted_median(&z, &w).unwrap();
            let total: f64 = w.iter().sum();
            let below: f64 = z.iter().zip(&w).filter(|(zi, _)| **zi <= r.theta).map(|p| p.1).sum();
            let above: f64 = z.iter().zip(&w).filter(|(zi, _)| **zi >= r.theta).map(|p| p.1).sum();
            prop_assert!(below / total >= 0.5 - 1e-12);
            prop_assert!(above / total >= 0.5 - 1e-12);
        }

        #[test]
        fn uniform_weights_match_textbook_median(z in prop::collection::vec(-100.0f64..100.0, 1..20)) {
            let r = weighted_median(&z, &vec![1.0; z.len()]).unwrap();
            let mut s = z.clone();
            s.sort_by(f64::total_cmp);
            let p = s.len();
            let textbook = if p % 2 == 1 { s[p / 2] } else { 0.5 * (s[p / 2 - 1] + s[p / 2]) };
            prop_assert_eq!(r.theta, textbook);
        }

        #[test]
        fn translation_equivariance((z, w) in arb_weighted(), c in -8i32..8) {
            let c = c as f64 * 0.25;
            let shifted: Vec<f64> = z.iter().map(|v| v + c).collect();
            let a = weighted_median(&z, &w).unwrap();
            let b = weighted_median(&shifted, &w).unwrap();
            prop_assert!((b.theta - (a.theta + c)).abs() <= 1e-12);
            prop_assert!((b.dispersion - a.dispersion).abs() <= 1e-12);
        }

        #[test]
        fn positive_rescaling_of_weights_keeps_theta((z, w) in arb_weighted(), s in 0.1f64..10.0) {
            let scaled: Vec<f64> = w.iter().map(|v| v * s).collect();
            let a = weighted_median(&z, &w).unwrap();
            let b = weighted_median(&z, &scaled).unwrap();
            prop_assert!((a.theta - b.theta).abs() <= 1e-12);
        }

        #[test]
        fn gain_is_nonpositive(
            rows in prop::collection::vec(prop::collection::vec(-3i32..3, 6), 1..5),
        ) {
            let rows: Vec<Vec<f64>> = rows.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect();
            let d = Dataset::from_feature_rows(&rows, vec![P, N, P, N, P, P]).unwrap();
            let t = dispersion_triple(&d);
            for i in 0..rows.len() {
                prop_assert!(t.e[i] <= 1e-9);
                prop_assert_eq!(t.e[i], (t.d_pos[i] + t.d_neg[i]) - t.d_all[i]);
            }
        }

        #[test]
        fn recursive_mean_is_order_free(
            samples in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 3), 1..40),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let run = |order: &[usize]| {
                let mut c = vec![0.0; 3];
                for (nu, &j) in order.iter().enumerate() {
                    c = recursive_centroid_update(&c, nu as u64, &samples[j]);
                }
                c
            };
            let mut order: Vec<usize> = (0..samples.len()).collect();
            let a = run(&order);
            order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let b = run(&order);
            for i in 0..3 {
                prop_assert!((a[i] - b[i]).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn recursive_mean_matches_batch_mean() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let samples: Vec<Vec<f64>> = (0..100)
            .map(|_| (0..4).map(|_| rng.random_range(-50.0..50.0)).collect())
            .collect();
        let mut c = Vec::new();
        for (nu, s) in samples.iter().enumerate() {
            c = recursive_centroid_update(&c, nu as u64, s);
        }
        for i in 0..4 {
            let batch = samples.iter().map(|s| s[i]).sum::<f64>() / 100.0;
            assert!((c[i] - batch).abs() <= 1e-10);
        }
    }
}
