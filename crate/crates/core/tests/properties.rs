use std::collections::HashSet;

use ndiv_core::calibration::{mean_std, standardize};
use ndiv_core::diversity::{node_rng, pair_from_index, pair_index, sample_pairs};
use ndiv_core::metrics::{auc, average_precision, ks_statistic};
use ndiv_core::projection::l1_normalize_rows;
use ndiv_core::{Graph, Matrix};
use proptest::prelude::*;

fn scored() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
    (3usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(0u8..2, n - 2).prop_map(|mut v| {
                v.push(1);
                v.push(0);
                v
            }),
        )
    })
}

proptest! {
    #[test]
    fn pair_index_round_trips(q in 1usize..100_000, frac in 0.0f64..1.0) {
        let p = ((q as f64) * frac) as usize % q;
        prop_assert_eq!(pair_from_index(pair_index(p, q)), (p, q));
    }

    #[test]
    fn samples_are_distinct_and_in_range(d in 2usize..300, k in 1usize..500, seed: u64) {
        let pairs = sample_pairs(d, k, &mut node_rng(seed, 0)).unwrap();
        prop_assert_eq!(pairs.len(), k.min(d * (d - 1) / 2));
        let set: HashSet<_> = pairs.iter().collect();
        prop_assert_eq!(set.len(), pairs.len());
        prop_assert!(pairs.iter().all(|&(p, q)| p < q && q < d));
    }

    #[test]
    fn auc_is_rank_invariant((s, l) in scored()) {
        let t: Vec<f64> = s.iter().map(|v| (0.7 * v).exp() + 3.0).collect();
        prop_assert_eq!(auc(&s, &l).unwrap(), auc(&t, &l).unwrap());
        let a = auc(&s, &l).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn ks_is_rank_invariant_and_bounded((s, l) in scored()) {
        let t: Vec<f64> = s.iter().map(|v| v * v * v + 2.0 * v).collect();
        let k = ks_statistic(&s, &l).unwrap();
        prop_assert_eq!(k, ks_statistic(&t, &l).unwrap());
        prop_assert!((0.0..=1.0).contains(&k));
    }

    #[test]
    fn ap_is_bounded_by_worst_ranking((s, l) in scored()) {
        // every positive ranked last is the minimum; prevalence is not a bound
        let n = l.len() as f64;
        let p = l.iter().filter(|&&v| v == 1).count() as f64;
        let worst: f64 = (1..=p as usize).map(|j| j as f64 / (n - p + j as f64)).sum::<f64>() / p;
        let ap = average_precision(&s, &l).unwrap();
        prop_assert!(ap >= worst - 1e-12 && ap <= 1.0);
    }

    #[test]
    fn standardized_scores_have_unit_moments(v in prop::collection::vec(0.0f64..10.0, 2..200)) {
        let deltas: Vec<Option<f64>> = v.iter().copied().map(Some).collect();
        let (z, _, sigma) = standardize(&deltas);
        let z: Vec<f64> = z.into_iter().flatten().collect();
        let (m, s) = mean_std(&z);
        if sigma >= 1e-15 {
            prop_assert!(m.abs() < 1e-9 && (s - 1.0).abs() < 1e-9);
        } else {
            prop_assert!(z.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn l1_rows_sum_to_one(rows in prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 4), 1..30)) {
        let m = Matrix::from_rows(&rows).unwrap();
        let out = l1_normalize_rows(&m);
        for r in out.iter_rows() {
            let s: f64 = r.iter().map(|x| x.abs()).sum();
            prop_assert!(s == 0.0 || (s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn built_graphs_are_symmetric(edges in prop::collection::vec((0usize..25, 0usize..25), 0..120)) {
        let g = Graph::build(&edges, Matrix::zeros(25, 1), None).unwrap();
        let profile = g.degree_profile();
        for i in 0..25 {
            let nb = g.neighbors(i);
            prop_assert!(nb.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(!nb.contains(&i));
            for &j in nb {
                prop_assert!(g.has_edge(j, i));
            }
            prop_assert_eq!(profile.valid_mask[i], nb.len() >= 2);
        }
        prop_assert_eq!(profile.valid_count() + profile.invalid_count(), 25);
    }
}
