mod common;

use std::collections::HashMap;

use common::binary;
use coopinf::teaching::{
    build_threshold_learner, sample_consistency, ConsistencyMatrix, ThresholdProblem,
};
use coopinf::NonnegativeMatrix;
use proptest::prelude::*;

fn increasing(max_len: usize) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::btree_set(-20i64..20, 1..=max_len).prop_map(|s| s.into_iter().collect())
}

fn pairs(instances: &[i64]) -> Vec<(i64, i64)> {
    instances
        .iter()
        .enumerate()
        .flat_map(|(k, &x1)| instances[k + 1..].iter().map(move |&x2| (x1, x2)))
        .collect()
}

/// `h_θ` labels `x1` negative and `x2` positive iff `x1 < θ ≤ x2`.
fn consistent(thresholds: &[i64], x1: i64, x2: i64) -> Vec<bool> {
    thresholds.iter().map(|&th| x1 < th && th <= x2).collect()
}

proptest! {
    #[test]
    fn a_row_teaches_at_most_one_concept(m in binary(1..=5)) {
        let c = ConsistencyMatrix::from_rows(&m.to_rows(), &vec![1; m.rows()]).unwrap();
        for i in 0..c.rows() {
            let taught = (0..c.cols()).filter(|&j| c.is_teaching_set(i, j)).count();
            prop_assert!(taught <= 1);
        }
    }

    #[test]
    fn threshold_learner_is_uniform_over_consistent_thresholds(
        (thresholds, instances) in increasing(7)
            .prop_filter("two instances", |v| v.len() >= 2)
            .prop_flat_map(|inst| {
                // Thresholds drawn from the instances above the smallest one
                // leave every pair with at least one consistent threshold.
                let above = inst[1..].to_vec();
                let n = above.len();
                (proptest::sample::subsequence(above, 1..=n), Just(inst))
            })
            .prop_filter("every pair consistent", |(th, inst)| {
                inst.windows(2).all(|w| th.iter().any(|&t| w[0] < t && t <= w[1]))
            })
    ) {
        let problem = ThresholdProblem::new(thresholds.clone(), instances.clone()).unwrap();
        let l = build_threshold_learner(&problem).unwrap();
        let pairs = pairs(&instances);
        prop_assert_eq!(l.rows(), pairs.len());
        prop_assert_eq!(l.cols(), thresholds.len());
        for (i, &(x1, x2)) in pairs.iter().enumerate() {
            let consistent = consistent(&thresholds, x1, x2);
            let k = consistent.iter().filter(|&&b| b).count();
            for (j, &ok) in consistent.iter().enumerate() {
                let want = if ok { 1.0 / k as f64 } else { 0.0 };
                prop_assert_eq!(l.get(i, j), want);
            }
            prop_assert!((l.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn threshold_learner_rejects_unexplainable_data(
        thresholds in increasing(4),
        instances in increasing(5),
    ) {
        let problem = ThresholdProblem::new(thresholds.clone(), instances.clone()).unwrap();
        let explainable = instances.len() >= 2
            && pairs(&instances).iter().all(|&(a, b)| consistent(&thresholds, a, b).contains(&true));
        prop_assert_eq!(build_threshold_learner(&problem).is_ok(), explainable);
    }
}

#[test]
fn sampled_consistency_matrices_are_equally_likely() {
    let p = NonnegativeMatrix::from_rows(&[[1.0, 0.5], [0.0, 0.5]]).unwrap();
    let seeds = 20_000u64;
    let mut counts: HashMap<Vec<u64>, usize> = HashMap::new();
    for seed in 0..seeds {
        let c = sample_consistency(&p, seed).unwrap();
        *counts
            .entry(c.as_slice().iter().map(|&v| v as u64).collect())
            .or_default() += 1;
    }
    let expected = [
        vec![1, 0, 0, 0],
        vec![1, 0, 0, 1],
        vec![1, 1, 0, 0],
        vec![1, 1, 0, 1],
    ];
    assert_eq!(counts.len(), 4, "{counts:?}");
    for key in expected {
        let freq = counts[&key] as f64 / seeds as f64;
        assert!((freq - 0.25).abs() <= 0.02, "{key:?}: {freq}");
    }
}
