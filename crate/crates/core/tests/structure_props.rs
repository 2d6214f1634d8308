mod common;

use common::{binary, positive_diagonals, square};
use coopinf::sinkhorn::prune_to_diagonal_support;
use coopinf::structure::{
    count_positive_diagonals, has_exactly_one_positive_diagonal, has_positive_diagonal, peel,
    triangularize,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn ryser_matches_enumeration(m in square(1..=7)) {
        prop_assert_eq!(count_positive_diagonals(&m).unwrap(), positive_diagonals(&m).len() as u64);
    }

    #[test]
    fn support_predicates_agree(m in binary(1..=6)) {
        let count = count_positive_diagonals(&m).unwrap();
        prop_assert_eq!(count > 0, has_positive_diagonal(&m).unwrap());
        prop_assert_eq!(count == 1, has_exactly_one_positive_diagonal(&m).unwrap());
        prop_assert_eq!(count == 1, peel(&m).unwrap().is_complete());
        prop_assert_eq!(count == 1, triangularize(&m).unwrap().is_some());
    }

    #[test]
    fn witnesses_triangularize(m in binary(1..=6)) {
        if let Some(w) = triangularize(&m).unwrap() {
            let t = w.apply(&m).unwrap();
            for i in 0..t.rows() {
                prop_assert!(t.get(i, i) > 0.0);
                for j in 0..i {
                    prop_assert_eq!(t.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn pruning_is_idempotent(m in square(1..=6)) {
        prop_assume!(has_positive_diagonal(&m).unwrap());
        let once = prune_to_diagonal_support(&m).unwrap();
        let twice = prune_to_diagonal_support(&once).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(count_positive_diagonals(&once).unwrap(), count_positive_diagonals(&m).unwrap());
    }

    #[test]
    fn pruning_keeps_exactly_the_diagonal_entries(m in square(1..=5)) {
        let diags = positive_diagonals(&m);
        prop_assume!(!diags.is_empty());
        let pruned = prune_to_diagonal_support(&m).unwrap();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let on_some = diags.iter().any(|d| d[i] == j);
                let want = if on_some { m.get(i, j) } else { 0.0 };
                prop_assert_eq!(pruned.get(i, j), want);
            }
        }
    }
}
