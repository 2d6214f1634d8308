#![allow(dead_code)]

use coopinf::{NonnegativeMatrix, Permutation};
use proptest::prelude::*;

/// Entries are zero about a third of the time, otherwise in `[0.01, 10)`.
pub fn entry() -> impl Strategy<Value = f64> {
    prop_oneof![1 => Just(0.0), 2 => 0.01f64..10.0]
}

pub fn matrix(
    rows: std::ops::RangeInclusive<usize>,
    cols: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = NonnegativeMatrix> {
    (rows, cols).prop_flat_map(|(r, c)| {
        proptest::collection::vec(entry(), r * c)
            .prop_map(move |d| NonnegativeMatrix::new(r, c, d).unwrap())
    })
}

pub fn square(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = NonnegativeMatrix> {
    n.prop_flat_map(|n| {
        proptest::collection::vec(entry(), n * n)
            .prop_map(move |d| NonnegativeMatrix::new(n, n, d).unwrap())
    })
}

pub fn binary(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = NonnegativeMatrix> {
    n.prop_flat_map(|n| {
        proptest::collection::vec(prop_oneof![Just(0.0), Just(1.0)], n * n)
            .prop_map(move |d| NonnegativeMatrix::new(n, n, d).unwrap())
    })
}

pub fn permutation(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::new(v).unwrap())
}

/// Every permutation of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in all_permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out.sort();
    out
}

/// The positive diagonals of a square matrix, by enumeration.
pub fn positive_diagonals(m: &NonnegativeMatrix) -> Vec<Vec<usize>> {
    all_permutations(m.rows())
        .into_iter()
        .filter(|p| p.iter().enumerate().all(|(i, &j)| m.get(i, j) > 0.0))
        .collect()
}

pub fn is_permutation_pattern(m: &NonnegativeMatrix) -> bool {
    m.is_square()
        && (0..m.rows()).all(|i| m.row(i).iter().filter(|&&v| v > 0.0).count() == 1)
        && (0..m.cols()).all(|j| (0..m.rows()).filter(|&i| m.get(i, j) > 0.0).count() == 1)
}
