//! Transmission Index, its optimality certificate, the Expected Teaching
//! Dimension, the machine-teaching selector and a Monte Carlo episode
//! simulator.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{
    check_same_shape, ColumnStochasticMatrix, NonnegativeMatrix, RowStochasticMatrix,
};

/// `(1/|H|) Σ_j Σ_i L(i,j)·T(i,j)`: the probability, averaged over concepts,
/// that data chosen by the teacher leads the learner to the intended concept.
pub fn transmission_index(l: &RowStochasticMatrix, t: &ColumnStochasticMatrix) -> Result<f64> {
    check_same_shape(l, t)?;
    let total: f64 = l
        .as_slice()
        .iter()
        .zip(t.as_slice())
        .map(|(a, b)| a * b)
        .sum();
    Ok(total / l.cols() as f64)
}

/// Entrywise check of the two conditions under which the index equals one.
#[derive(Clone, Debug, PartialEq)]
pub struct TiCertificate {
    pub ti_value: f64,
    /// `L(i,j) = 1` wherever `T(i,j) > 0`.
    pub condition_i_holds: bool,
    /// Neither `L` nor `T` has a zero column.
    pub condition_ii_holds: bool,
    /// Entries where `T(i,j) > 0` but `L(i,j) ≠ 1`.
    pub violations: Vec<(usize, usize)>,
    /// Columns that are entirely zero in `L` or in `T`.
    pub zero_columns: Vec<usize>,
}

impl TiCertificate {
    pub fn is_optimal(&self) -> bool {
        self.condition_i_holds && self.condition_ii_holds
    }
}

pub fn ti_certificate(
    l: &RowStochasticMatrix,
    t: &ColumnStochasticMatrix,
    tol: f64,
) -> Result<TiCertificate> {
    let ti_value = transmission_index(l, t)?;
    let mut violations = Vec::new();
    for i in 0..l.rows() {
        for j in 0..l.cols() {
            if t.get(i, j) > 0.0 && (l.get(i, j) - 1.0).abs() > tol {
                violations.push((i, j));
            }
        }
    }
    let zero_columns: Vec<usize> = (0..l.cols())
        .filter(|&j| l.column(j).all(|v| v == 0.0) || t.column(j).all(|v| v == 0.0))
        .collect();
    Ok(TiCertificate {
        ti_value,
        condition_i_holds: violations.is_empty(),
        condition_ii_holds: zero_columns.is_empty(),
        violations,
        zero_columns,
    })
}

/// `Σ |D|·L·T / Σ L·T` over all data-set/concept pairs.
pub fn expected_teaching_dimension(
    l: &RowStochasticMatrix,
    t: &ColumnStochasticMatrix,
    sizes: &[usize],
) -> Result<f64> {
    check_same_shape(l, t)?;
    if sizes.len() != l.rows() {
        return Err(Error::DimensionMismatch {
            expected: (l.rows(), 1),
            found: (sizes.len(), 1),
        });
    }
    let mut weighted = 0.0;
    let mut total = 0.0;
    for (i, &size) in sizes.iter().enumerate() {
        let mass: f64 = l.row(i).iter().zip(t.row(i)).map(|(a, b)| a * b).sum();
        weighted += size as f64 * mass;
        total += mass;
    }
    if total <= 0.0 {
        return Err(Error::EtdUndefined);
    }
    Ok(weighted / total)
}

/// How machine teaching splits a concept's mass among tied best data sets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieRule {
    /// Share the mass equally among all maximizing data sets.
    #[default]
    UniformSplit,
    /// Put all mass on the maximizing data set with the lowest index.
    LowestIndex,
}

/// Teacher that, for every concept, deterministically selects the data set
/// maximizing the learner's posterior for that concept.
pub fn machine_teaching_matrix(
    l: &RowStochasticMatrix,
    tie_rule: TieRule,
) -> Result<ColumnStochasticMatrix> {
    let (rows, cols) = l.shape();
    let mut data = vec![0.0; rows * cols];
    for j in 0..cols {
        let best = l.column(j).fold(0.0, f64::max);
        if best <= 0.0 {
            return Err(Error::UnteachableConcept { concept: j });
        }
        let winners: Vec<usize> = l
            .column(j)
            .enumerate()
            .filter(|&(_, v)| v == best)
            .map(|(i, _)| i)
            .collect();
        match tie_rule {
            TieRule::UniformSplit => {
                let share = 1.0 / winners.len() as f64;
                for i in winners {
                    data[i * cols + j] = share;
                }
            }
            TieRule::LowestIndex => data[winners[0] * cols + j] = 1.0,
        }
    }
    let m = NonnegativeMatrix::from_parts_unchecked(rows, cols, data, l.index().cloned());
    ColumnStochasticMatrix::new(m, crate::matrix::DEFAULT_TOLERANCE)
}

/// Fraction of simulated episodes in which the learner recovers the concept.
///
/// Each episode draws a concept uniformly, a data set from that concept's
/// teacher column, and an inferred concept from that data set's learner row.
/// The generator is ChaCha8 seeded with `seed`; categorical draws use
/// `WeightedIndex` (cumulative weights, binary search).
pub fn simulate_transmission(
    l: &RowStochasticMatrix,
    t: &ColumnStochasticMatrix,
    episodes: u64,
    seed: u64,
) -> Result<f64> {
    check_same_shape(l, t)?;
    if episodes == 0 {
        return Err(Error::InvalidArgument("episodes must be positive".into()));
    }
    let (rows, cols) = l.shape();
    let teacher: Vec<Option<WeightedIndex<f64>>> = (0..cols)
        .map(|j| WeightedIndex::new(t.column(j)).ok())
        .collect();
    let learner: Vec<Option<WeightedIndex<f64>>> = (0..rows)
        .map(|i| WeightedIndex::new(l.row(i).iter().copied()).ok())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..episodes {
        let concept = rng.random_range(0..cols);
        let select = teacher[concept]
            .as_ref()
            .ok_or(Error::UnselectableConcept { concept })?;
        let dataset = select.sample(&mut rng);
        let infer = learner[dataset]
            .as_ref()
            .ok_or(Error::UndefinedPosterior { dataset })?;
        if infer.sample(&mut rng) == concept {
            hits += 1;
        }
    }
    Ok(hits as f64 / episodes as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{column_normalize, row_normalize};

    const EPS: f64 = 1e-12;

    fn l(rows: &[&[f64]]) -> RowStochasticMatrix {
        RowStochasticMatrix::from_rows(rows).unwrap()
    }

    fn t(rows: &[&[f64]]) -> ColumnStochasticMatrix {
        ColumnStochasticMatrix::from_rows(rows).unwrap()
    }

    fn normalizations(rows: &[&[f64]]) -> (RowStochasticMatrix, ColumnStochasticMatrix) {
        let c = NonnegativeMatrix::from_rows(rows).unwrap();
        (row_normalize(&c), column_normalize(&c))
    }

    #[test]
    fn ti_examples() {
        let id = t(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(
            transmission_index(&l(&[&[1.0, 0.0], &[0.0, 1.0]]), &id).unwrap(),
            1.0
        );
        assert_eq!(
            transmission_index(&l(&[&[0.0, 1.0], &[1.0, 0.0]]), &id).unwrap(),
            0.0
        );
        let ti = transmission_index(
            &l(&[&[0.5, 0.5], &[0.0, 1.0]]),
            &t(&[&[1.0, 1.0 / 3.0], &[0.0, 2.0 / 3.0]]),
        )
        .unwrap();
        assert!((ti - 2.0 / 3.0).abs() < EPS);
    }

    #[test]
    fn ti_dimension_mismatch() {
        let a = l(&[&[1.0, 0.0]]);
        let b = t(&[&[1.0], &[0.0]]);
        assert!(matches!(
            transmission_index(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn certificate_examples() {
        let id = t(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let c = ti_certificate(&l(&[&[1.0, 0.0], &[0.0, 1.0]]), &id, 1e-9).unwrap();
        assert!(c.condition_i_holds && c.condition_ii_holds && c.ti_value == 1.0);

        let c = ti_certificate(&l(&[&[0.5, 0.5], &[0.5, 0.5]]), &id, 1e-9).unwrap();
        assert_eq!(c.ti_value, 0.5);
        assert!(!c.condition_i_holds && c.condition_ii_holds);
        // T is positive only on the diagonal, so those are the flagged entries.
        assert_eq!(c.violations, vec![(0, 0), (1, 1)]);

        let (la, ta) = normalizations(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let c = ti_certificate(&la, &ta, 1e-9).unwrap();
        assert_eq!(c.ti_value, 0.5);
        assert!(c.condition_i_holds && !c.condition_ii_holds);
        assert_eq!(c.zero_columns, vec![1]);
    }

    #[test]
    fn etd_examples() {
        let sizes = [2, 3];
        let (lb, tb) = normalizations(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!((expected_teaching_dimension(&lb, &tb, &sizes).unwrap() - 2.5).abs() < EPS);
        let (ld, td) = normalizations(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let expected = (3.0 * 2.0 + 2.0 * 3.0) / 5.0;
        assert!((expected_teaching_dimension(&ld, &td, &sizes).unwrap() - expected).abs() < EPS);
        let (la, ta) = normalizations(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert!((expected_teaching_dimension(&la, &ta, &sizes).unwrap() - 2.0).abs() < EPS);
    }

    #[test]
    fn etd_errors() {
        let id = t(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let anti = l(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(matches!(
            expected_teaching_dimension(&anti, &id, &[1, 1]),
            Err(Error::EtdUndefined)
        ));
        assert!(matches!(
            expected_teaching_dimension(&anti, &id, &[1]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn machine_teaching_ties() {
        let flat = l(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let split = machine_teaching_matrix(&flat, TieRule::UniformSplit).unwrap();
        assert_eq!(split.to_rows(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        let low = machine_teaching_matrix(&flat, TieRule::LowestIndex).unwrap();
        assert_eq!(low.to_rows(), vec![vec![1.0, 1.0], vec![0.0, 0.0]]);

        let eye = l(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let mt = machine_teaching_matrix(&eye, TieRule::default()).unwrap();
        assert_eq!(mt.as_slice(), eye.as_slice());
    }

    #[test]
    fn machine_teaching_rejects_zero_column() {
        let bad = l(&[&[1.0, 0.0], &[1.0, 0.0]]);
        assert!(matches!(
            machine_teaching_matrix(&bad, TieRule::UniformSplit),
            Err(Error::UnteachableConcept { concept: 1 })
        ));
    }

    #[test]
    fn simulate_trivial_cases() {
        let id = t(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let eye = l(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(simulate_transmission(&eye, &id, 1000, 7).unwrap(), 1.0);
        let anti = l(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(simulate_transmission(&anti, &id, 1000, 7).unwrap(), 0.0);
    }

    #[test]
    fn simulate_is_deterministic_per_seed() {
        let (l1, t1) = normalizations(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let a = simulate_transmission(&l1, &t1, 5000, 42).unwrap();
        let b = simulate_transmission(&l1, &t1, 5000, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn simulate_errors() {
        // Teacher selects data set 1, whose learner row is empty.
        let learner = l(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let teacher = t(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(matches!(
            simulate_transmission(&learner, &teacher, 100, 0),
            Err(Error::UndefinedPosterior { dataset: 1 })
        ));
        let id = t(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let eye = l(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(
            simulate_transmission(&eye, &id, 100, 0),
            Err(Error::UnselectableConcept { concept: 1 })
        ));
    }
}
