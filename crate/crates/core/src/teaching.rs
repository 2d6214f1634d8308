//! Deterministic consistency, teaching sets and teaching dimensions.
//!
//! A consistency matrix has one row per data set and one column per concept,
//! with a one where the concept labels every point of the data set correctly.

use std::fmt;
use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{NonnegativeMatrix, RowStochasticMatrix, SpaceIndex, DEFAULT_TOLERANCE};

/// A value that is either finite or infinite, with extended-real arithmetic
/// (`∞ + x = ∞`, `min(∞, x) = x`).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub enum Extended<T> {
    Finite(T),
    Infinite,
}

impl<T: Copy> Extended<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(self) -> Option<T> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }
}

impl<T: fmt::Display> fmt::Display for Extended<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => v.fmt(f),
            Extended::Infinite => write!(f, "inf"),
        }
    }
}

/// Minimum teaching-set size of a single concept.
pub type TeachingDimensionValue = Extended<usize>;

/// 0/1 matrix (rows = data sets, columns = concepts) with data-set sizes.
#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyMatrix(NonnegativeMatrix);

impl ConsistencyMatrix {
    /// Wrap a 0/1 matrix. Without an attached index every data set gets size 1.
    pub fn new(m: NonnegativeMatrix) -> Result<Self> {
        for i in 0..m.rows() {
            for (j, &v) in m.row(i).iter().enumerate() {
                if v != 0.0 && v != 1.0 {
                    return Err(Error::InvalidArgument(format!(
                        "consistency entry ({i}, {j}) = {v} is not 0 or 1"
                    )));
                }
            }
        }
        let m = match m.index() {
            Some(_) => m,
            None => {
                let index = SpaceIndex::with_sizes(m.cols(), vec![1; m.rows()])?;
                m.with_index(index)?
            }
        };
        Ok(Self(m))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], sizes: &[usize]) -> Result<Self> {
        let m = NonnegativeMatrix::from_rows(rows)?;
        let index = SpaceIndex::with_sizes(m.cols(), sizes.to_vec())?;
        Self::new(m.with_index(index)?)
    }

    pub fn dataset_sizes(&self) -> &[usize] {
        self.0
            .index()
            .expect("consistency matrices always carry an index")
            .dataset_sizes()
    }

    pub fn is_consistent(&self, dataset: usize, concept: usize) -> bool {
        self.0.get(dataset, concept) == 1.0
    }

    /// True iff data set `i` is consistent with concept `j` and no other.
    pub fn is_teaching_set(&self, i: usize, j: usize) -> bool {
        self.is_consistent(i, j)
            && (0..self.cols()).all(|other| other == j || !self.is_consistent(i, other))
    }

    pub fn into_inner(self) -> NonnegativeMatrix {
        self.0
    }
}

impl Deref for ConsistencyMatrix {
    type Target = NonnegativeMatrix;

    fn deref(&self) -> &NonnegativeMatrix {
        &self.0
    }
}

fn check_probabilities(m: &NonnegativeMatrix) -> Result<()> {
    for i in 0..m.rows() {
        for (j, &value) in m.row(i).iter().enumerate() {
            if value > 1.0 {
                return Err(Error::ProbabilityOutOfRange {
                    row: i,
                    col: j,
                    value,
                });
            }
        }
    }
    Ok(())
}

fn with_same_index(m: &NonnegativeMatrix, data: Vec<f64>) -> Result<ConsistencyMatrix> {
    let out = NonnegativeMatrix::new(m.rows(), m.cols(), data)?;
    let out = match m.index() {
        Some(ix) => out.with_index(ix.clone())?,
        None => out,
    };
    ConsistencyMatrix::new(out)
}

/// Draw each entry as an independent Bernoulli trial with the given
/// probability, using a ChaCha8 generator seeded with `seed`.
pub fn sample_consistency(
    probabilities: &NonnegativeMatrix,
    seed: u64,
) -> Result<ConsistencyMatrix> {
    check_probabilities(probabilities)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = probabilities
        .as_slice()
        .iter()
        .map(|&p| if rng.random::<f64>() < p { 1.0 } else { 0.0 })
        .collect();
    with_same_index(probabilities, data)
}

/// Round each probability to 1 when it exceeds `threshold`, else to 0.
pub fn threshold_round(
    probabilities: &NonnegativeMatrix,
    threshold: f64,
) -> Result<ConsistencyMatrix> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidThreshold(threshold));
    }
    check_probabilities(probabilities)?;
    let data = probabilities
        .as_slice()
        .iter()
        .map(|&p| if p > threshold { 1.0 } else { 0.0 })
        .collect();
    with_same_index(probabilities, data)
}

/// Smallest teaching set for `concept`, or infinity when none exists.
pub fn teaching_dimension(c: &ConsistencyMatrix, concept: usize) -> Result<TeachingDimensionValue> {
    if concept >= c.cols() {
        return Err(Error::IndexOutOfRange {
            index: concept,
            len: c.cols(),
        });
    }
    let sizes = c.dataset_sizes();
    Ok((0..c.rows())
        .filter(|&i| c.is_teaching_set(i, concept))
        .map(|i| sizes[i])
        .min()
        .map_or(Extended::Infinite, Extended::Finite))
}

/// Mean teaching dimension over all concepts; infinite if any concept is.
pub fn average_teaching_dimension(c: &ConsistencyMatrix) -> Extended<f64> {
    let mut total = 0usize;
    for j in 0..c.cols() {
        match teaching_dimension(c, j).expect("column index in range") {
            Extended::Finite(td) => total += td,
            Extended::Infinite => return Extended::Infinite,
        }
    }
    Extended::Finite(total as f64 / c.cols() as f64)
}

/// Threshold classifiers `h_θ(x) = −` for `x < θ` and `+` for `x ≥ θ`,
/// taught with two-example data sets `{(x₁, −), (x₂, +)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdProblem {
    thresholds: Vec<i64>,
    instances: Vec<i64>,
}

impl ThresholdProblem {
    pub fn new(thresholds: Vec<i64>, instances: Vec<i64>) -> Result<Self> {
        for (name, values) in [("thresholds", &thresholds), ("instances", &instances)] {
            if values.is_empty() {
                return Err(Error::MalformedProblem(format!("{name} must be nonempty")));
            }
            if values.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::MalformedProblem(format!(
                    "{name} must be strictly increasing"
                )));
            }
        }
        Ok(Self {
            thresholds,
            instances,
        })
    }

    pub fn thresholds(&self) -> &[i64] {
        &self.thresholds
    }

    pub fn instances(&self) -> &[i64] {
        &self.instances
    }
}

/// Version-space learner: each data set `{(x₁, −), (x₂, +)}` with `x₁ < x₂`
/// spreads its mass uniformly over the thresholds `θ` with `x₁ < θ ≤ x₂`.
/// Data sets are ordered lexicographically by `(x₁, x₂)`.
pub fn build_threshold_learner(problem: &ThresholdProblem) -> Result<RowStochasticMatrix> {
    let xs = problem.instances();
    let thetas = problem.thresholds();
    let mut labels = Vec::new();
    let mut data = Vec::new();
    for (a, &x1) in xs.iter().enumerate() {
        for &x2 in &xs[a + 1..] {
            let consistent: Vec<bool> = thetas.iter().map(|&t| x1 < t && t <= x2).collect();
            let count = consistent.iter().filter(|&&c| c).count();
            if count == 0 {
                return Err(Error::MalformedProblem(format!(
                    "no threshold is consistent with {{{x1},-,{x2},+}}"
                )));
            }
            let share = 1.0 / count as f64;
            data.extend(consistent.iter().map(|&c| if c { share } else { 0.0 }));
            labels.push(format!("{{{x1},-,{x2},+}}"));
        }
    }
    if labels.is_empty() {
        return Err(Error::MalformedProblem(
            "at least two instances are needed to form a data set".into(),
        ));
    }
    let rows = labels.len();
    let index = SpaceIndex::new(
        thetas.iter().map(|t| format!("h_{t}")).collect(),
        labels,
        vec![2; rows],
    )?;
    let m = NonnegativeMatrix::new(rows, thetas.len(), data)?.with_index(index)?;
    RowStochasticMatrix::new(m, DEFAULT_TOLERANCE)
}
