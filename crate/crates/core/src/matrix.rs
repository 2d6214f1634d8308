//! Dense nonnegative matrices over a data-set × concept grid.
//!
//! Rows always index data sets and columns always index concepts. A
//! [`NonnegativeMatrix`] may optionally carry a [`SpaceIndex`] that names its
//! rows and columns and records the size of every data set.

use std::collections::HashSet;
use std::fmt;
use std::ops::Deref;

use crate::error::{Error, Result};

/// Absolute tolerance on row and column sums used by the stochastic checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Labels for the concept space and the data-set space, with the size of
/// each data set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceIndex {
    concept_labels: Vec<String>,
    dataset_labels: Vec<String>,
    dataset_sizes: Vec<usize>,
}

impl SpaceIndex {
    pub fn new(
        concept_labels: Vec<String>,
        dataset_labels: Vec<String>,
        dataset_sizes: Vec<usize>,
    ) -> Result<Self> {
        if concept_labels.is_empty() || dataset_labels.is_empty() {
            return Err(Error::InvalidSpaceIndex(
                "concept and data-set spaces must be nonempty".into(),
            ));
        }
        check_unique("concept", &concept_labels)?;
        check_unique("data-set", &dataset_labels)?;
        if dataset_sizes.len() != dataset_labels.len() {
            return Err(Error::InvalidSpaceIndex(format!(
                "{} data-set sizes for {} data sets",
                dataset_sizes.len(),
                dataset_labels.len()
            )));
        }
        Ok(Self {
            concept_labels,
            dataset_labels,
            dataset_sizes,
        })
    }

    /// Index with generated labels `d1..`, `h1..` and the given sizes.
    pub fn with_sizes(num_concepts: usize, dataset_sizes: Vec<usize>) -> Result<Self> {
        let concepts = (1..=num_concepts).map(|j| format!("h{j}")).collect();
        let datasets = (1..=dataset_sizes.len()).map(|i| format!("d{i}")).collect();
        Self::new(concepts, datasets, dataset_sizes)
    }

    pub fn concept_labels(&self) -> &[String] {
        &self.concept_labels
    }

    pub fn dataset_labels(&self) -> &[String] {
        &self.dataset_labels
    }

    pub fn dataset_sizes(&self) -> &[usize] {
        &self.dataset_sizes
    }

    pub fn num_concepts(&self) -> usize {
        self.concept_labels.len()
    }

    pub fn num_datasets(&self) -> usize {
        self.dataset_labels.len()
    }

    fn permuted(&self, row_perm: &Permutation, col_perm: &Permutation) -> Self {
        Self {
            concept_labels: col_perm
                .iter()
                .map(|j| self.concept_labels[j].clone())
                .collect(),
            dataset_labels: row_perm
                .iter()
                .map(|i| self.dataset_labels[i].clone())
                .collect(),
            dataset_sizes: row_perm.iter().map(|i| self.dataset_sizes[i]).collect(),
        }
    }
}

fn check_unique(what: &str, labels: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(labels.len());
    for label in labels {
        if !seen.insert(label.as_str()) {
            return Err(Error::InvalidSpaceIndex(format!(
                "duplicate {what} label {label:?}"
            )));
        }
    }
    Ok(())
}

/// A bijection on `0..n`, stored as its image sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &k in &image {
            if k >= n {
                return Err(Error::InvalidPermutation(format!(
                    "image {k} out of range for length {n}"
                )));
            }
            if std::mem::replace(&mut seen[k], true) {
                return Err(Error::InvalidPermutation(format!("image {k} repeated")));
            }
        }
        Ok(Self(image))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &k) in self.0.iter().enumerate() {
            inv[k] = i;
        }
        Self(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &k)| i == k)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (pos, k) in self.0.iter().enumerate() {
            if pos > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, "]")
    }
}

/// Dense `|D| × |H|` matrix of finite nonnegative reals, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct NonnegativeMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    index: Option<SpaceIndex>,
}

impl NonnegativeMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "{} entries supplied for a {rows} x {cols} matrix",
                data.len()
            )));
        }
        for (k, &value) in data.iter().enumerate() {
            let (row, col) = (k / cols, k % cols);
            if !value.is_finite() {
                return Err(Error::NonFiniteEntry { row, col });
            }
            if value < 0.0 {
                return Err(Error::NegativeEntry { row, col, value });
            }
        }
        Ok(Self {
            rows,
            cols,
            data,
            index: None,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::RaggedRow {
                    row: i,
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        Ok(m)
    }

    /// The 0/1 matrix with a one at `(i, perm(i))` for every row `i`.
    pub fn permutation_matrix(perm: &Permutation) -> Result<Self> {
        let n = perm.len();
        let mut m = Self::zeros(n, n)?;
        for (i, j) in perm.iter().enumerate() {
            m.data[i * n + j] = 1.0;
        }
        Ok(m)
    }

    /// Attach labels; the index must match the matrix shape.
    pub fn with_index(mut self, index: SpaceIndex) -> Result<Self> {
        let found = (index.num_datasets(), index.num_concepts());
        if found != self.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.shape(),
                found,
            });
        }
        self.index = Some(index);
        Ok(self)
    }

    pub fn without_index(mut self) -> Self {
        self.index = None;
        self
    }

    pub fn index(&self) -> Option<&SpaceIndex> {
        self.index.as_ref()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(col).step_by(self.cols).copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.data
            .chunks(self.cols)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for row in self.data.chunks(self.cols) {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// Largest entrywise absolute difference. Shapes must agree.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_same_shape(self, other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Copy with the given entry replaced. Used for pruning and pattern edits.
    pub(crate) fn with_entry(mut self, row: usize, col: usize, value: f64) -> Self {
        self.data[row * self.cols + col] = value;
        self
    }

    pub(crate) fn from_parts_unchecked(
        rows: usize,
        cols: usize,
        data: Vec<f64>,
        index: Option<SpaceIndex>,
    ) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self {
            rows,
            cols,
            data,
            index,
        }
    }
}

pub(crate) fn check_same_shape(a: &NonnegativeMatrix, b: &NonnegativeMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.shape(),
            found: b.shape(),
        });
    }
    Ok(())
}

pub(crate) fn check_square(m: &NonnegativeMatrix) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    Ok(m.rows)
}

/// Learner matrix: every row sums to one or is entirely zero.
#[derive(Clone, Debug, PartialEq)]
pub struct RowStochasticMatrix(NonnegativeMatrix);

impl RowStochasticMatrix {
    pub(crate) fn new_unchecked(m: NonnegativeMatrix) -> Self {
        Self(m)
    }

    pub fn new(m: NonnegativeMatrix, tol: f64) -> Result<Self> {
        for (index, sum) in m.row_sums().into_iter().enumerate() {
            if sum != 0.0 && (sum - 1.0).abs() > tol {
                return Err(Error::NotStochastic {
                    kind: "row",
                    index,
                    sum,
                });
            }
        }
        Ok(Self(m))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(NonnegativeMatrix::from_rows(rows)?, DEFAULT_TOLERANCE)
    }

    pub fn into_inner(self) -> NonnegativeMatrix {
        self.0
    }
}

impl Deref for RowStochasticMatrix {
    type Target = NonnegativeMatrix;

    fn deref(&self) -> &NonnegativeMatrix {
        &self.0
    }
}

/// Teacher matrix: every column sums to one or is entirely zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnStochasticMatrix(NonnegativeMatrix);

impl ColumnStochasticMatrix {
    pub(crate) fn new_unchecked(m: NonnegativeMatrix) -> Self {
        Self(m)
    }

    pub fn new(m: NonnegativeMatrix, tol: f64) -> Result<Self> {
        for (index, sum) in m.column_sums().into_iter().enumerate() {
            if sum != 0.0 && (sum - 1.0).abs() > tol {
                return Err(Error::NotStochastic {
                    kind: "column",
                    index,
                    sum,
                });
            }
        }
        Ok(Self(m))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(NonnegativeMatrix::from_rows(rows)?, DEFAULT_TOLERANCE)
    }

    pub fn into_inner(self) -> NonnegativeMatrix {
        self.0
    }
}

impl Deref for ColumnStochasticMatrix {
    type Target = NonnegativeMatrix;

    fn deref(&self) -> &NonnegativeMatrix {
        &self.0
    }
}

// A freshly normalized line sums to 1 up to accumulated rounding; such lines
// are left untouched so that normalization is exactly idempotent.
fn already_normalized(sum: f64, len: usize) -> bool {
    (sum - 1.0).abs() <= 4.0 * len as f64 * f64::EPSILON
}

pub(crate) fn row_normalize_in_place(data: &mut [f64], cols: usize) {
    for row in data.chunks_mut(cols) {
        let sum: f64 = row.iter().sum();
        if sum > 0.0 && !already_normalized(sum, cols) {
            row.iter_mut().for_each(|v| *v /= sum);
        }
    }
}

pub(crate) fn column_normalize_in_place(data: &mut [f64], cols: usize) {
    let rows = data.len() / cols;
    let mut sums = vec![0.0; cols];
    for row in data.chunks(cols) {
        for (s, v) in sums.iter_mut().zip(row) {
            *s += v;
        }
    }
    for s in sums.iter_mut() {
        if *s == 0.0 || already_normalized(*s, rows) {
            *s = 1.0;
        }
    }
    for row in data.chunks_mut(cols) {
        for (v, s) in row.iter_mut().zip(&sums) {
            *v /= s;
        }
    }
}

/// Divide every nonzero row by its sum; zero rows stay zero.
pub fn row_normalize(m: &NonnegativeMatrix) -> RowStochasticMatrix {
    let mut out = m.clone();
    row_normalize_in_place(&mut out.data, out.cols);
    RowStochasticMatrix(out)
}

/// Divide every nonzero column by its sum; zero columns stay zero.
pub fn column_normalize(m: &NonnegativeMatrix) -> ColumnStochasticMatrix {
    let mut out = m.clone();
    column_normalize_in_place(&mut out.data, out.cols);
    ColumnStochasticMatrix(out)
}

/// True iff `m` is square and every row and column sum is within `tol` of one.
pub fn is_doubly_stochastic(m: &NonnegativeMatrix, tol: f64) -> Result<bool> {
    check_square(m)?;
    let near_one = |s: &f64| (s - 1.0).abs() <= tol;
    Ok(m.row_sums().iter().all(near_one) && m.column_sums().iter().all(near_one))
}

/// `output(i, j) = m(row_perm(i), col_perm(j))`; labels follow their rows and columns.
pub fn joint_permute(
    m: &NonnegativeMatrix,
    row_perm: &Permutation,
    col_perm: &Permutation,
) -> Result<NonnegativeMatrix> {
    if row_perm.len() != m.rows || col_perm.len() != m.cols {
        return Err(Error::DimensionMismatch {
            expected: m.shape(),
            found: (row_perm.len(), col_perm.len()),
        });
    }
    let mut data = Vec::with_capacity(m.data.len());
    for i in row_perm.iter() {
        let row = m.row(i);
        data.extend(col_perm.iter().map(|j| row[j]));
    }
    let index = m.index.as_ref().map(|ix| ix.permuted(row_perm, col_perm));
    Ok(NonnegativeMatrix::from_parts_unchecked(
        m.rows, m.cols, data, index,
    ))
}
