//! Cooperative inference as a fixed-point iteration.
//!
//! Starting from a shared likelihood `M` (rows = data sets, columns =
//! concepts), the learner step row-normalizes `T·diag(a)` and the teacher step
//! column-normalizes `diag(b)·L`, where `a` and `b` are the concept and
//! data-set priors. With uniform priors on a square `M` this is the
//! Sinkhorn–Knopp iteration, and the Cooperative Index is the Transmission
//! Index of the limiting pair.

use std::io::Write;

use crate::error::{Error, Result};
use crate::matrix::{
    check_square, column_normalize_in_place, row_normalize_in_place, ColumnStochasticMatrix,
    NonnegativeMatrix, Permutation, RowStochasticMatrix, DEFAULT_TOLERANCE,
};
use crate::structure::{diagonal_support_entry, has_positive_diagonal};
use crate::transmission::transmission_index;

pub const DEFAULT_ITERATION_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

/// Learner prior over concepts and teacher prior over data sets.
#[derive(Clone, Debug, PartialEq)]
pub struct Priors {
    concept: Vec<f64>,
    dataset: Vec<f64>,
}

impl Priors {
    pub fn new(concept: Vec<f64>, dataset: Vec<f64>) -> Result<Self> {
        for (name, v) in [("concept", &concept), ("data-set", &dataset)] {
            if v.is_empty() {
                return Err(Error::InvalidPriors(format!("{name} prior is empty")));
            }
            if v.iter().any(|&p| !p.is_finite() || p < 0.0) {
                return Err(Error::InvalidPriors(format!(
                    "{name} prior has a negative or non-finite entry"
                )));
            }
            let sum: f64 = v.iter().sum();
            if (sum - 1.0).abs() > DEFAULT_TOLERANCE {
                return Err(Error::InvalidPriors(format!("{name} prior sums to {sum}")));
            }
        }
        Ok(Self { concept, dataset })
    }

    pub fn uniform(num_datasets: usize, num_concepts: usize) -> Self {
        Self {
            concept: vec![1.0 / num_concepts as f64; num_concepts],
            dataset: vec![1.0 / num_datasets as f64; num_datasets],
        }
    }

    pub fn concept(&self) -> &[f64] {
        &self.concept
    }

    pub fn dataset(&self) -> &[f64] {
        &self.dataset
    }

    pub fn is_uniform(&self) -> bool {
        let flat = |v: &[f64]| v.iter().all(|&p| p == v[0]);
        flat(&self.concept) && flat(&self.dataset)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Side {
    /// The learner step: row normalization.
    #[default]
    Learner,
    /// The teacher step: column normalization.
    Teacher,
}

impl Side {
    pub fn label(self) -> &'static str {
        match self {
            Side::Learner => "L",
            Side::Teacher => "T",
        }
    }
}

#[derive(Clone, Debug)]
pub struct IterationOptions {
    pub max_iter: usize,
    /// Stop once successive learner and teacher matrices both move by at most this much.
    pub tol: f64,
    /// Which half-step comes first.
    pub start: Side,
    /// Positive diagonal whose products are tracked at every half-step.
    pub reference_diagonal: Option<Permutation>,
    /// Record per-half-step residuals even without a reference diagonal.
    pub record_trace: bool,
}

impl Default for IterationOptions {
    fn default() -> Self {
        Self {
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_ITERATION_TOLERANCE,
            start: Side::Learner,
            reference_diagonal: None,
            record_trace: false,
        }
    }
}

/// One half-step of the iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceEntry {
    pub step: usize,
    pub side: Side,
    /// Max entrywise change from the previous matrix on the same side.
    pub residual: f64,
    /// `ln Π_i X(i, σ(i))` along the reference diagonal, when one was given.
    pub log_diagonal: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct CooperativeResult {
    pub learner: RowStochasticMatrix,
    pub teacher: ColumnStochasticMatrix,
    /// Completed (learner, teacher) steps.
    pub iterations: usize,
    pub converged: bool,
    /// Max entrywise change of either matrix in the final step.
    pub residual: f64,
    pub trace: Vec<TraceEntry>,
    uniform_priors: bool,
}

impl CooperativeResult {
    /// Diagonal products `e⁽¹⁾, f⁽¹⁾, e⁽²⁾, …` in the order they were computed.
    pub fn diagonal_trace(&self) -> Vec<f64> {
        self.trace
            .iter()
            .filter_map(|e| e.log_diagonal.map(f64::exp))
            .collect()
    }

    pub fn log_diagonal_trace(&self) -> Vec<f64> {
        self.trace.iter().filter_map(|e| e.log_diagonal).collect()
    }

    /// Transmission Index of the final pair. Only meaningful with uniform priors.
    pub fn cooperative_index(&self) -> Result<f64> {
        if !self.uniform_priors {
            return Err(Error::NonUniformPriors);
        }
        transmission_index(&self.learner, &self.teacher)
    }

    /// CSV with header `step,side,residual,diagonal_product`.
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "step,side,residual,diagonal_product")?;
        for e in &self.trace {
            let product = e
                .log_diagonal
                .map(|v| v.exp().to_string())
                .unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{}",
                e.step,
                e.side.label(),
                e.residual,
                product
            )?;
        }
        Ok(())
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn near_doubly_stochastic(data: &[f64], cols: usize, tol: f64) -> bool {
    let mut col_sums = vec![0.0; cols];
    for row in data.chunks(cols) {
        if (row.iter().sum::<f64>() - 1.0).abs() > tol {
            return false;
        }
        col_sums.iter_mut().zip(row).for_each(|(c, v)| *c += v);
    }
    col_sums.iter().all(|c| (c - 1.0).abs() <= tol)
}

fn log_diagonal(data: &[f64], cols: usize, sigma: &Permutation) -> f64 {
    sigma
        .iter()
        .enumerate()
        .map(|(i, j)| data[i * cols + j].ln())
        .sum()
}

/// Alternate the learner and teacher steps until both stop moving.
///
/// The first step of each side is compared against `m` itself, so a matrix
/// that is already a fixed point converges after one step. Zero rows and
/// columns of `m` stay zero throughout.
///
/// For a square `m` with uniform priors and no zero line, convergence also
/// requires both iterates to be doubly stochastic within `10·tol`. Patterns
/// without total support move by `O(1/k²)` per step while still `O(1/k)`
/// from their limit, so a small step alone does not mean the limit is near.
pub fn cooperative_iterate(
    m: &NonnegativeMatrix,
    priors: &Priors,
    opts: &IterationOptions,
) -> Result<CooperativeResult> {
    let (rows, cols) = m.shape();
    if priors.concept.len() != cols || priors.dataset.len() != rows {
        return Err(Error::DimensionMismatch {
            expected: (rows, cols),
            found: (priors.dataset.len(), priors.concept.len()),
        });
    }
    if m.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    if opts.max_iter == 0 || opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidArgument(
            "max_iter must be positive and tol must be positive".into(),
        ));
    }
    if let Some(sigma) = &opts.reference_diagonal {
        check_square(m)?;
        if sigma.len() != rows {
            return Err(Error::InvalidArgument(format!(
                "reference diagonal has length {}, matrix has {rows} rows",
                sigma.len()
            )));
        }
        if let Some((i, j)) = sigma.iter().enumerate().find(|&(i, j)| m.get(i, j) <= 0.0) {
            return Err(Error::ZeroEntry { row: i, col: j });
        }
    }

    let uniform = priors.is_uniform();
    let check_doubly_stochastic = uniform
        && rows == cols
        && m.row_sums().iter().all(|&s| s > 0.0)
        && m.column_sums().iter().all(|&s| s > 0.0);
    let learner_step = |src: &[f64], dst: &mut Vec<f64>| {
        dst.copy_from_slice(src);
        if !uniform {
            for row in dst.chunks_mut(cols) {
                row.iter_mut()
                    .zip(&priors.concept)
                    .for_each(|(v, a)| *v *= a);
            }
        }
        row_normalize_in_place(dst, cols);
    };
    let teacher_step = |src: &[f64], dst: &mut Vec<f64>| {
        dst.copy_from_slice(src);
        if !uniform {
            for (row, b) in dst.chunks_mut(cols).zip(&priors.dataset) {
                row.iter_mut().for_each(|v| *v *= b);
            }
        }
        column_normalize_in_place(dst, cols);
    };

    let mut l = m.as_slice().to_vec();
    let mut t = m.as_slice().to_vec();
    let mut prev_l = l.clone();
    let mut prev_t = t.clone();
    let record = opts.record_trace || opts.reference_diagonal.is_some();
    let mut trace = Vec::new();
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for step in 1..=opts.max_iter {
        let order = match opts.start {
            Side::Learner => [Side::Learner, Side::Teacher],
            Side::Teacher => [Side::Teacher, Side::Learner],
        };
        let mut step_residual: f64 = 0.0;
        for side in order {
            let (current, previous) = match side {
                Side::Learner => {
                    learner_step(&t, &mut l);
                    (&l, &mut prev_l)
                }
                Side::Teacher => {
                    teacher_step(&l, &mut t);
                    (&t, &mut prev_t)
                }
            };
            let r = max_abs_diff(current, previous);
            previous.copy_from_slice(current);
            step_residual = step_residual.max(r);
            if record {
                trace.push(TraceEntry {
                    step,
                    side,
                    residual: r,
                    log_diagonal: opts
                        .reference_diagonal
                        .as_ref()
                        .map(|sigma| log_diagonal(current, cols, sigma)),
                });
            }
        }
        iterations = step;
        residual = step_residual;
        if residual <= opts.tol
            && (!check_doubly_stochastic
                || (near_doubly_stochastic(&l, cols, 10.0 * opts.tol)
                    && near_doubly_stochastic(&t, cols, 10.0 * opts.tol)))
        {
            converged = true;
            break;
        }
    }

    let index = m.index().cloned();
    Ok(CooperativeResult {
        learner: RowStochasticMatrix::new_unchecked(NonnegativeMatrix::from_parts_unchecked(
            rows,
            cols,
            l,
            index.clone(),
        )),
        teacher: ColumnStochasticMatrix::new_unchecked(NonnegativeMatrix::from_parts_unchecked(
            rows, cols, t, index,
        )),
        iterations,
        converged,
        residual,
        trace,
        uniform_priors: uniform,
    })
}

/// Zero every positive entry that lies on no positive diagonal.
///
/// Entries on some positive diagonal stay bounded away from zero under the
/// iteration while all others vanish, so the result has the support of the
/// Sinkhorn limit.
pub fn prune_to_diagonal_support(m: &NonnegativeMatrix) -> Result<NonnegativeMatrix> {
    if !has_positive_diagonal(m)? {
        return Err(Error::NoPositiveDiagonal);
    }
    let n = m.rows();
    let mut out = m.clone();
    for i in 0..n {
        for j in 0..n {
            if m.get(i, j) > 0.0 && !diagonal_support_entry(m, i, j)? {
                out = out.with_entry(i, j, 0.0);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CiMode {
    /// Iterate the raw matrix.
    Iterative,
    /// Prune to the diagonal support first; a permutation pattern gives exactly 1.
    #[default]
    Structural,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CiReport {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The pruned matrix (structural mode only).
    pub pruned: Option<NonnegativeMatrix>,
}

fn is_permutation_pattern(m: &NonnegativeMatrix) -> bool {
    (0..m.rows()).all(|i| m.row(i).iter().filter(|&&v| v > 0.0).count() == 1)
        && (0..m.cols()).all(|j| m.column(j).filter(|&v| v > 0.0).count() == 1)
}

pub fn cooperative_index_report(
    m: &NonnegativeMatrix,
    mode: CiMode,
    max_iter: usize,
    tol: f64,
) -> Result<CiReport> {
    if !has_positive_diagonal(m)? {
        return Err(Error::NoPositiveDiagonal);
    }
    let (target, pruned) = match mode {
        CiMode::Iterative => (m.clone(), None),
        CiMode::Structural => {
            let pruned = prune_to_diagonal_support(m)?;
            if is_permutation_pattern(&pruned) {
                return Ok(CiReport {
                    value: 1.0,
                    iterations: 0,
                    converged: true,
                    pruned: Some(pruned),
                });
            }
            (pruned.clone(), Some(pruned))
        }
    };
    let n = target.rows();
    let opts = IterationOptions {
        max_iter,
        tol,
        ..IterationOptions::default()
    };
    let result = cooperative_iterate(&target, &Priors::uniform(n, n), &opts)?;
    Ok(CiReport {
        value: result.cooperative_index()?,
        iterations: result.iterations,
        converged: result.converged,
        pruned,
    })
}

/// Transmission Index at the fixed point of the cooperative iteration, with
/// uniform priors.
pub fn cooperative_index(
    m: &NonnegativeMatrix,
    mode: CiMode,
    max_iter: usize,
    tol: f64,
) -> Result<f64> {
    Ok(cooperative_index_report(m, mode, max_iter, tol)?.value)
}
