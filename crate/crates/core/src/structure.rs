//! Zero-pattern analysis of square nonnegative matrices.
//!
//! A positive diagonal of an `n × n` matrix is a permutation `σ` with
//! `M(i, σ(i)) > 0` for every row, i.e. a perfect matching in the bipartite
//! graph whose edges are the positive entries. This module decides whether
//! one exists, counts them (the permanent of the 0/1 pattern), decides
//! whether there is exactly one, and when there is, produces row and column
//! permutations that bring the matrix to upper-triangular form.

use crate::error::{Error, Result};
use crate::matrix::{check_square, joint_permute, NonnegativeMatrix, Permutation};

/// Default dimension cap for [`count_positive_diagonals`].
pub const DEFAULT_PERMANENT_CAP: usize = 20;

/// Support pattern of a square matrix: `cols_of[i]` lists the columns with a
/// positive entry in row `i`.
#[derive(Clone, Debug)]
struct Pattern {
    n: usize,
    cols_of: Vec<Vec<usize>>,
}

impl Pattern {
    fn of(m: &NonnegativeMatrix) -> Result<Self> {
        let n = check_square(m)?;
        let cols_of = (0..n)
            .map(|i| {
                m.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v > 0.0)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        Ok(Self { n, cols_of })
    }

    /// Kuhn's augmenting-path matching restricted to the live rows and columns.
    fn has_perfect_matching(&self, row_live: &[bool], col_live: &[bool]) -> bool {
        let rows: Vec<usize> = (0..self.n).filter(|&i| row_live[i]).collect();
        let live_cols = col_live.iter().filter(|&&c| c).count();
        if rows.len() != live_cols {
            return false;
        }
        let mut match_of_col: Vec<Option<usize>> = vec![None; self.n];
        for &r in &rows {
            let mut visited = vec![false; self.n];
            if !self.augment(r, col_live, &mut visited, &mut match_of_col) {
                return false;
            }
        }
        true
    }

    fn augment(
        &self,
        row: usize,
        col_live: &[bool],
        visited: &mut [bool],
        match_of_col: &mut [Option<usize>],
    ) -> bool {
        for &c in &self.cols_of[row] {
            if !col_live[c] || visited[c] {
                continue;
            }
            visited[c] = true;
            let free = match match_of_col[c] {
                None => true,
                Some(other) => self.augment(other, col_live, visited, match_of_col),
            };
            if free {
                match_of_col[c] = Some(row);
                return true;
            }
        }
        false
    }
}

/// True iff the square matrix has at least one positive diagonal.
pub fn has_positive_diagonal(m: &NonnegativeMatrix) -> Result<bool> {
    let p = Pattern::of(m)?;
    let live = vec![true; p.n];
    Ok(p.has_perfect_matching(&live, &live))
}

/// True iff some positive diagonal passes through the positive entry `(i, j)`.
///
/// Decided by deleting row `i` and column `j` and testing the remainder for a
/// positive diagonal.
pub fn diagonal_support_entry(m: &NonnegativeMatrix, i: usize, j: usize) -> Result<bool> {
    let p = Pattern::of(m)?;
    for index in [i, j] {
        if index >= p.n {
            return Err(Error::IndexOutOfRange { index, len: p.n });
        }
    }
    if m.get(i, j) <= 0.0 {
        return Err(Error::ZeroEntry { row: i, col: j });
    }
    let mut row_live = vec![true; p.n];
    let mut col_live = vec![true; p.n];
    row_live[i] = false;
    col_live[j] = false;
    Ok(p.has_perfect_matching(&row_live, &col_live))
}

/// Number of positive diagonals, i.e. the permanent of the 0/1 support
/// pattern, by Ryser's inclusion–exclusion formula over column subsets in
/// Gray-code order. Fails for `n` above `cap`.
pub fn count_positive_diagonals_with_cap(m: &NonnegativeMatrix, cap: usize) -> Result<u64> {
    let p = Pattern::of(m)?;
    let n = p.n;
    if n > cap || n >= 63 {
        return Err(Error::Intractable { n, cap });
    }
    // perm(A) = (-1)^n Σ_{S ⊆ cols} (-1)^{|S|} Π_i Σ_{j ∈ S} a_ij
    let mut in_row = vec![vec![0i64; n]; n];
    for (i, cols) in p.cols_of.iter().enumerate() {
        for &j in cols {
            in_row[j][i] = 1;
        }
    }
    let mut row_sums = vec![0i64; n];
    let mut total: i128 = 0;
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let next = k ^ (k >> 1);
        let flipped = (gray ^ next).trailing_zeros() as usize;
        let sign_in = if next & (1 << flipped) != 0 { 1 } else { -1 };
        for (s, a) in row_sums.iter_mut().zip(&in_row[flipped]) {
            *s += sign_in * a;
        }
        gray = next;
        let product: i128 = row_sums.iter().map(|&s| s as i128).product();
        if product != 0 {
            if (n - next.count_ones() as usize).is_multiple_of(2) {
                total += product;
            } else {
                total -= product;
            }
        }
    }
    u64::try_from(total).map_err(|_| Error::Intractable { n, cap })
}

/// [`count_positive_diagonals_with_cap`] with the default cap of 20.
pub fn count_positive_diagonals(m: &NonnegativeMatrix) -> Result<u64> {
    count_positive_diagonals_with_cap(m, DEFAULT_PERMANENT_CAP)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Line {
    Row,
    Column,
}

/// An entry forced onto every positive diagonal: at the time it was removed,
/// it was the only positive entry left in its row (or column).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PeeledEntry {
    pub row: usize,
    pub col: usize,
    pub singleton: Line,
}

/// Result of repeatedly removing singleton rows and columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Peeling {
    /// Everything was consumed; the peeled entries form the unique positive diagonal.
    Complete(Vec<PeeledEntry>),
    /// Some remaining row or column has no positive entry: no positive diagonal.
    Blocked(Vec<PeeledEntry>),
    /// Every remaining row and column holds at least two positive entries, so
    /// the matrix has either no positive diagonal or at least two.
    Stalled {
        peeled: Vec<PeeledEntry>,
        residual_has_diagonal: bool,
    },
}

impl Peeling {
    pub fn is_complete(&self) -> bool {
        matches!(self, Peeling::Complete(_))
    }
}

/// Peel singleton lines off the support pattern, rows before columns and
/// lowest index first.
pub fn peel(m: &NonnegativeMatrix) -> Result<Peeling> {
    let p = Pattern::of(m)?;
    let n = p.n;
    let mut rows_of = vec![Vec::new(); n];
    for (i, cols) in p.cols_of.iter().enumerate() {
        for &j in cols {
            rows_of[j].push(i);
        }
    }
    let mut row_live = vec![true; n];
    let mut col_live = vec![true; n];
    let mut row_deg: Vec<usize> = p.cols_of.iter().map(Vec::len).collect();
    let mut col_deg: Vec<usize> = rows_of.iter().map(Vec::len).collect();
    let mut peeled = Vec::with_capacity(n);

    let remove = |i: usize,
                  j: usize,
                  row_live: &mut [bool],
                  col_live: &mut [bool],
                  row_deg: &mut [usize],
                  col_deg: &mut [usize]| {
        row_live[i] = false;
        col_live[j] = false;
        for &c in &p.cols_of[i] {
            if col_live[c] {
                col_deg[c] -= 1;
            }
        }
        for &r in &rows_of[j] {
            if row_live[r] {
                row_deg[r] -= 1;
            }
        }
    };

    while peeled.len() < n {
        let live_row = |i: &usize| row_live[*i];
        let live_col = |j: &usize| col_live[*j];
        if (0..n).filter(live_row).any(|i| row_deg[i] == 0)
            || (0..n).filter(live_col).any(|j| col_deg[j] == 0)
        {
            return Ok(Peeling::Blocked(peeled));
        }
        let entry = if let Some(i) = (0..n).filter(live_row).find(|&i| row_deg[i] == 1) {
            let j = p.cols_of[i].iter().copied().find(|&c| col_live[c]);
            j.map(|j| PeeledEntry {
                row: i,
                col: j,
                singleton: Line::Row,
            })
        } else if let Some(j) = (0..n).filter(live_col).find(|&j| col_deg[j] == 1) {
            let i = rows_of[j].iter().copied().find(|&r| row_live[r]);
            i.map(|i| PeeledEntry {
                row: i,
                col: j,
                singleton: Line::Column,
            })
        } else {
            None
        };
        match entry {
            Some(e) => {
                remove(
                    e.row,
                    e.col,
                    &mut row_live,
                    &mut col_live,
                    &mut row_deg,
                    &mut col_deg,
                );
                peeled.push(e);
            }
            None => {
                let residual_has_diagonal = p.has_perfect_matching(&row_live, &col_live);
                return Ok(Peeling::Stalled {
                    peeled,
                    residual_has_diagonal,
                });
            }
        }
    }
    Ok(Peeling::Complete(peeled))
}

/// True iff the matrix has exactly one positive diagonal, decided by peeling
/// rather than by computing the permanent.
pub fn has_exactly_one_positive_diagonal(m: &NonnegativeMatrix) -> Result<bool> {
    Ok(peel(m)?.is_complete())
}

/// Row and column permutations that bring a matrix to upper-triangular form
/// with a positive main diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangularizationWitness {
    pub row_perm: Permutation,
    pub col_perm: Permutation,
}

impl TriangularizationWitness {
    pub fn apply(&self, m: &NonnegativeMatrix) -> Result<NonnegativeMatrix> {
        joint_permute(m, &self.row_perm, &self.col_perm)
    }
}

/// True iff `m` is square with a positive main diagonal and zeros strictly
/// below it.
pub fn is_upper_triangular(m: &NonnegativeMatrix) -> bool {
    m.is_square() && (0..m.rows()).all(|i| m.get(i, i) > 0.0 && (0..i).all(|j| m.get(i, j) == 0.0))
}

/// Witness permutations for a matrix with exactly one positive diagonal, or
/// `None` when the diagonal count is not one.
///
/// Row singletons are placed from the last position backwards and column
/// singletons from the first position forwards. A row peeled as a singleton
/// only meets columns peeled before it as row singletons, which sit further
/// back, so all of its mass lands on or above the diagonal; the column case
/// is symmetric.
pub fn triangularize(m: &NonnegativeMatrix) -> Result<Option<TriangularizationWitness>> {
    let peeled = match peel(m)? {
        Peeling::Complete(peeled) => peeled,
        _ => return Ok(None),
    };
    let n = m.rows();
    let mut rows = vec![0; n];
    let mut cols = vec![0; n];
    let (mut front, mut back) = (0, n);
    for e in peeled {
        let pos = match e.singleton {
            Line::Row => {
                back -= 1;
                back
            }
            Line::Column => {
                front += 1;
                front - 1
            }
        };
        rows[pos] = e.row;
        cols[pos] = e.col;
    }
    Ok(Some(TriangularizationWitness {
        row_perm: Permutation::new(rows)?,
        col_perm: Permutation::new(cols)?,
    }))
}
