//! Sparse storage and direct linear solves.

use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use thiserror::Error;

/// Relative residual every successful solve must reach:
/// `‖b − A·x‖₂ / max(‖b‖₂, 1)`.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-10;

const MAX_REFINEMENT_STEPS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("entry ({row}, {col}) outside a {nrows}x{ncols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix must be square, got {nrows}x{ncols}")]
    NotSquare { nrows: usize, ncols: usize },
    #[error("LU factorization failed: {0}")]
    Factorization(String),
    #[error("linear solve residual {residual:e} above tolerance {SOLVE_RESIDUAL_TOL:e}")]
    ResidualTooLarge { residual: f64 },
}

/// Unordered `(row, col, value)` contributions; duplicates are summed on
/// compression.
#[derive(Debug, Clone, Default)]
pub struct TripletBuffer {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuffer {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, capacity: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::with_capacity(capacity),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        self.entries.push((row, col, value));
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn extend(&mut self, other: &TripletBuffer) {
        self.entries.extend_from_slice(&other.entries);
    }

    pub fn compress(&self) -> Result<SparseMatrix, LinalgError> {
        let (nrows, ncols) = (self.nrows, self.ncols);
        if let Some(&(row, col, _)) = self
            .entries
            .iter()
            .find(|&&(r, c, _)| r >= nrows || c >= ncols)
        {
            return Err(LinalgError::IndexOutOfRange {
                row,
                col,
                nrows,
                ncols,
            });
        }
        let mut sorted = self.entries.clone();
        // Values are sorted within a key too, so the summation order (and the
        // rounded result) does not depend on the input order.
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));

        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }
}

/// Compressed sparse row matrix with sorted, unique column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if x.len() != self.ncols {
            return Err(LinalgError::DimensionMismatch {
                expected: self.ncols,
                found: x.len(),
            });
        }
        Ok((0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect())
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|i| self.row(i).all(|(j, v)| (v - self.get(j, i)).abs() <= tol))
    }

    /// Rows `rows` and columns `cols` as a standalone matrix.
    pub fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> SparseMatrix {
        let mut buf = TripletBuffer::new(rows.len(), cols.len());
        for i in rows.clone() {
            for (j, v) in self.row(i) {
                if cols.contains(&j) {
                    buf.push(i - rows.start, j - cols.start, v);
                }
            }
        }
        buf.compress().expect("block indices are in range")
    }

    /// Rebuilds the matrix keeping only entries accepted by `keep`.
    pub fn filter(&self, mut keep: impl FnMut(usize, usize, f64) -> bool) -> SparseMatrix {
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                if keep(i, j, v) {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr[i + 1] = col_idx.len();
        }
        SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        out
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>, LinalgError> {
        let triplets: Vec<Triplet<usize, usize, f64>> = (0..self.nrows)
            .flat_map(|i| self.row(i).map(move |(j, v)| Triplet::new(i, j, v)))
            .collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &triplets)
            .map_err(|e| LinalgError::Factorization(format!("{e:?}")))
    }
}

/// Euclidean and maximum norms.
pub fn norms(v: &[f64]) -> (f64, f64) {
    let l2 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let linf = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    (l2, linf)
}

pub fn norm_l2(v: &[f64]) -> f64 {
    norms(v).0
}

fn relative_residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> (Vec<f64>, f64) {
    let ax = a.mul_vec(x).expect("dimensions checked by caller");
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let rel = norm_l2(&r) / norm_l2(b).max(1.0);
    (r, rel)
}

/// Solves `A·x = b` by sparse LU with partial pivoting followed by a few
/// steps of iterative refinement.
pub fn solve_linear(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if a.nrows != a.ncols {
        return Err(LinalgError::NotSquare {
            nrows: a.nrows,
            ncols: a.ncols,
        });
    }
    if b.len() != a.nrows {
        return Err(LinalgError::DimensionMismatch {
            expected: a.nrows,
            found: b.len(),
        });
    }
    let n = a.nrows;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mat = a.to_faer()?;
    let lu = mat
        .sp_lu()
        .map_err(|e| LinalgError::Factorization(format!("{e:?}")))?;
    let solve = |rhs: &[f64]| -> Vec<f64> {
        let col = faer::Col::<f64>::from_fn(n, |i| rhs[i]);
        let sol = lu.solve(&col);
        (0..n).map(|i| sol[i]).collect()
    };

    let mut x = solve(b);
    let (mut r, mut rel) = relative_residual(a, &x, b);
    for _ in 0..MAX_REFINEMENT_STEPS {
        if !rel.is_finite() || rel <= SOLVE_RESIDUAL_TOL * 1e-3 {
            break;
        }
        let dx = solve(&r);
        let candidate: Vec<f64> = x.iter().zip(&dx).map(|(xi, di)| xi + di).collect();
        let (r_new, rel_new) = relative_residual(a, &candidate, b);
        if rel_new.is_nan() || rel_new >= rel {
            break;
        }
        x = candidate;
        r = r_new;
        rel = rel_new;
    }
    if !rel.is_finite() || rel > SOLVE_RESIDUAL_TOL {
        return Err(LinalgError::ResidualTooLarge { residual: rel });
    }
    Ok(x)
}
