//! Compressed sparse row matrices and the three kernels every solver stage
//! leans on: `A x`, `Aᵀ y` and a power-iteration estimate of `‖A‖₂`.
//!
//! All kernels accumulate in a fixed order so results are bit-reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SparseError {
    #[error("entry #{index} at ({row}, {col}) is outside a {nrows}x{ncols} matrix")]
    IndexOutOfRange {
        index: usize,
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },
    #[error("entry #{index} at ({row}, {col}) is not finite")]
    NonFinite { index: usize, row: usize, col: usize },
    #[error("dimension mismatch: expected vector of length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

/// Row-major compressed sparse matrix.
///
/// Column indices are strictly increasing inside each row and no explicit
/// zeros are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_starts: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

/// Default power iteration budget for [`CsrMatrix::spectral_norm_estimate`].
pub const POWER_ITERS: usize = 200;
pub const POWER_TOL: f64 = 1e-6;

impl CsrMatrix {
    /// An `nrows x ncols` matrix with no stored entries.
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            row_starts: vec![0; nrows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed and entries that cancel to zero are dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        entries: &[(usize, usize, f64)],
    ) -> Result<Self, SparseError> {
        for (index, &(row, col, value)) in entries.iter().enumerate() {
            if row >= nrows || col >= ncols {
                return Err(SparseError::IndexOutOfRange {
                    index,
                    row,
                    col,
                    nrows,
                    ncols,
                });
            }
            if !value.is_finite() {
                return Err(SparseError::NonFinite { index, row, col });
            }
        }
        // Stable sort keeps the summation order of duplicates equal to input order.
        let mut order: Vec<usize> = (0..entries.len()).collect();
        order.sort_by_key(|&k| (entries[k].0, entries[k].1));

        let mut row_starts = vec![0usize; nrows + 1];
        let mut col_indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut k = 0;
        while k < order.len() {
            let (row, col, _) = entries[order[k]];
            let mut sum = 0.0;
            while k < order.len() && entries[order[k]].0 == row && entries[order[k]].1 == col {
                sum += entries[order[k]].2;
                k += 1;
            }
            if sum != 0.0 {
                col_indices.push(col);
                values.push(sum);
                row_starts[row + 1] += 1;
            }
        }
        for i in 0..nrows {
            row_starts[i + 1] += row_starts[i];
        }
        Ok(CsrMatrix {
            nrows,
            ncols,
            row_starts,
            col_indices,
            values,
        })
    }

    /// Builds a matrix from sparse rows given as `(col, value)` lists.
    pub fn from_rows(ncols: usize, rows: &[Vec<(usize, f64)>]) -> Result<Self, SparseError> {
        let triplets: Vec<(usize, usize, f64)> = rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, v)| (i, j, v)))
            .collect();
        Self::from_triplets(rows.len(), ncols, &triplets)
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let ncols = rows.first().map_or(0, |r| r.len());
        let triplets: Vec<(usize, usize, f64)> = rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &v)| (i, j, v)))
            .filter(|t| t.2 != 0.0)
            .collect();
        Self::from_triplets(rows.len(), ncols, &triplets).expect("dense input is in range")
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

    pub fn row_starts(&self) -> &[usize] {
        &self.row_starts
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_starts[i]..self.row_starts[i + 1];
        (&self.col_indices[range.clone()], &self.values[range])
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in dense.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        dense
    }

    /// Dense copy of column `j`.
    pub fn column_dense(&self, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows];
        for (i, slot) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            if let Ok(pos) = cols.binary_search(&j) {
                *slot = vals[pos];
            }
        }
        out
    }

    /// Sparse columns as `(row, value)` lists, built in a single pass.
    pub fn columns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.ncols];
        for i in 0..self.nrows {
            let (idx, vals) = self.row(i);
            for (&j, &v) in idx.iter().zip(vals) {
                cols[j].push((i, v));
            }
        }
        cols
    }

    /// Explicit transpose.
    pub fn transpose(&self) -> CsrMatrix {
        let triplets: Vec<(usize, usize, f64)> = (0..self.nrows)
            .flat_map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(move |(&j, &v)| (j, i, v))
            })
            .collect();
        CsrMatrix::from_triplets(self.ncols, self.nrows, &triplets).expect("transpose in range")
    }

    /// Returns `D_r A D_c` for positive diagonal scalings.
    pub fn scaled(&self, row_scale: &[f64], col_scale: &[f64]) -> CsrMatrix {
        let mut out = self.clone();
        for i in 0..self.nrows {
            for k in self.row_starts[i]..self.row_starts[i + 1] {
                out.values[k] *= row_scale[i] * col_scale[self.col_indices[k]];
            }
        }
        out
    }

    /// Keeps the listed rows and columns, renumbering both in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> CsrMatrix {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (new, &old) in cols.iter().enumerate() {
            col_map[old] = new;
        }
        let mut triplets = Vec::new();
        for (new_i, &i) in rows.iter().enumerate() {
            let (idx, vals) = self.row(i);
            for (&j, &v) in idx.iter().zip(vals) {
                if col_map[j] != usize::MAX {
                    triplets.push((new_i, col_map[j], v));
                }
            }
        }
        CsrMatrix::from_triplets(rows.len(), cols.len(), &triplets).expect("selection in range")
    }

    /// `y = A x`.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>, SparseError> {
        let mut out = vec![0.0; self.nrows];
        self.spmv_into(x, &mut out)?;
        Ok(out)
    }

    pub fn spmv_into(&self, x: &[f64], out: &mut [f64]) -> Result<(), SparseError> {
        check_len(self.ncols, x.len())?;
        check_len(self.nrows, out.len())?;
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_starts[i]..self.row_starts[i + 1] {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            *slot = acc;
        }
        Ok(())
    }

    /// `x = Aᵀ y` without forming the transpose: rows are scattered into the
    /// output in increasing row order.
    pub fn spmv_transpose(&self, y: &[f64]) -> Result<Vec<f64>, SparseError> {
        let mut out = vec![0.0; self.ncols];
        self.spmv_transpose_into(y, &mut out)?;
        Ok(out)
    }

    pub fn spmv_transpose_into(&self, y: &[f64], out: &mut [f64]) -> Result<(), SparseError> {
        check_len(self.nrows, y.len())?;
        check_len(self.ncols, out.len())?;
        out.iter_mut().for_each(|v| *v = 0.0);
        for (i, &yi) in y.iter().enumerate() {
            for k in self.row_starts[i]..self.row_starts[i + 1] {
                out[self.col_indices[k]] += self.values[k] * yi;
            }
        }
        Ok(())
    }

    /// Power iteration on `AᵀA` from a seeded random start.
    ///
    /// Stops once the relative change of the estimate drops below `tol` or
    /// after `max_iters` iterations. An all-zero matrix yields 0.
    pub fn spectral_norm_estimate(&self, max_iters: usize, tol: f64, seed: u64) -> f64 {
        if self.nnz() == 0 || self.ncols == 0 {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<f64> = (0..self.ncols).map(|_| rng.gen_range(-1.0..1.0)).collect();
        normalize(&mut v);
        let mut av = vec![0.0; self.nrows];
        let mut w = vec![0.0; self.ncols];
        // Iterates on λ = ‖A‖²; the square root is taken once at the end.
        let mut estimate = 0.0;
        for _ in 0..max_iters.max(1) {
            self.spmv_into(&v, &mut av).expect("sized");
            self.spmv_transpose_into(&av, &mut w).expect("sized");
            // Rayleigh quotient of AᵀA at a unit vector.
            let next: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>().max(0.0);
            let norm_w = norm2(&w);
            if norm_w == 0.0 {
                // v landed in the null space; restart on a fresh random direction.
                v = (0..self.ncols).map(|_| rng.gen_range(-1.0..1.0)).collect();
                normalize(&mut v);
                continue;
            }
            let converged = (next - estimate).abs() <= tol * next.max(f64::MIN_POSITIVE);
            estimate = next;
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / norm_w;
            }
            if converged {
                break;
            }
        }
        estimate.sqrt()
    }

    /// [`Self::spectral_norm_estimate`] with the default budget and seed 0.
    pub fn spectral_norm(&self) -> f64 {
        self.spectral_norm_estimate(POWER_ITERS, POWER_TOL, 0)
    }
}

fn check_len(expected: usize, actual: usize) -> Result<(), SparseError> {
    if expected == actual {
        Ok(())
    } else {
        Err(SparseError::DimensionMismatch { expected, actual })
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = norm2(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}
