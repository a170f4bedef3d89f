use std::collections::HashMap;

use thiserror::Error;

use super::{RowOrigin, StandardLp, Transform};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PresolveError {
    /// An empty row `0 ≥ b` with `b > 0`.
    #[error("row {row} ({origin:?}) reads 0 >= {rhs}: infeasible")]
    Infeasible {
        row: usize,
        origin: RowOrigin,
        rhs: f64,
    },
}

/// Minimal presolve. Four reductions only:
/// empty rows with `b ≤ 0` are dropped, empty rows with `b > 0` prove
/// infeasibility, empty zero-cost columns are fixed at 0, and duplicate rows
/// collapse onto their first occurrence carrying the largest `b`.
///
/// The result's shape depends only on the sparsity pattern and values of `A`
/// and `c`, never on `b`.
pub fn presolve(p: &StandardLp) -> Result<StandardLp, PresolveError> {
    let (m, n) = (p.num_rows(), p.num_vars());

    let mut col_used = vec![false; n];
    for &j in p.a.col_indices() {
        col_used[j] = true;
    }
    let kept_cols: Vec<usize> = (0..n).filter(|&j| col_used[j] || p.c[j] != 0.0).collect();

    let mut kept_rows = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    let mut first_of: HashMap<Vec<(usize, u64)>, usize> = HashMap::new();
    for i in 0..m {
        let (idx, vals) = p.a.row(i);
        if idx.is_empty() {
            if p.b[i] > 0.0 {
                return Err(PresolveError::Infeasible {
                    row: i,
                    origin: p.log.row_origin[i],
                    rhs: p.b[i],
                });
            }
            continue;
        }
        let key: Vec<(usize, u64)> = idx.iter().zip(vals).map(|(&j, v)| (j, v.to_bits())).collect();
        match first_of.get(&key) {
            Some(&k) => b[k] = f64::max(b[k], p.b[i]),
            None => {
                first_of.insert(key, kept_rows.len());
                kept_rows.push(i);
                b.push(p.b[i]);
            }
        }
    }

    let mut log = p.log.clone();
    if kept_cols.len() < n {
        log.steps.push(Transform::DropColumns {
            kept: kept_cols.clone(),
            ncols_before: n,
        });
    }
    if kept_rows.len() < m {
        log.row_origin = kept_rows.iter().map(|&i| p.log.row_origin[i]).collect();
        log.steps.push(Transform::DropRows {
            kept: kept_rows.clone(),
            nrows_before: m,
        });
    }
    Ok(StandardLp {
        c: kept_cols.iter().map(|&j| p.c[j]).collect(),
        a: p.a.select(&kept_rows, &kept_cols),
        b,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::postsolve;
    use crate::sparse::CsrMatrix;

    #[test]
    fn satisfied_empty_row_is_removed() {
        let a = CsrMatrix::from_triplets(2, 1, &[(1, 0, 1.0)]).unwrap();
        let p = StandardLp::new(vec![1.0], a, vec![-1.0, 2.0]).unwrap();
        let q = presolve(&p).unwrap();
        assert_eq!(q.num_rows(), 1);
        assert_eq!(q.b, vec![2.0]);
    }

    #[test]
    fn violated_empty_row_is_infeasible() {
        let a = CsrMatrix::zeros(1, 1);
        let p = StandardLp::new(vec![1.0], a, vec![1.0]).unwrap();
        assert!(matches!(
            presolve(&p),
            Err(PresolveError::Infeasible { row: 0, rhs, .. }) if rhs == 1.0
        ));
    }

    #[test]
    fn duplicate_rows_collapse() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        let p = StandardLp::new(vec![1.0, 1.0], a, vec![1.0, 1.0, 0.5]).unwrap();
        let q = presolve(&p).unwrap();
        assert_eq!(q.num_rows(), 2);
        let a = CsrMatrix::from_dense(&[vec![1.0], vec![1.0]]);
        let p = StandardLp::new(vec![1.0], a, vec![1.0, 3.0]).unwrap();
        let q = presolve(&p).unwrap();
        assert_eq!(q.b, vec![3.0]);
    }

    #[test]
    fn free_empty_column_is_fixed_at_zero() {
        let a = CsrMatrix::from_triplets(1, 3, &[(0, 1, 1.0)]).unwrap();
        let p = StandardLp::new(vec![0.0, 1.0, 2.0], a, vec![1.0]).unwrap();
        let q = presolve(&p).unwrap();
        // column 0 dropped; column 2 has a cost and stays.
        assert_eq!(q.num_vars(), 2);
        let (x, obj) = postsolve(&q, &[1.0, 0.0]).unwrap();
        assert_eq!(x, vec![0.0, 1.0, 0.0]);
        assert_eq!(obj, 1.0);
    }
}
