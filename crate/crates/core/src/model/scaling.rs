use crate::sparse::CsrMatrix;

use super::{StandardLp, Transform};

/// Default number of equilibration passes.
pub const RUIZ_PASSES: usize = 10;

/// Row and column divisors of an equilibrated problem:
/// `A' = diag(row_scale)⁻¹ · A · diag(col_scale)⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingDiagonals {
    pub row_scale: Vec<f64>,
    pub col_scale: Vec<f64>,
}

impl ScalingDiagonals {
    pub fn unit(nrows: usize, ncols: usize) -> Self {
        ScalingDiagonals {
            row_scale: vec![1.0; nrows],
            col_scale: vec![1.0; ncols],
        }
    }

    /// Original primal point from a scaled one.
    pub fn unscale_primal(&self, x_scaled: &[f64]) -> Vec<f64> {
        x_scaled
            .iter()
            .zip(&self.col_scale)
            .map(|(x, d)| x / d)
            .collect()
    }

    /// Original dual point from a scaled one.
    pub fn unscale_dual(&self, y_scaled: &[f64]) -> Vec<f64> {
        y_scaled
            .iter()
            .zip(&self.row_scale)
            .map(|(y, r)| y / r)
            .collect()
    }

    pub fn scale_primal(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.col_scale).map(|(x, d)| x * d).collect()
    }

    pub fn scale_dual(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.row_scale).map(|(y, r)| y * r).collect()
    }
}

/// Ruiz equilibration: each pass divides every row and every column by the
/// square root of its current largest magnitude. Empty rows/columns keep
/// factor 1. The returned problem records the scaling in its log.
pub fn ruiz_scale(p: &StandardLp, iterations: usize) -> (StandardLp, ScalingDiagonals) {
    let (m, n) = (p.num_rows(), p.num_vars());
    let mut diag = ScalingDiagonals::unit(m, n);
    if iterations == 0 {
        return (p.clone(), diag);
    }
    let mut a = p.a.clone();
    for _ in 0..iterations {
        let (row_max, col_max) = max_magnitudes(&a);
        let row_factor: Vec<f64> = row_max.iter().map(|&v| factor(v)).collect();
        let col_factor: Vec<f64> = col_max.iter().map(|&v| factor(v)).collect();
        let inv_r: Vec<f64> = row_factor.iter().map(|f| 1.0 / f).collect();
        let inv_c: Vec<f64> = col_factor.iter().map(|f| 1.0 / f).collect();
        a = a.scaled(&inv_r, &inv_c);
        for (s, f) in diag.row_scale.iter_mut().zip(&row_factor) {
            *s *= f;
        }
        for (s, f) in diag.col_scale.iter_mut().zip(&col_factor) {
            *s *= f;
        }
    }
    let c = p
        .c
        .iter()
        .zip(&diag.col_scale)
        .map(|(c, d)| c / d)
        .collect();
    let b = p
        .b
        .iter()
        .zip(&diag.row_scale)
        .map(|(b, r)| b / r)
        .collect();
    let mut log = p.log.clone();
    log.steps.push(Transform::Scale(diag.clone()));
    (StandardLp { c, a, b, log }, diag)
}

fn factor(max_abs: f64) -> f64 {
    if max_abs > 0.0 {
        max_abs.sqrt()
    } else {
        1.0
    }
}

/// Largest absolute entry per row and per column.
pub(crate) fn max_magnitudes(a: &CsrMatrix) -> (Vec<f64>, Vec<f64>) {
    let mut rows = vec![0.0f64; a.nrows()];
    let mut cols = vec![0.0f64; a.ncols()];
    for (i, r) in rows.iter_mut().enumerate() {
        let (idx, vals) = a.row(i);
        for (&j, &v) in idx.iter().zip(vals) {
            *r = r.max(v.abs());
            cols[j] = cols[j].max(v.abs());
        }
    }
    (rows, cols)
}
