use crate::model::StandardLp;
use crate::sparse::norm_inf;

use super::{complete_basis, simplex_solve, BasicSolution, SimplexError};

pub const CLASSIFY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverResult {
    pub solution: BasicSolution,
    /// Pivots spent by the cleanup simplex.
    pub cleanup_iterations: usize,
    /// Basis handed to the cleanup simplex.
    pub start_basis: Vec<usize>,
}

/// Turns an approximate primal-dual pair into an optimal basic solution.
///
/// Structural columns that are near zero or have a clearly positive reduced
/// cost are fixed nonbasic; rows with a positive dual keep their surplus
/// nonbasic. The remaining columns enter a basis greedily by decreasing
/// value, rank-checked, and the basis is padded with surplus columns
/// (inactive rows first). A warm-started simplex then finishes the job.
pub fn crossover(
    prob: &StandardLp,
    x_approx: &[f64],
    y_approx: &[f64],
    classify_tol: f64,
) -> Result<CrossoverResult, SimplexError> {
    let (n, m) = (prob.num_vars(), prob.num_rows());
    let x: Vec<f64> = x_approx.iter().map(|v| v.max(0.0)).collect();
    let y: Vec<f64> = y_approx.iter().map(|v| v.max(0.0)).collect();
    let aty = prob.a.spmv_transpose(&y).expect("y has one entry per row");

    let x_floor = classify_tol * (1.0 + norm_inf(&x));
    let rc_floor = classify_tol * (1.0 + norm_inf(&prob.c));
    let mut candidates: Vec<usize> = (0..n)
        .filter(|&j| x[j] > x_floor && prob.c[j] - aty[j] <= rc_floor)
        .collect();
    // Stable sort: ties keep increasing column order.
    candidates.sort_by(|&a, &b| x[b].total_cmp(&x[a]));

    let active = |i: usize| y[i] > classify_tol;
    let slack_rows: Vec<usize> = (0..m)
        .filter(|&i| !active(i))
        .chain((0..m).filter(|&i| active(i)))
        .collect();

    let start_basis = complete_basis(prob, candidates, slack_rows);
    let solution = simplex_solve(prob, Some(&start_basis))?;
    Ok(CrossoverResult {
        cleanup_iterations: solution.iterations,
        solution,
        start_basis,
    })
}
