//! Reference primal simplex on the surplus-augmented standard form
//! `A x − s = b, x ≥ 0, s ≥ 0`, and crossover from approximate
//! primal-dual points to basic solutions.
//!
//! Columns `0..n` are structural, `n..n+m` are surplus variables with
//! column `−e_i`. Phase 1 minimizes the sum of infeasibilities of the
//! current basic solution, so any nonsingular starting basis works.

mod crossover;
mod lu;

pub use crossover::{crossover, CrossoverResult, CLASSIFY_TOL};
pub use lu::{BasisFactor, DenseLu, Singular};

use log::debug;
use thiserror::Error;

use crate::model::StandardLp;
use crate::sparse::dot;

pub const REFACTOR_PERIOD: usize = 50;
const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimplexError {
    #[error("basis became numerically singular at pivot step {step} (elimination step {column})")]
    Singular { step: usize, column: usize },
    #[error("starting basis has {actual} entries, expected {expected}")]
    BasisSize { expected: usize, actual: usize },
    #[error("basis column {0} out of range")]
    BasisIndex(usize),
    #[error("no convergence after {0} pivots")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimplexStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// A vertex of `{x ≥ 0 : Ax ≥ b}` with its basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BasicSolution {
    pub status: SimplexStatus,
    /// Structural values (length n).
    pub x: Vec<f64>,
    /// Surplus values `Ax − b` (length m).
    pub surplus: Vec<f64>,
    /// Duals `c_Bᵀ B⁻¹` (length m).
    pub y: Vec<f64>,
    /// Column indices in the augmented space, one per row.
    pub basis: Vec<usize>,
    pub objective: f64,
    pub iterations: usize,
}

/// Column `j` of `[A, −I]` as a sparse list.
struct Columns {
    n: usize,
    structural: Vec<Vec<(usize, f64)>>,
}

impl Columns {
    fn new(p: &StandardLp) -> Self {
        Columns {
            n: p.num_vars(),
            structural: p.a.columns(),
        }
    }

    fn dense(&self, j: usize, m: usize) -> Vec<f64> {
        let mut v = vec![0.0; m];
        if j < self.n {
            for &(i, a) in &self.structural[j] {
                v[i] = a;
            }
        } else {
            v[j - self.n] = -1.0;
        }
        v
    }

    fn dot(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            self.structural[j].iter().map(|&(i, a)| a * y[i]).sum()
        } else {
            -y[j - self.n]
        }
    }
}

/// Solves `prob` from the all-surplus basis or from `start_basis`.
///
/// A singular starting basis is repaired by dropping dependent columns and
/// padding with surplus columns.
pub fn simplex_solve(
    prob: &StandardLp,
    start_basis: Option<&[usize]>,
) -> Result<BasicSolution, SimplexError> {
    let (n, m) = (prob.num_vars(), prob.num_rows());
    let cols = Columns::new(prob);
    let basis = match start_basis {
        None => (n..n + m).collect(),
        Some(b) => {
            if b.len() != m {
                return Err(SimplexError::BasisSize {
                    expected: m,
                    actual: b.len(),
                });
            }
            if let Some(&bad) = b.iter().find(|&&j| j >= n + m) {
                return Err(SimplexError::BasisIndex(bad));
            }
            let dense: Vec<Vec<f64>> = b.iter().map(|&j| cols.dense(j, m)).collect();
            let mut unique = b.to_vec();
            unique.sort_unstable();
            unique.dedup();
            if unique.len() == m && DenseLu::factor(&dense).is_ok() {
                b.to_vec()
            } else {
                complete_basis(prob, b.iter().copied(), (0..m).collect::<Vec<_>>())
            }
        }
    };
    Simplex::new(prob, cols, basis)?.run()
}

/// Builds a nonsingular basis: accepts `candidates` in order when they add
/// rank, then pads with surplus columns of `slack_rows` (in order) and
/// finally any remaining rows.
pub fn complete_basis(
    prob: &StandardLp,
    candidates: impl IntoIterator<Item = usize>,
    slack_rows: Vec<usize>,
) -> Vec<usize> {
    let (n, m) = (prob.num_vars(), prob.num_rows());
    let cols = Columns::new(prob);
    let mut builder = RankBuilder::new(m);
    let mut basis = Vec::with_capacity(m);
    let mut taken = vec![false; n + m];
    for j in candidates {
        if basis.len() == m {
            break;
        }
        if j < n + m && !taken[j] && builder.try_add(cols.dense(j, m)) {
            taken[j] = true;
            basis.push(j);
        }
    }
    for i in slack_rows.into_iter().chain(0..m) {
        if basis.len() == m {
            break;
        }
        let j = n + i;
        if !taken[j] && builder.try_add(cols.dense(j, m)) {
            taken[j] = true;
            basis.push(j);
        }
    }
    basis
}

/// Incremental Gaussian elimination used to test linear independence.
struct RankBuilder {
    m: usize,
    /// Accepted reduced vectors, each normalized to 1 at its pivot row.
    rows: Vec<(usize, Vec<f64>)>,
    pivoted: Vec<bool>,
}

impl RankBuilder {
    fn new(m: usize) -> Self {
        RankBuilder {
            m,
            rows: Vec::new(),
            pivoted: vec![false; m],
        }
    }

    fn try_add(&mut self, mut v: Vec<f64>) -> bool {
        let scale = v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if scale == 0.0 {
            return false;
        }
        for (p, u) in &self.rows {
            let f = v[*p];
            if f != 0.0 {
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= f * ui;
                }
            }
        }
        let mut best = (usize::MAX, 0.0f64);
        for i in 0..self.m {
            if !self.pivoted[i] && v[i].abs() > best.1 {
                best = (i, v[i].abs());
            }
        }
        if best.0 == usize::MAX || best.1 <= 1e-9 * scale {
            return false;
        }
        let p = best.0;
        let inv = 1.0 / v[p];
        v.iter_mut().for_each(|x| *x *= inv);
        self.pivoted[p] = true;
        self.rows.push((p, v));
        true
    }
}

struct Simplex<'a> {
    prob: &'a StandardLp,
    cols: Columns,
    n: usize,
    m: usize,
    basis: Vec<usize>,
    position: Vec<Option<usize>>,
    factor: BasisFactor,
    xb: Vec<f64>,
    iterations: usize,
    degenerate_run: usize,
    bland: bool,
}

enum Pricing {
    Enter(usize),
    Done,
}

impl<'a> Simplex<'a> {
    fn new(prob: &'a StandardLp, cols: Columns, basis: Vec<usize>) -> Result<Self, SimplexError> {
        let (n, m) = (prob.num_vars(), prob.num_rows());
        let mut position = vec![None; n + m];
        for (k, &j) in basis.iter().enumerate() {
            position[j] = Some(k);
        }
        let dense: Vec<Vec<f64>> = basis.iter().map(|&j| cols.dense(j, m)).collect();
        let factor = BasisFactor::new(&dense)
            .map_err(|s| SimplexError::Singular { step: 0, column: s.step })?;
        let mut s = Simplex {
            prob,
            cols,
            n,
            m,
            basis,
            position,
            factor,
            xb: Vec::new(),
            iterations: 0,
            degenerate_run: 0,
            bland: false,
        };
        s.recompute_xb();
        Ok(s)
    }

    fn cost(&self, j: usize) -> f64 {
        if j < self.n {
            self.prob.c[j]
        } else {
            0.0
        }
    }

    fn recompute_xb(&mut self) {
        let mut xb = self.prob.b.clone();
        self.factor.ftran(&mut xb);
        self.xb = xb;
    }

    fn refactor(&mut self) -> Result<(), SimplexError> {
        let dense: Vec<Vec<f64>> = self.basis.iter().map(|&j| self.cols.dense(j, self.m)).collect();
        self.factor = BasisFactor::new(&dense).map_err(|s| SimplexError::Singular {
            step: self.iterations,
            column: s.step,
        })?;
        self.recompute_xb();
        Ok(())
    }

    fn infeasible(&self) -> bool {
        self.xb.iter().any(|&v| v < -PRIMAL_TOL)
    }

    /// Duals for the phase-1 (sum of infeasibilities) or phase-2 objective.
    fn duals(&self, phase_one: bool) -> Vec<f64> {
        let mut cb: Vec<f64> = if phase_one {
            self.xb
                .iter()
                .map(|&v| if v < -PRIMAL_TOL { -1.0 } else { 0.0 })
                .collect()
        } else {
            self.basis.iter().map(|&j| self.cost(j)).collect()
        };
        self.factor.btran(&mut cb);
        cb
    }

    fn price(&self, y: &[f64], phase_one: bool) -> Pricing {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.n + self.m {
            if self.position[j].is_some() {
                continue;
            }
            let cost = if phase_one { 0.0 } else { self.cost(j) };
            let d = cost - self.cols.dot(j, y);
            if d < -DUAL_TOL {
                if self.bland {
                    return Pricing::Enter(j);
                }
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
        }
        match best {
            Some((j, _)) => Pricing::Enter(j),
            None => Pricing::Done,
        }
    }

    /// Leaving position and step length for entering direction `alpha`.
    fn ratio_test(&self, alpha: &[f64], phase_one: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for (k, (&a, &v)) in alpha.iter().zip(&self.xb).enumerate() {
            let ratio = if v >= -PRIMAL_TOL && a > PIVOT_TOL {
                v.max(0.0) / a
            } else if phase_one && v < -PRIMAL_TOL && a < -PIVOT_TOL {
                v / a
            } else {
                continue;
            };
            let better = match best {
                None => true,
                Some((bk, br, ba)) => {
                    if ratio < br - 1e-12 {
                        true
                    } else if ratio <= br + 1e-12 {
                        if self.bland {
                            self.basis[k] < self.basis[bk]
                        } else {
                            a.abs() > ba
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                best = Some((k, ratio, a.abs()));
            }
        }
        best.map(|(k, r, _)| (k, r))
    }

    fn pivot(&mut self, entering: usize, leave: usize, step: f64, alpha: Vec<f64>) {
        for (v, a) in self.xb.iter_mut().zip(&alpha) {
            *v -= step * a;
        }
        self.xb[leave] = step;
        let leaving = self.basis[leave];
        self.position[leaving] = None;
        self.position[entering] = Some(leave);
        self.basis[leave] = entering;
        self.factor.update(leave, alpha);
        self.iterations += 1;
        if step <= PRIMAL_TOL {
            self.degenerate_run += 1;
            if self.degenerate_run >= 3 * self.m.max(1) && !self.bland {
                debug!("switching to Bland's rule after {} degenerate pivots", self.degenerate_run);
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
            self.bland = false;
        }
    }

    fn run(mut self) -> Result<BasicSolution, SimplexError> {
        let limit = 50 * (self.n + self.m) + 10_000;
        loop {
            if self.iterations > limit {
                return Err(SimplexError::IterationLimit(self.iterations));
            }
            if self.factor.updates() >= REFACTOR_PERIOD {
                self.refactor()?;
            }
            let phase_one = self.infeasible();
            let y = self.duals(phase_one);
            let entering = match self.price(&y, phase_one) {
                Pricing::Enter(j) => j,
                Pricing::Done => {
                    // Confirm on a fresh factorization before concluding.
                    if self.factor.updates() > 0 {
                        self.refactor()?;
                        if self.infeasible() != phase_one {
                            continue;
                        }
                        let y = self.duals(phase_one);
                        if matches!(self.price(&y, phase_one), Pricing::Enter(_)) {
                            continue;
                        }
                    }
                    let status = if phase_one {
                        SimplexStatus::Infeasible
                    } else {
                        SimplexStatus::Optimal
                    };
                    return Ok(self.finish(status));
                }
            };
            let mut alpha = self.cols.dense(entering, self.m);
            self.factor.ftran(&mut alpha);
            match self.ratio_test(&alpha, phase_one) {
                Some((leave, step)) => self.pivot(entering, leave, step, alpha),
                None => {
                    debug_assert!(!phase_one);
                    return Ok(self.finish(SimplexStatus::Unbounded));
                }
            }
        }
    }

    fn finish(self, status: SimplexStatus) -> BasicSolution {
        let (n, m) = (self.n, self.m);
        let mut full = vec![0.0; n + m];
        for (k, &j) in self.basis.iter().enumerate() {
            let v = self.xb[k];
            full[j] = if v.abs() <= PRIMAL_TOL { 0.0 } else { v };
        }
        let y = if status == SimplexStatus::Optimal {
            self.duals(false)
        } else {
            vec![0.0; m]
        };
        let x = full[..n].to_vec();
        let objective = dot(&self.prob.c, &x);
        BasicSolution {
            status,
            surplus: full[n..].to_vec(),
            x,
            y,
            basis: self.basis,
            objective,
            iterations: self.iterations,
        }
    }
}
