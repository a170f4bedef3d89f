//! Restarted primal-dual hybrid gradient for `min cᵀx, Ax ≥ b, x ≥ 0`.
//!
//! The iteration is the projected saddle-point update on
//! `L(x, y) = cᵀx − yᵀAx + bᵀy`:
//!
//! ```text
//! x⁺ = Π₊(x + τ(Aᵀy − c))
//! y⁺ = Π₊(y − σA(2x⁺ − x) + σb)
//! ```
//!
//! Step sizes are `τ = ηω`, `σ = η/ω` with `η = eta_safety / ‖A‖₂`, so
//! `τσ‖A‖₂² = eta_safety²`. The primal weight `ω` only changes at restarts.
//! Restarts jump to the uniform average of the iterates since the previous
//! restart once the average's KKT error has fallen by `restart_trigger_ratio`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{ScalingDiagonals, StandardLp, ruiz_scale};
use crate::sparse::{dot, norm2, norm_inf, POWER_ITERS, POWER_TOL};

/// Iterate norm beyond which the problem is reported as likely infeasible or unbounded.
pub const DIVERGENCE_NORM: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdlpError {
    #[error(
        "non-finite iterate at iteration {iter} (tau={tau:e}, sigma={sigma:e}, |x|={x_norm:e}, |y|={y_norm:e})"
    )]
    NumericalBreakdown {
        iter: usize,
        tau: f64,
        sigma: f64,
        x_norm: f64,
        y_norm: f64,
    },
    #[error("expected {what} of length {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdhgParams {
    pub eps_rel: f64,
    pub max_iters: usize,
    pub eta_safety: f64,
    pub restart_check_period: usize,
    pub restart_trigger_ratio: f64,
    pub primal_weight_smoothing: f64,
    pub log_period: usize,
    pub seed: u64,
}

impl Default for PdhgParams {
    fn default() -> Self {
        PdhgParams {
            eps_rel: 1e-6,
            max_iters: 200_000,
            eta_safety: 0.9,
            restart_check_period: 64,
            restart_trigger_ratio: 0.5,
            primal_weight_smoothing: 0.5,
            log_period: 100,
            seed: 0,
        }
    }
}

impl PdhgParams {
    pub fn validate(&self) -> Result<(), PdlpError> {
        let bad = |what: &str| Err(PdlpError::InvalidParams(what.to_string()));
        if !(self.eps_rel > 0.0 && self.eps_rel.is_finite()) {
            return bad("eps_rel must be positive");
        }
        if !(self.eta_safety > 0.0 && self.eta_safety < 1.0) {
            return bad("eta_safety must lie in (0, 1)");
        }
        if !(self.restart_trigger_ratio > 0.0 && self.restart_trigger_ratio < 1.0) {
            return bad("restart_trigger_ratio must lie in (0, 1)");
        }
        if !(self.primal_weight_smoothing > 0.0 && self.primal_weight_smoothing <= 1.0) {
            return bad("primal_weight_smoothing must lie in (0, 1]");
        }
        if self.restart_check_period == 0 || self.log_period == 0 {
            return bad("periods must be positive");
        }
        Ok(())
    }
}

/// Objective values and scale-relative optimality measures of a primal-dual pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub rel_primal_res: f64,
    pub rel_dual_res: f64,
    pub rel_gap: f64,
    pub complementarity: f64,
}

impl ResidualReport {
    /// Largest of the three termination measures.
    pub fn kkt_error(&self) -> f64 {
        self.rel_primal_res.max(self.rel_dual_res).max(self.rel_gap)
    }

    pub fn meets(&self, eps_rel: f64) -> bool {
        self.kkt_error() <= eps_rel
    }
}

/// Residuals of `(x, y)` for `prob`.
pub fn residuals(prob: &StandardLp, x: &[f64], y: &[f64]) -> ResidualReport {
    let ax = prob.a.spmv(x).expect("x matches the column count");
    let aty = prob.a.spmv_transpose(y).expect("y matches the row count");
    residuals_with_products(prob, x, y, &ax, &aty)
}

/// [`residuals`] given precomputed `Ax` and `Aᵀy`.
pub fn residuals_with_products(
    prob: &StandardLp,
    x: &[f64],
    y: &[f64],
    ax: &[f64],
    aty: &[f64],
) -> ResidualReport {
    let primal_obj = dot(&prob.c, x);
    let dual_obj = dot(&prob.b, y);
    let primal_violation = prob
        .b
        .iter()
        .zip(ax)
        .fold(0.0f64, |m, (b, l)| m.max(b - l));
    let dual_violation = aty
        .iter()
        .zip(&prob.c)
        .fold(0.0f64, |m, (l, c)| m.max(l - c));
    let x_slack: f64 = x
        .iter()
        .zip(prob.c.iter().zip(aty))
        .map(|(x, (c, l))| x * (c - l))
        .sum();
    let y_slack: f64 = y
        .iter()
        .zip(ax.iter().zip(&prob.b))
        .map(|(y, (l, b))| y * (l - b))
        .sum();
    ResidualReport {
        primal_obj,
        dual_obj,
        rel_primal_res: primal_violation / (1.0 + norm_inf(&prob.b)),
        rel_dual_res: dual_violation / (1.0 + norm_inf(&prob.c)),
        rel_gap: (primal_obj - dual_obj).abs() / (1.0 + primal_obj.abs() + dual_obj.abs()),
        complementarity: x_slack.abs() + y_slack.abs(),
    }
}

/// Iterates, step sizes and restart bookkeeping of one PDHG run.
#[derive(Debug, Clone, PartialEq)]
pub struct PdhgState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub x_prev: Vec<f64>,
    /// `A x` for the current `x`.
    pub ax: Vec<f64>,
    /// `Aᵀ y` for the current `y`.
    pub aty: Vec<f64>,
    pub tau: f64,
    pub sigma: f64,
    pub omega: f64,
    pub iter: usize,
    pub avg_x: Vec<f64>,
    pub avg_y: Vec<f64>,
    pub avg_ax: Vec<f64>,
    pub avg_aty: Vec<f64>,
    pub avg_weight: usize,
    pub last_restart_gap: f64,
    /// Point of the last restart (or the start), for the primal-weight update.
    pub anchor_x: Vec<f64>,
    pub anchor_y: Vec<f64>,
}

impl PdhgState {
    /// Starts at `(x, y)` projected onto the nonnegative orthants.
    pub fn new(
        prob: &StandardLp,
        x: &[f64],
        y: &[f64],
        tau: f64,
        sigma: f64,
    ) -> Result<Self, PdlpError> {
        check_len("x", prob.num_vars(), x.len())?;
        check_len("y", prob.num_rows(), y.len())?;
        let x: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
        let y: Vec<f64> = y.iter().map(|v| v.max(0.0)).collect();
        let ax = prob.a.spmv(&x).expect("sized");
        let aty = prob.a.spmv_transpose(&y).expect("sized");
        Ok(PdhgState {
            x_prev: x.clone(),
            avg_x: vec![0.0; x.len()],
            avg_y: vec![0.0; y.len()],
            avg_ax: vec![0.0; ax.len()],
            avg_aty: vec![0.0; aty.len()],
            anchor_x: x.clone(),
            anchor_y: y.clone(),
            x,
            y,
            ax,
            aty,
            tau,
            sigma,
            omega: (tau / sigma).sqrt(),
            iter: 0,
            avg_weight: 0,
            last_restart_gap: f64::INFINITY,
        })
    }

    /// One PDHG iteration in place.
    pub fn advance(&mut self, prob: &StandardLp) -> Result<(), PdlpError> {
        std::mem::swap(&mut self.x, &mut self.x_prev);
        for j in 0..self.x.len() {
            self.x[j] = (self.x_prev[j] + self.tau * (self.aty[j] - prob.c[j])).max(0.0);
        }
        let ax_prev = std::mem::take(&mut self.ax);
        self.ax = prob.a.spmv(&self.x).expect("sized");
        for i in 0..self.y.len() {
            let extrapolated = 2.0 * self.ax[i] - ax_prev[i];
            self.y[i] = (self.y[i] - self.sigma * extrapolated + self.sigma * prob.b[i]).max(0.0);
        }
        prob.a
            .spmv_transpose_into(&self.y, &mut self.aty)
            .expect("sized");
        self.iter += 1;

        // `f64::max` swallows NaN, so the products are checked as well.
        if self
            .x
            .iter()
            .chain(&self.y)
            .chain(&self.ax)
            .chain(&self.aty)
            .any(|v| !v.is_finite())
        {
            return Err(PdlpError::NumericalBreakdown {
                iter: self.iter,
                tau: self.tau,
                sigma: self.sigma,
                x_norm: norm2(&self.x_prev),
                y_norm: norm2(&self.y),
            });
        }

        self.avg_weight += 1;
        let w = 1.0 / self.avg_weight as f64;
        blend(&mut self.avg_x, &self.x, w);
        blend(&mut self.avg_y, &self.y, w);
        blend(&mut self.avg_ax, &self.ax, w);
        blend(&mut self.avg_aty, &self.aty, w);
        Ok(())
    }

    pub fn current_report(&self, prob: &StandardLp) -> ResidualReport {
        residuals_with_products(prob, &self.x, &self.y, &self.ax, &self.aty)
    }

    pub fn average_report(&self, prob: &StandardLp) -> ResidualReport {
        residuals_with_products(prob, &self.avg_x, &self.avg_y, &self.avg_ax, &self.avg_aty)
    }

    /// Restarts from the running average: moves the iterate there, adapts
    /// the primal weight toward the observed `‖Δx‖ / ‖Δy‖` and clears the
    /// average.
    fn restart_to_average(&mut self, eta: f64, smoothing: f64, restart_gap: f64) {
        let dx = distance(&self.avg_x, &self.anchor_x);
        let dy = distance(&self.avg_y, &self.anchor_y);
        if dx > 0.0 && dy > 0.0 && (dx / dy).is_finite() {
            let log_omega = smoothing * (dx / dy).ln() + (1.0 - smoothing) * self.omega.ln();
            self.omega = log_omega.exp();
        }
        self.tau = eta * self.omega;
        self.sigma = eta / self.omega;
        self.x.copy_from_slice(&self.avg_x);
        self.y.copy_from_slice(&self.avg_y);
        self.ax.copy_from_slice(&self.avg_ax);
        self.aty.copy_from_slice(&self.avg_aty);
        self.x_prev.copy_from_slice(&self.x);
        self.anchor_x.copy_from_slice(&self.x);
        self.anchor_y.copy_from_slice(&self.y);
        self.avg_weight = 0;
        self.last_restart_gap = restart_gap;
    }
}

fn blend(avg: &mut [f64], v: &[f64], w: f64) {
    for (a, v) in avg.iter_mut().zip(v) {
        *a += w * (v - *a);
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<(), PdlpError> {
    if expected == actual {
        Ok(())
    } else {
        Err(PdlpError::DimensionMismatch {
            what,
            expected,
            actual,
        })
    }
}

/// A single PDHG iteration, returning the successor state.
pub fn pdhg_step(state: &PdhgState, prob: &StandardLp) -> Result<PdhgState, PdlpError> {
    check_len("x", prob.num_vars(), state.x.len())?;
    check_len("y", prob.num_rows(), state.y.len())?;
    let mut next = state.clone();
    next.advance(prob)?;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    IterationLimit,
    InfeasibleOrUnboundedSuspected,
}

/// Logged iterates as `(iteration, report)`.
pub type ResidualLog = Vec<(usize, ResidualReport)>;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub report: ResidualReport,
    pub iterations: usize,
    pub restarts: usize,
    pub log: ResidualLog,
    /// `‖A‖₂` estimate the step sizes were derived from.
    pub norm_estimate: f64,
    pub tau: f64,
    pub sigma: f64,
    /// KKT error recorded at each restart, in order.
    pub restart_gaps: Vec<f64>,
}

/// Solves `prob` with restarted PDHG, optionally warm-started from `(x₀, y₀)`.
pub fn solve_lp(
    prob: &StandardLp,
    params: &PdhgParams,
    warm: Option<(&[f64], &[f64])>,
) -> Result<LpSolution, PdlpError> {
    params.validate()?;
    let (n, m) = (prob.num_vars(), prob.num_rows());
    let zeros_x = vec![0.0; n];
    let zeros_y = vec![0.0; m];
    let (x0, y0) = warm.unwrap_or((&zeros_x, &zeros_y));
    check_len("warm-start x", n, x0.len())?;
    check_len("warm-start y", m, y0.len())?;

    let norm_estimate = prob
        .a
        .spectral_norm_estimate(POWER_ITERS, POWER_TOL, params.seed);
    // An all-zero matrix imposes no step bound.
    let eta = params.eta_safety / if norm_estimate > 0.0 { norm_estimate } else { 1.0 };
    let omega = initial_primal_weight(x0, y0);
    let mut state = PdhgState::new(prob, x0, y0, eta * omega, eta / omega)?;

    let mut log = Vec::new();
    let mut restart_gaps = Vec::new();
    let mut restarts = 0;

    let start = state.current_report(prob);
    state.last_restart_gap = start.kkt_error();
    log.push((0, start));
    if start.meets(params.eps_rel) {
        return Ok(finish(LpStatus::Optimal, state.x, state.y, start, 0, 0, log, restart_gaps, norm_estimate, state.tau, state.sigma));
    }

    while state.iter < params.max_iters {
        state.advance(prob)?;
        let k = state.iter;
        let logged = k % params.log_period == 0;
        let checking = k % params.restart_check_period == 0 || k == params.max_iters;
        if !logged && !checking {
            continue;
        }
        let current = state.current_report(prob);
        if logged {
            log.push((k, current));
        }
        if !checking {
            continue;
        }
        let average = state.average_report(prob);
        if current.meets(params.eps_rel) {
            push_final(&mut log, k, current);
            return Ok(finish(LpStatus::Optimal, state.x, state.y, current, k, restarts, log, restart_gaps, norm_estimate, state.tau, state.sigma));
        }
        if average.meets(params.eps_rel) {
            push_final(&mut log, k, average);
            return Ok(finish(LpStatus::Optimal, state.avg_x, state.avg_y, average, k, restarts, log, restart_gaps, norm_estimate, state.tau, state.sigma));
        }
        if norm_inf(&state.x).max(norm_inf(&state.y)) > DIVERGENCE_NORM {
            push_final(&mut log, k, current);
            return Ok(finish(LpStatus::InfeasibleOrUnboundedSuspected, state.x, state.y, current, k, restarts, log, restart_gaps, norm_estimate, state.tau, state.sigma));
        }
        let candidate = average.kkt_error();
        if candidate <= params.restart_trigger_ratio * state.last_restart_gap {
            state.restart_to_average(eta, params.primal_weight_smoothing, candidate);
            restart_gaps.push(candidate);
            restarts += 1;
        }
    }

    let k = state.iter;
    let current = state.current_report(prob);
    let average = state.average_report(prob);
    let (x, y, report) = if state.avg_weight > 0 && average.kkt_error() < current.kkt_error() {
        (state.avg_x, state.avg_y, average)
    } else {
        (state.x, state.y, current)
    };
    push_final(&mut log, k, report);
    Ok(finish(LpStatus::IterationLimit, x, y, report, k, restarts, log, restart_gaps, norm_estimate, state.tau, state.sigma))
}

/// Warm starts carry their own primal/dual scale; a cold start uses 1.
fn initial_primal_weight(x0: &[f64], y0: &[f64]) -> f64 {
    let (nx, ny) = (norm2(x0), norm2(y0));
    if nx > 0.0 && ny > 0.0 && (nx / ny).is_finite() {
        nx / ny
    } else {
        1.0
    }
}

fn push_final(log: &mut Vec<(usize, ResidualReport)>, k: usize, report: ResidualReport) {
    if let Some(last) = log.last_mut() {
        if last.0 == k {
            last.1 = report;
            return;
        }
    }
    log.push((k, report));
}

#[allow(clippy::too_many_arguments)]
fn finish(
    status: LpStatus,
    x: Vec<f64>,
    y: Vec<f64>,
    report: ResidualReport,
    iterations: usize,
    restarts: usize,
    log: Vec<(usize, ResidualReport)>,
    restart_gaps: Vec<f64>,
    norm_estimate: f64,
    tau: f64,
    sigma: f64,
) -> LpSolution {
    LpSolution {
        status,
        x,
        y,
        report,
        iterations,
        restarts,
        log,
        norm_estimate,
        tau,
        sigma,
        restart_gaps,
    }
}

/// Equilibrates `prob`, solves the scaled problem and maps `(x, y)` back.
///
/// The returned status and iteration counts are those of the scaled solve;
/// `report` is recomputed on the original problem.
pub fn solve_lp_scaled(
    prob: &StandardLp,
    params: &PdhgParams,
    warm: Option<(&[f64], &[f64])>,
    ruiz_passes: usize,
) -> Result<(LpSolution, ScalingDiagonals), PdlpError> {
    let (scaled, diag) = ruiz_scale(prob, ruiz_passes);
    let warm_scaled = match warm {
        Some((x, y)) => {
            check_len("warm-start x", prob.num_vars(), x.len())?;
            check_len("warm-start y", prob.num_rows(), y.len())?;
            Some((diag.scale_primal(x), diag.scale_dual(y)))
        }
        None => None,
    };
    let mut sol = solve_lp(
        &scaled,
        params,
        warm_scaled.as_ref().map(|(x, y)| (x.as_slice(), y.as_slice())),
    )?;
    sol.x = diag.unscale_primal(&sol.x);
    sol.y = diag.unscale_dual(&sol.y);
    sol.report = residuals(prob, &sol.x, &sol.y);
    Ok((sol, diag))
}

const LOG_COLUMNS: [&str; 7] = [
    "iter",
    "primal_obj",
    "dual_obj",
    "rel_primal_res",
    "rel_dual_res",
    "rel_gap",
    "complementarity",
];

/// Fixed-width iteration table, one row per logged iterate.
pub fn format_log(sol: &LpSolution) -> String {
    format_log_rows(&sol.log)
}

pub fn format_log_rows(rows: &[(usize, ResidualReport)]) -> String {
    let mut out = format!("{:>8}", LOG_COLUMNS[0]);
    for name in &LOG_COLUMNS[1..] {
        let _ = write!(out, " {name:>15}");
    }
    out.push('\n');
    for (iter, r) in rows {
        let _ = write!(out, "{iter:>8}");
        for v in [
            r.primal_obj,
            r.dual_obj,
            r.rel_primal_res,
            r.rel_dual_res,
            r.rel_gap,
            r.complementarity,
        ] {
            let _ = write!(out, " {v:>15.2e}");
        }
        out.push('\n');
    }
    out
}
