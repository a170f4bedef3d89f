//! Best-bound branch-and-bound over binary variables.
//!
//! Every node is the base model with some binaries fixed through their
//! bounds, re-canonicalized and presolved. Fixing a binary never changes the
//! shape of the standard form, so a parent's primal-dual point or basis is a
//! valid warm start for its children.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    canonicalize, postsolve, presolve, std_column, Constraint, GeneralLp, ModelError, Relation,
    Sense,
    StandardLp, VarKind, RUIZ_PASSES,
};
use crate::pdlp::{solve_lp_scaled, PdhgParams, PdlpError, ResidualLog};
use crate::simplex::{crossover, simplex_solve, CLASSIFY_TOL, BasicSolution, SimplexError, SimplexStatus};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BnbError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("binary index {0} is out of range or not bounded within [0, 1]")]
    BadBinary(usize),
    #[error("root relaxation failed: {0}")]
    RootPdlp(#[from] PdlpError),
    #[error("root relaxation failed: {0}")]
    RootSimplex(#[from] SimplexError),
    #[error("root relaxation is unbounded")]
    Unbounded,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("score undefined for a zero baseline objective")]
    ZeroBaseline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpProblem {
    pub base: GeneralLp,
    pub binary_set: Vec<usize>,
}

impl MilpProblem {
    /// Takes the binaries from the variable kinds of `base`.
    pub fn new(base: GeneralLp) -> Result<Self, BnbError> {
        let binary_set = base.binaries();
        let p = MilpProblem { base, binary_set };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), BnbError> {
        self.base.validate()?;
        for &j in &self.binary_set {
            if j >= self.base.num_vars() || self.base.lower[j] < 0.0 || self.base.upper[j] > 1.0 {
                return Err(BnbError::BadBinary(j));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaxationEngine {
    PdhgCrossover,
    Simplex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbParams {
    pub relaxation_engine: RelaxationEngine,
    pub node_limit: usize,
    pub rel_mip_gap: f64,
    pub int_tol: f64,
    pub time_limit_seconds: Option<f64>,
    pub seed: u64,
    /// Used by the PDHG engine at every node.
    pub pdhg: PdhgParams,
    pub ruiz_passes: usize,
    /// Keep a [`NodeRecord`] for every explored node.
    pub record_nodes: bool,
}

impl BnbParams {
    pub fn new(relaxation_engine: RelaxationEngine) -> Self {
        BnbParams {
            relaxation_engine,
            node_limit: 100_000,
            rel_mip_gap: 1e-6,
            int_tol: 1e-6,
            time_limit_seconds: None,
            seed: 0,
            pdhg: PdhgParams {
                max_iters: 20_000,
                ..PdhgParams::default()
            },
            ruiz_passes: RUIZ_PASSES,
            record_nodes: false,
        }
    }

    pub fn validate(&self) -> Result<(), BnbError> {
        if !(self.rel_mip_gap > 0.0 && self.int_tol > 0.0 && self.int_tol < 0.5) {
            return Err(BnbError::InvalidParams("tolerances must be positive".into()));
        }
        if let Some(t) = self.time_limit_seconds {
            if !(t >= 0.0) {
                return Err(BnbError::InvalidParams("time limit must be nonnegative".into()));
            }
        }
        self.pdhg
            .validate()
            .map_err(|e| BnbError::InvalidParams(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MilpStatus {
    Optimal,
    NodeLimit,
    TimeLimit,
    Infeasible,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageTimes {
    pub presolve: Duration,
    pub relaxation: Duration,
    pub crossover: Duration,
    pub branch_and_bound: Duration,
}

impl StageTimes {
    pub fn sum(&self) -> Duration {
        self.presolve + self.relaxation + self.crossover + self.branch_and_bound
    }
}

/// An explored node: its fixings and the certified relaxation value in the
/// model's sense (`None` when the relaxation was infeasible or failed).
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub fixings: Vec<(usize, f64)>,
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: MilpStatus,
    pub incumbent_x: Option<Vec<f64>>,
    pub objective: Option<f64>,
    /// Bound on the optimum in the model's own sense (lower for minimize).
    pub best_bound: f64,
    pub nodes_explored: usize,
    pub stage_times: StageTimes,
    /// Wall time of the whole call.
    pub total_time: Duration,
    /// PDHG iterations or simplex pivots spent on relaxations.
    pub relaxation_iterations: usize,
    pub cleanup_iterations: usize,
    /// Nodes whose relaxation failed; they were pruned.
    pub failed_nodes: usize,
    /// PDHG log of the root relaxation (PDHG engine only).
    pub root_log: ResidualLog,
    pub root_bound: f64,
    /// Filled only with [`BnbParams::record_nodes`].
    pub nodes: Vec<NodeRecord>,
}

/// The most fractional binary, lowest index on ties.
pub fn branch_select(x: &[f64], binary_set: &[usize], int_tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &j in binary_set {
        let f = x[j] - x[j].floor();
        let score = f.min(1.0 - f);
        if score <= int_tol {
            continue;
        }
        match best {
            Some((bj, bs)) if score < bs || (score == bs && j > bj) => {}
            _ => best = Some((j, score)),
        }
    }
    best.map(|(j, _)| j)
}

/// Greater is better: `candidate/baseline` when maximizing,
/// `baseline/candidate` when minimizing.
pub fn score(candidate: f64, baseline: f64, sense: Sense) -> Result<f64, BnbError> {
    if baseline == 0.0 || (sense == Sense::Minimize && candidate == 0.0) {
        return Err(BnbError::ZeroBaseline);
    }
    Ok(match sense {
        Sense::Maximize => candidate / baseline,
        Sense::Minimize => baseline / candidate,
    })
}

#[derive(Debug, Clone)]
enum Warm {
    Cold,
    Point { x: Vec<f64>, y: Vec<f64> },
    Basis(Vec<usize>),
}

#[derive(Debug)]
struct Node {
    /// Parent relaxation value, minimization-normalized.
    bound: f64,
    seq: usize,
    fixings: Vec<(usize, f64)>,
    warm: Warm,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Reversed so the max-heap pops the smallest bound, then the oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

enum NodeOutcome {
    Infeasible,
    Solved {
        vertex: BasicSolution,
        lp: StandardLp,
        warm_point: Option<(Vec<f64>, Vec<f64>)>,
    },
}

struct Search<'a> {
    problem: &'a MilpProblem,
    params: &'a BnbParams,
    times: StageTimes,
    relaxation_iterations: usize,
    cleanup_iterations: usize,
    root_log: ResidualLog,
}

fn floor_ns(d: Duration) -> Duration {
    d.max(Duration::from_nanos(1))
}

impl Search<'_> {
    fn node_lp(&mut self, fixings: &[(usize, f64)]) -> Result<Option<StandardLp>, BnbError> {
        let start = Instant::now();
        let mut lp = self.problem.base.clone();
        for &(j, v) in fixings {
            lp.lower[j] = v;
            lp.upper[j] = v;
        }
        let canon = canonicalize(&lp)?;
        let reduced = presolve(&canon).ok();
        self.times.presolve += floor_ns(start.elapsed());
        Ok(reduced)
    }

    fn relax(&mut self, lp: StandardLp, warm: &Warm, root: bool) -> Result<NodeOutcome, BnbError> {
        match self.params.relaxation_engine {
            RelaxationEngine::Simplex => {
                let basis = match warm {
                    Warm::Basis(b) => Some(b.as_slice()),
                    _ => None,
                };
                let start = Instant::now();
                let vertex = simplex_solve(&lp, basis);
                self.times.relaxation += floor_ns(start.elapsed());
                let vertex = vertex?;
                self.relaxation_iterations += vertex.iterations;
                self.classify(vertex, lp, None)
            }
            RelaxationEngine::PdhgCrossover => {
                let point = match warm {
                    Warm::Point { x, y } => Some((x.as_slice(), y.as_slice())),
                    _ => None,
                };
                let start = Instant::now();
                let pdhg = PdhgParams {
                    seed: self.params.seed,
                    ..self.params.pdhg.clone()
                };
                let relaxed = solve_lp_scaled(&lp, &pdhg, point, self.params.ruiz_passes);
                self.times.relaxation += floor_ns(start.elapsed());
                let (sol, _) = relaxed?;
                self.relaxation_iterations += sol.iterations;
                if root {
                    self.root_log = sol.log.clone();
                }
                let start = Instant::now();
                let crossed = crossover(&lp, &sol.x, &sol.y, CLASSIFY_TOL);
                self.times.crossover += floor_ns(start.elapsed());
                let crossed = crossed?;
                self.cleanup_iterations += crossed.cleanup_iterations;
                self.classify(crossed.solution, lp, Some((sol.x, sol.y)))
            }
        }
    }

    fn classify(
        &self,
        vertex: BasicSolution,
        lp: StandardLp,
        warm_point: Option<(Vec<f64>, Vec<f64>)>,
    ) -> Result<NodeOutcome, BnbError> {
        match vertex.status {
            SimplexStatus::Optimal => Ok(NodeOutcome::Solved {
                vertex,
                lp,
                warm_point,
            }),
            SimplexStatus::Infeasible => Ok(NodeOutcome::Infeasible),
            SimplexStatus::Unbounded => Err(BnbError::Unbounded),
        }
    }
}

/// Solves `problem` by best-bound branch-and-bound; see [`BnbParams`] for the knobs.
pub fn solve_milp(problem: &MilpProblem, params: &BnbParams) -> Result<MilpSolution, BnbError> {
    problem.validate()?;
    params.validate()?;
    let started = Instant::now();
    let sign = match problem.base.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut search = Search {
        problem,
        params,
        times: StageTimes::default(),
        relaxation_iterations: 0,
        cleanup_iterations: 0,
        root_log: Vec::new(),
    };

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        seq: 0,
        fixings: Vec::new(),
        warm: Warm::Cold,
    });
    let mut seq = 1;
    let mut nodes_explored = 0;
    let mut failed_nodes = 0;
    // Minimization-normalized incumbent value and point.
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    // Smallest bound among nodes cut off by the gap test.
    let mut pruned_floor = f64::INFINITY;
    let mut root_bound = f64::NAN;
    let mut status = MilpStatus::Optimal;
    let mut records = Vec::new();

    let cutoff = |inc: &Option<(f64, Vec<f64>)>| match inc {
        Some((z, _)) => z - params.rel_mip_gap * (1.0 + z.abs()),
        None => f64::INFINITY,
    };

    while let Some(node) = heap.pop() {
        if node.bound >= cutoff(&incumbent) {
            pruned_floor = pruned_floor.min(node.bound);
            continue;
        }
        if nodes_explored >= params.node_limit {
            status = MilpStatus::NodeLimit;
            heap.push(node);
            break;
        }
        if let Some(limit) = params.time_limit_seconds {
            if started.elapsed().as_secs_f64() >= limit {
                status = MilpStatus::TimeLimit;
                heap.push(node);
                break;
            }
        }
        nodes_explored += 1;
        let root = nodes_explored == 1;

        let record_at = records.len();
        if params.record_nodes {
            records.push(NodeRecord {
                fixings: node.fixings.clone(),
                bound: None,
            });
        }
        let Some(lp) = search.node_lp(&node.fixings)? else {
            continue;
        };
        let outcome = match search.relax(lp, &node.warm, root) {
            Ok(o) => o,
            Err(e) if root => return Err(e),
            Err(e) => {
                log::warn!("node {} pruned after relaxation failure: {e}", node.seq);
                failed_nodes += 1;
                continue;
            }
        };
        let (vertex, lp, warm_point) = match outcome {
            NodeOutcome::Infeasible => continue,
            NodeOutcome::Solved {
                vertex,
                lp,
                warm_point,
            } => (vertex, lp, warm_point),
        };
        let z = vertex.objective + lp.log.objective_offset;
        if root {
            root_bound = z;
        }
        if let Some(r) = records.get_mut(record_at) {
            r.bound = Some(sign * z);
        }
        if z >= cutoff(&incumbent) {
            pruned_floor = pruned_floor.min(z);
            continue;
        }
        let (x_orig, _) = postsolve(&lp, &vertex.x)?;
        match branch_select(&x_orig, &problem.binary_set, params.int_tol) {
            None => {
                let mut x = x_orig;
                for &j in &problem.binary_set {
                    x[j] = x[j].round();
                }
                incumbent = Some((z, x));
            }
            Some(j) => {
                let col = std_column(&lp, j);
                for value in [0.0, 1.0] {
                    let warm = match &warm_point {
                        Some((x, y)) => {
                            let mut x = x.clone();
                            if let Some(c) = col {
                                x[c] = 0.0;
                            }
                            Warm::Point { x, y: y.clone() }
                        }
                        None => Warm::Basis(vertex.basis.clone()),
                    };
                    let mut fixings = node.fixings.clone();
                    fixings.push((j, value));
                    heap.push(Node {
                        bound: z,
                        seq,
                        fixings,
                        warm,
                    });
                    seq += 1;
                }
            }
        }
    }

    let open_floor = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let bound_min = match &incumbent {
        Some((z, _)) => z.min(pruned_floor).min(open_floor),
        None => pruned_floor.min(open_floor),
    };
    if incumbent.is_none() && status == MilpStatus::Optimal {
        status = MilpStatus::Infeasible;
    }

    let total_time = started.elapsed();
    let mut times = search.times;
    let other = times.presolve + times.relaxation + times.crossover;
    times.branch_and_bound = floor_ns(total_time.saturating_sub(other));

    let (objective, incumbent_x) = match incumbent {
        Some((z, x)) => (Some(sign * z), Some(x)),
        None => (None, None),
    };
    Ok(MilpSolution {
        status,
        incumbent_x,
        objective,
        best_bound: sign * bound_min,
        nodes_explored,
        stage_times: times,
        total_time,
        relaxation_iterations: search.relaxation_iterations,
        cleanup_iterations: search.cleanup_iterations,
        failed_nodes,
        root_log: search.root_log,
        root_bound: sign * root_bound,
        nodes: records,
    })
}

/// Optimum over every 0/1 assignment of the binaries, each completed by the
/// simplex oracle. Exponential; meant for test-sized models.
pub fn brute_force(problem: &MilpProblem) -> Result<Option<(f64, Vec<f64>)>, BnbError> {
    let k = problem.binary_set.len();
    assert!(k < 24, "brute force over {k} binaries");
    let sign = match problem.base.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let is_binary: Vec<bool> = {
        let mut v = vec![false; problem.base.num_vars()];
        for &j in &problem.binary_set {
            v[j] = true;
        }
        v
    };
    // Rows over binaries alone reject most assignments without an LP.
    let pure_rows: Vec<&Constraint> = problem
        .base
        .rows
        .iter()
        .filter(|r| r.coeffs.iter().all(|&(j, _)| is_binary[j]))
        .collect();
    let mut point = vec![0.0; problem.base.num_vars()];
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << k) {
        let mut in_bounds = true;
        for (bit, &j) in problem.binary_set.iter().enumerate() {
            point[j] = ((mask >> bit) & 1) as f64;
            in_bounds &= problem.base.lower[j] <= point[j] && point[j] <= problem.base.upper[j];
        }
        let violated = !in_bounds || pure_rows.iter().any(|r| {
            let lhs: f64 = r.coeffs.iter().map(|&(j, a)| a * point[j]).sum();
            match r.relation {
                Relation::Le => lhs > r.rhs + 1e-9,
                Relation::Ge => lhs < r.rhs - 1e-9,
                Relation::Eq => (lhs - r.rhs).abs() > 1e-9,
            }
        });
        if violated {
            continue;
        }
        let mut lp = problem.base.clone();
        for &j in &problem.binary_set {
            lp.lower[j] = point[j];
            lp.upper[j] = point[j];
            lp.kinds[j] = VarKind::Continuous;
        }
        let Ok(reduced) = presolve(&canonicalize(&lp)?) else {
            continue;
        };
        let sol = simplex_solve(&reduced, None)?;
        if sol.status != SimplexStatus::Optimal {
            continue;
        }
        let (x, obj) = postsolve(&reduced, &sol.x)?;
        if best.as_ref().is_none_or(|(b, _)| sign * obj < sign * b) {
            best = Some((obj, x));
        }
    }
    Ok(best)
}
