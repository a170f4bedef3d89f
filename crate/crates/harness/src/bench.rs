//! Suite runner: solves every (scenario, repetition) with both engines and
//! appends rows to `runs.csv` as they finish.
//!
//! A `done` marker is written once every run is recorded. Rerunning against
//! an out dir holding the marker performs no solves; without the marker,
//! completed (scenario, repetition) pairs found in the CSV are skipped.

use std::collections::HashSet;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Duration;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use ucsolve::bnb::{score, solve_milp, MilpSolution, MilpStatus};

use crate::report::{aggregate, BenchReport};
use crate::suite::{Engine, Scenario};

pub const RUNS_FILE: &str = "runs.csv";
pub const REPORT_FILE: &str = "report.json";
pub const DONE_FILE: &str = "done";

/// One solve. Every column needed by [`aggregate`] is in the row itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub scenario: String,
    pub network: String,
    pub division: String,
    pub engine: Engine,
    pub rep: usize,
    pub seed: u64,
    pub workers: usize,
    /// optimal, node_limit, time_limit, infeasible or error.
    pub status: String,
    pub objective: Option<f64>,
    pub best_bound: Option<f64>,
    /// Against the simplex run of the same repetition; greater is better.
    pub score: Option<f64>,
    pub total_ms: f64,
    pub presolve_ms: f64,
    pub relaxation_ms: f64,
    pub crossover_ms: f64,
    pub branch_and_bound_ms: f64,
    pub nodes: usize,
    pub relaxation_iterations: usize,
    pub cleanup_iterations: usize,
    pub failed_nodes: usize,
    pub error: String,
}

impl RunRow {
    pub fn stage_sum_ms(&self) -> f64 {
        self.presolve_ms + self.relaxation_ms + self.crossover_ms + self.branch_and_bound_ms
    }
}

pub fn status_name(s: MilpStatus) -> &'static str {
    match s {
        MilpStatus::Optimal => "optimal",
        MilpStatus::NodeLimit => "node_limit",
        MilpStatus::TimeLimit => "time_limit",
        MilpStatus::Infeasible => "infeasible",
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn row_for(scenario: &Scenario, engine: Engine, rep: usize, workers: usize) -> RunRow {
    RunRow {
        scenario: scenario.name.clone(),
        network: scenario.network.clone(),
        division: scenario.division.clone(),
        engine,
        rep,
        seed: scenario.uc_config.seed,
        workers,
        status: String::new(),
        objective: None,
        best_bound: None,
        score: None,
        total_ms: 0.0,
        presolve_ms: 0.0,
        relaxation_ms: 0.0,
        crossover_ms: 0.0,
        branch_and_bound_ms: 0.0,
        nodes: 0,
        relaxation_iterations: 0,
        cleanup_iterations: 0,
        failed_nodes: 0,
        error: String::new(),
    }
}

fn fill(row: &mut RunRow, sol: &MilpSolution) {
    let t = &sol.stage_times;
    row.status = status_name(sol.status).into();
    row.objective = sol.objective;
    row.best_bound = Some(sol.best_bound).filter(|b| b.is_finite());
    row.total_ms = ms(sol.total_time);
    row.presolve_ms = ms(t.presolve);
    row.relaxation_ms = ms(t.relaxation);
    row.crossover_ms = ms(t.crossover);
    row.branch_and_bound_ms = ms(t.branch_and_bound);
    row.nodes = sol.nodes_explored;
    row.relaxation_iterations = sol.relaxation_iterations;
    row.cleanup_iterations = sol.cleanup_iterations;
    row.failed_nodes = sol.failed_nodes;
}

/// Both engines on one repetition of one scenario, baseline first.
pub fn run_pair(scenario: &Scenario, rep: usize, workers: usize) -> [RunRow; 2] {
    let milp = scenario.milp();
    let sense = milp.base.sense;
    let mut rows = Engine::ALL.map(|e| row_for(scenario, e, rep, workers));
    for (row, engine) in rows.iter_mut().zip(Engine::ALL) {
        match solve_milp(&milp, &scenario.settings(engine).params(engine)) {
            Ok(sol) => fill(row, &sol),
            Err(e) => {
                row.status = "error".into();
                row.error = e.to_string();
            }
        }
    }
    let baseline = rows[0].objective;
    for row in rows.iter_mut() {
        row.score = match (row.objective, baseline) {
            (Some(c), Some(b)) => score(c, b, sense).ok(),
            _ => None,
        };
    }
    rows
}

/// Rows in `path`, tolerating a torn final line from an interrupted run.
pub fn read_rows(path: &Path) -> Result<Vec<RunRow>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let mut rows = Vec::new();
    let mut records = reader.deserialize::<RunRow>().peekable();
    while let Some(rec) = records.next() {
        match rec {
            Ok(r) => rows.push(r),
            Err(_) if records.peek().is_none() => {
                log::warn!("ignoring incomplete last line of {}", path.display());
            }
            Err(e) => return Err(e).with_context(|| format!("reading {}", path.display())),
        }
    }
    Ok(rows)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming onto {}", path.display()))?;
    Ok(())
}

/// `runs.csv` header, in [`RunRow`] field order.
pub const COLUMNS: [&str; 21] = [
    "scenario",
    "network",
    "division",
    "engine",
    "rep",
    "seed",
    "workers",
    "status",
    "objective",
    "best_bound",
    "score",
    "total_ms",
    "presolve_ms",
    "relaxation_ms",
    "crossover_ms",
    "branch_and_bound_ms",
    "nodes",
    "relaxation_iterations",
    "cleanup_iterations",
    "failed_nodes",
    "error",
];

fn csv_bytes(rows: &[RunRow], header: bool) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    if header {
        w.write_record(COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.into_inner()?)
}

pub struct SuiteOutcome {
    pub report: BenchReport,
    /// Individual engine solves performed by this call.
    pub solves: usize,
    /// Rows whose engine failed.
    pub failures: usize,
}

/// Runs `scenarios` into `out_dir`. See the module docs for resume rules.
pub fn run_suite(scenarios: &[Scenario], out_dir: &Path, workers: usize) -> Result<SuiteOutcome> {
    let workers = workers.max(1);
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let runs: PathBuf = out_dir.join(RUNS_FILE);
    let done = out_dir.join(DONE_FILE);

    let mut rows = if runs.exists() { read_rows(&runs)? } else { Vec::new() };
    let mut solves = 0;
    if !done.exists() {
        // Keep only complete pairs so a torn pair is rerun cleanly.
        let key = |r: &RunRow| (r.scenario.clone(), r.rep);
        let mut engines_seen: std::collections::HashMap<(String, usize), usize> = Default::default();
        for r in &rows {
            *engines_seen.entry(key(r)).or_default() += 1;
        }
        let complete: HashSet<(String, usize)> = engines_seen
            .into_iter()
            .filter(|(_, n)| *n == Engine::ALL.len())
            .map(|(k, _)| k)
            .collect();
        rows.retain(|r| complete.contains(&key(r)));
        write_atomic(&runs, &csv_bytes(&rows, true)?)?;

        let jobs: Vec<(&Scenario, usize)> = scenarios
            .iter()
            .flat_map(|s| (0..s.repetitions).map(move |rep| (s, rep)))
            .filter(|(s, rep)| !complete.contains(&(s.name.clone(), *rep)))
            .collect();
        let mut file = OpenOptions::new().append(true).open(&runs)?;
        let next = AtomicUsize::new(0);
        let (tx, rx) = mpsc::channel::<[RunRow; 2]>();
        std::thread::scope(|scope| -> Result<()> {
            for _ in 0..workers.min(jobs.len()) {
                let tx = tx.clone();
                let (jobs, next) = (&jobs, &next);
                scope.spawn(move || loop {
                    let k = next.fetch_add(1, Ordering::SeqCst);
                    let Some(&(scenario, rep)) = jobs.get(k) else { break };
                    if tx.send(run_pair(scenario, rep, workers)).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            // The only writer: one flush per finished pair.
            for pair in rx {
                file.write_all(&csv_bytes(&pair, false)?)?;
                file.flush()?;
                solves += pair.len();
                log::info!("finished {} rep {}", pair[0].scenario, pair[0].rep);
                rows.extend(pair);
            }
            Ok(())
        })?;
        file.sync_all()?;
        fs::write(&done, format!("{}\n", rows.len()))?;
    }

    let report = aggregate(&rows)?;
    write_atomic(&out_dir.join(REPORT_FILE), serde_json::to_string_pretty(&report)?.as_bytes())?;
    let failures = rows.iter().filter(|r| r.status == "error").count();
    Ok(SuiteOutcome {
        report,
        solves,
        failures,
    })
}
