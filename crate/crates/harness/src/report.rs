//! Aggregation of `runs.csv` rows into time, stage and score tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

use crate::bench::RunRow;
use crate::suite::Engine;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EngineTimes {
    pub runs: usize,
    pub max_ms: f64,
    pub mean_ms: f64,
    pub mean_presolve_ms: f64,
    pub mean_relaxation_ms: f64,
    pub mean_crossover_ms: f64,
    pub mean_branch_and_bound_ms: f64,
    pub mean_nodes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    /// `network-division`.
    pub group: String,
    pub simplex: EngineTimes,
    pub pdhg: EngineTimes,
    /// Mean simplex time over mean PDHG time.
    pub speedup: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    /// Scenarios with a defined score.
    pub scored: usize,
    pub at_least_one: usize,
    /// Strictly between 0.999 and 1.
    pub near_one: usize,
    /// At most 0.999.
    pub below: usize,
    /// No score: a run failed or found no solution.
    pub undefined: usize,
    pub mean: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub groups: Vec<GroupSummary>,
    pub scores: ScoreSummary,
    /// Per-scenario score, the mean over repetitions.
    pub scenario_scores: BTreeMap<String, Option<f64>>,
    pub rows: Vec<RunRow>,
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn engine_times(rows: &[&RunRow]) -> EngineTimes {
    let col = |f: fn(&RunRow) -> f64| rows.iter().map(|r| f(r)).collect::<Vec<_>>();
    let total = col(|r| r.total_ms);
    EngineTimes {
        runs: rows.len(),
        max_ms: total.iter().cloned().fold(0.0, f64::max),
        mean_ms: mean(&total),
        mean_presolve_ms: mean(&col(|r| r.presolve_ms)),
        mean_relaxation_ms: mean(&col(|r| r.relaxation_ms)),
        mean_crossover_ms: mean(&col(|r| r.crossover_ms)),
        mean_branch_and_bound_ms: mean(&col(|r| r.branch_and_bound_ms)),
        mean_nodes: mean(&col(|r| r.nodes as f64)),
    }
}

/// Summarizes rows. Fails if some (scenario, repetition) lacks an engine.
pub fn aggregate(rows: &[RunRow]) -> Result<BenchReport> {
    let mut rows = rows.to_vec();
    rows.sort_by(|a, b| (&a.scenario, a.rep, a.engine).cmp(&(&b.scenario, b.rep, b.engine)));

    let mut present: BTreeMap<(&str, usize), BTreeSet<Engine>> = BTreeMap::new();
    for r in &rows {
        present.entry((&r.scenario, r.rep)).or_default().insert(r.engine);
    }
    for ((scenario, rep), engines) in &present {
        for e in Engine::ALL {
            if !engines.contains(&e) {
                bail!("scenario {scenario} repetition {rep} has no {} run", e.as_str());
            }
        }
    }

    let mut by_group: BTreeMap<String, Vec<&RunRow>> = BTreeMap::new();
    for r in &rows {
        by_group
            .entry(format!("{}-{}", r.network, r.division))
            .or_default()
            .push(r);
    }
    let groups = by_group
        .into_iter()
        .map(|(group, rs)| {
            let pick = |e: Engine| rs.iter().copied().filter(|r| r.engine == e).collect::<Vec<_>>();
            let simplex = engine_times(&pick(Engine::Simplex));
            let pdhg = engine_times(&pick(Engine::Pdhg));
            let speedup = (pdhg.mean_ms > 0.0).then(|| simplex.mean_ms / pdhg.mean_ms);
            GroupSummary {
                group,
                simplex,
                pdhg,
                speedup,
            }
        })
        .collect();

    let mut per_scenario: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.engine == Engine::Pdhg) {
        per_scenario.entry(r.scenario.clone()).or_default().push(r.score);
    }
    let scenario_scores: BTreeMap<String, Option<f64>> = per_scenario
        .into_iter()
        .map(|(name, s)| {
            let all: Option<Vec<f64>> = s.into_iter().collect();
            (name, all.map(|v| mean(&v)))
        })
        .collect();

    let mut scores = ScoreSummary::default();
    let defined: Vec<f64> = scenario_scores.values().flatten().copied().collect();
    for s in scenario_scores.values() {
        match s {
            Some(v) if *v >= 1.0 => scores.at_least_one += 1,
            Some(v) if *v > 0.999 => scores.near_one += 1,
            Some(_) => scores.below += 1,
            None => scores.undefined += 1,
        }
    }
    scores.scored = defined.len();
    if !defined.is_empty() {
        scores.mean = Some(mean(&defined));
        scores.min = defined.iter().cloned().reduce(f64::min);
        scores.max = defined.iter().cloned().reduce(f64::max);
    }

    Ok(BenchReport {
        groups,
        scores,
        scenario_scores,
        rows,
    })
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.prec$}"))
}

/// Aligned text tables: maximum times, mean times with speed-up, mean stage
/// breakdown, and the score distribution.
pub fn render_tables(report: &BenchReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Maximum solution time (ms)");
    let _ = writeln!(out, "{:<12} {:>12} {:>12}", "group", "simplex", "pdhg");
    for g in &report.groups {
        let _ = writeln!(out, "{:<12} {:>12.1} {:>12.1}", g.group, g.simplex.max_ms, g.pdhg.max_ms);
    }
    let _ = writeln!(out, "\nMean solution time (ms) and speed-up");
    let _ = writeln!(out, "{:<12} {:>12} {:>12} {:>10}", "group", "simplex", "pdhg", "speed-up");
    for g in &report.groups {
        let _ = writeln!(
            out,
            "{:<12} {:>12.1} {:>12.1} {:>10}",
            g.group,
            g.simplex.mean_ms,
            g.pdhg.mean_ms,
            opt(g.speedup, 2)
        );
    }
    let _ = writeln!(out, "\nMean stage breakdown (ms)");
    let _ = writeln!(
        out,
        "{:<12} {:<8} {:>10} {:>11} {:>10} {:>10} {:>8}",
        "group", "engine", "presolve", "relaxation", "crossover", "b&b", "nodes"
    );
    for g in &report.groups {
        for (name, t) in [("simplex", &g.simplex), ("pdhg", &g.pdhg)] {
            let _ = writeln!(
                out,
                "{:<12} {:<8} {:>10.2} {:>11.2} {:>10.2} {:>10.2} {:>8.1}",
                g.group,
                name,
                t.mean_presolve_ms,
                t.mean_relaxation_ms,
                t.mean_crossover_ms,
                t.mean_branch_and_bound_ms,
                t.mean_nodes
            );
        }
    }
    let s = &report.scores;
    let _ = writeln!(out, "\nScore distribution (pdhg vs simplex)");
    let _ = writeln!(out, "{:<22} {:>6}", "bucket", "count");
    let _ = writeln!(out, "{:<22} {:>6}", "score >= 1", s.at_least_one);
    let _ = writeln!(out, "{:<22} {:>6}", "0.999 < score < 1", s.near_one);
    let _ = writeln!(out, "{:<22} {:>6}", "score <= 0.999", s.below);
    let _ = writeln!(out, "{:<22} {:>6}", "undefined", s.undefined);
    let _ = writeln!(out, "{:<22} {:>6}", "mean", opt(s.mean, 6));
    out
}
