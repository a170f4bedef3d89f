//! The `solve` subcommand: one instance, one engine.

use std::fmt::Write;
use std::path::Path;

use anyhow::{Context, Result};
use ucsolve::bnb::{solve_milp, BnbParams, MilpProblem, MilpSolution, MilpStatus};
use ucsolve::model::read_mps;
use ucsolve::pdlp::format_log_rows;
use ucsolve::ucgen::{to_milp, UcInstance};

use crate::bench::status_name;

/// Reads an MPS file, or a JSON instance when the extension is `.json`.
pub fn load_instance(path: &Path) -> Result<MilpProblem> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        let inst = UcInstance::from_json(std::str::from_utf8(&bytes)?)
            .with_context(|| format!("parsing {}", path.display()))?;
        return Ok(to_milp(&inst));
    }
    let lp = read_mps(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    Ok(MilpProblem::new(lp)?)
}

/// Process exit code for a finished solve.
pub fn exit_code(status: MilpStatus) -> i32 {
    match status {
        MilpStatus::Optimal => 0,
        MilpStatus::NodeLimit | MilpStatus::TimeLimit => 2,
        MilpStatus::Infeasible => 3,
    }
}

pub fn solve(problem: &MilpProblem, params: &BnbParams) -> Result<MilpSolution> {
    Ok(solve_milp(problem, params)?)
}

/// Everything that is reproducible about a solve: the root PDHG log, the
/// outcome and the incumbent. Timings are left out.
pub fn render_solution(problem: &MilpProblem, sol: &MilpSolution) -> String {
    let mut out = String::new();
    let lp = &problem.base;
    let _ = writeln!(
        out,
        "instance {}: {} variables ({} binary), {} constraints",
        lp.name,
        lp.num_vars(),
        problem.binary_set.len(),
        lp.num_rows()
    );
    if !sol.root_log.is_empty() {
        let _ = writeln!(out, "root relaxation (PDHG)");
        out.push_str(&format_log_rows(&sol.root_log));
    }
    let _ = writeln!(out, "status {}", status_name(sol.status));
    match sol.objective {
        Some(v) => writeln!(out, "objective {v}"),
        None => writeln!(out, "objective none"),
    }
    .ok();
    let _ = writeln!(out, "best_bound {}", sol.best_bound);
    let _ = writeln!(out, "root_bound {}", sol.root_bound);
    let _ = writeln!(out, "nodes {}", sol.nodes_explored);
    let _ = writeln!(out, "relaxation_iterations {}", sol.relaxation_iterations);
    let _ = writeln!(out, "cleanup_iterations {}", sol.cleanup_iterations);
    let _ = writeln!(out, "failed_nodes {}", sol.failed_nodes);
    if let Some(x) = &sol.incumbent_x {
        let _ = writeln!(out, "solution");
        for (name, v) in lp.var_names.iter().zip(x) {
            let _ = writeln!(out, "{name:<10} {v}");
        }
    }
    out
}

pub fn render_stage_times(sol: &MilpSolution) -> String {
    let t = &sol.stage_times;
    let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
    format!(
        "stage times (ms): presolve {:.3}  relaxation {:.3}  crossover {:.3}  branch_and_bound {:.3}  total {:.3}\n",
        ms(t.presolve),
        ms(t.relaxation),
        ms(t.crossover),
        ms(t.branch_and_bound),
        ms(sol.total_time)
    )
}
