//! End-to-end acceptance checks, one PASS/FAIL line per criterion.

use std::process::Command;
use std::time::Instant;

use ucsolve::bnb::{brute_force, solve_milp, BnbParams, MilpStatus, RelaxationEngine};
use ucsolve::lpgen::{random_suite, RandomLpConfig};
use ucsolve::model::{ruiz_scale, write_mps, StandardLp, RUIZ_PASSES};
use ucsolve::pdlp::{pdhg_step, residuals, solve_lp, solve_lp_scaled, LpSolution, PdhgParams, PdhgState};
use ucsolve::simplex::{crossover, simplex_solve, BasicSolution, DenseLu, CLASSIFY_TOL};
use ucsolve::ucgen::{count_profile, generate_instance, to_milp, Division, Horizon, UcConfig};
use ucsolve_harness::bench::run_suite;
use ucsolve_harness::suite::{default_suite, Engine};

type Check = Result<String, String>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

struct LpCase {
    prob: StandardLp,
    oracle: BasicSolution,
    pdhg: LpSolution,
}

fn lp_cases() -> (Vec<LpCase>, f64) {
    let start = Instant::now();
    let params = PdhgParams::default();
    let cases = random_suite(50, 0, &RandomLpConfig::default())
        .into_iter()
        .map(|prob| {
            let oracle = simplex_solve(&prob, None).expect("oracle solves");
            let pdhg = solve_lp(&prob, &params, None).expect("pdhg runs");
            LpCase { prob, oracle, pdhg }
        })
        .collect();
    (cases, start.elapsed().as_secs_f64())
}

fn criterion_1(cases: &[LpCase], secs: f64) -> Check {
    let mut worst: f64 = 0.0;
    for (k, c) in cases.iter().enumerate() {
        let obj = c.prob.objective(&c.pdhg.x);
        let err = rel(obj, c.oracle.objective);
        worst = worst.max(err);
        if err > 1e-5 {
            return Err(format!("LP {k}: relative error {err:.2e} ({:?})", c.pdhg.status));
        }
    }
    if secs >= 60.0 {
        return Err(format!("suite took {secs:.1} s"));
    }
    Ok(format!("50/50 within 1e-5 (worst {worst:.2e}), {secs:.2} s"))
}

fn criterion_2(cases: &[LpCase]) -> Check {
    let mut drift: f64 = 0.0;
    let mut res: f64 = 0.0;
    for (k, c) in cases.iter().enumerate() {
        let (x, y) = (&c.oracle.x, &c.oracle.y);
        let r = residuals(&c.prob, x, y);
        res = res.max(r.rel_primal_res).max(r.rel_dual_res).max(r.rel_gap);
        let eta = 0.9 / c.prob.a.spectral_norm();
        let state = PdhgState::new(&c.prob, x, y, eta, eta).map_err(|e| e.to_string())?;
        let next = pdhg_step(&state, &c.prob).map_err(|e| e.to_string())?;
        for (a, b) in next.x.iter().zip(x).chain(next.y.iter().zip(y)) {
            drift = drift.max((a - b).abs() / (1.0 + b.abs()));
        }
        if drift > 1e-12 || res > 1e-9 {
            return Err(format!("LP {k}: drift {drift:.2e}, residual {res:.2e}"));
        }
    }
    Ok(format!("max drift {drift:.2e}, max residual {res:.2e}"))
}

fn basis_factorizes(p: &StandardLp, basis: &[usize]) -> bool {
    let (n, m) = (p.num_vars(), p.num_rows());
    let cols: Vec<Vec<f64>> = basis
        .iter()
        .map(|&j| {
            if j < n {
                p.a.column_dense(j)
            } else {
                let mut e = vec![0.0; m];
                e[j - n] = -1.0;
                e
            }
        })
        .collect();
    DenseLu::factor(&cols).is_ok()
}

fn criterion_3(cases: &[LpCase], cleanup: &mut Vec<f64>) -> Check {
    let mut worst: f64 = 0.0;
    for (k, c) in cases.iter().enumerate() {
        let r = crossover(&c.prob, &c.pdhg.x, &c.pdhg.y, CLASSIFY_TOL).map_err(|e| format!("LP {k}: {e}"))?;
        let s = &r.solution;
        let viol = c.prob.max_violation(&s.x);
        let err = rel(s.objective, c.oracle.objective);
        worst = worst.max(err);
        if !basis_factorizes(&c.prob, &s.basis) || viol > 1e-8 || err > 1e-9 || s.x.iter().any(|&v| v < 0.0) {
            return Err(format!("LP {k}: violation {viol:.2e}, objective error {err:.2e}"));
        }
        cleanup.push(r.cleanup_iterations as f64);
    }
    Ok(format!("50/50 basic feasible, worst objective error {worst:.2e}"))
}

fn criterion_4(cases: &[LpCase], cleanup_at_default: &[f64]) -> Check {
    let cold = median(cases.iter().map(|c| c.oracle.iterations as f64).collect());
    let warm = median(cleanup_at_default.to_vec());
    let mut medians = Vec::new();
    for eps in [1e-2, 1e-4, 1e-6] {
        let params = PdhgParams { eps_rel: eps, ..PdhgParams::default() };
        let mut its = Vec::new();
        for c in cases {
            let sol = solve_lp(&c.prob, &params, None).map_err(|e| e.to_string())?;
            let r = crossover(&c.prob, &sol.x, &sol.y, CLASSIFY_TOL).map_err(|e| e.to_string())?;
            its.push(r.cleanup_iterations as f64);
        }
        medians.push(median(its));
    }
    let detail = format!(
        "median cleanup {warm} vs cold {cold}; cleanup medians at eps 1e-2/1e-4/1e-6 = {}/{}/{}",
        medians[0], medians[1], medians[2]
    );
    if warm <= cold && medians[0] >= medians[1] && medians[1] >= medians[2] {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_5() -> Check {
    let start = Instant::now();
    let mut feasible = 0;
    let mut worst: f64 = 0.0;
    for k in 0..20u64 {
        let (units, steps) = if k % 2 == 0 { (2, 2) } else { (1, 4) };
        let cfg = UcConfig::new(units, Horizon::Steps(steps), 300 + k);
        let milp = to_milp(&generate_instance(&cfg));
        if milp.binary_set.len() > 12 {
            return Err(format!("instance {k} has {} binaries", milp.binary_set.len()));
        }
        let oracle = brute_force(&milp).map_err(|e| e.to_string())?;
        feasible += oracle.is_some() as usize;
        for engine in [RelaxationEngine::Simplex, RelaxationEngine::PdhgCrossover] {
            let sol = solve_milp(&milp, &BnbParams::new(engine)).map_err(|e| e.to_string())?;
            match (&oracle, sol.status, sol.objective) {
                (Some((best, _)), MilpStatus::Optimal, Some(obj)) => {
                    worst = worst.max(rel(obj, *best));
                    if rel(obj, *best) > 1e-6 {
                        return Err(format!("instance {k} {engine:?}: {obj} vs {best}"));
                    }
                }
                (None, MilpStatus::Infeasible, None) => {}
                other => return Err(format!("instance {k} {engine:?}: {other:?}")),
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 120.0 {
        return Err(format!("suite took {secs:.1} s"));
    }
    Ok(format!("20/20 match ({feasible} feasible, worst {worst:.2e}), {secs:.2} s"))
}

fn criteria_6_7_9(dir: &std::path::Path) -> (Check, Check, Check) {
    let suite = default_suite(1);
    let first = match run_suite(&suite, dir, 1) {
        Ok(o) => o,
        Err(e) => {
            let msg = Err(format!("bench failed: {e:#}"));
            return (msg.clone(), msg.clone(), msg);
        }
    };
    let report = &first.report;
    let scores: Vec<f64> = report.scenario_scores.values().flatten().copied().collect();
    let c6 = {
        let all_in = scores.iter().all(|s| (0.999..=1.001).contains(s));
        let mean = report.scores.mean.unwrap_or(f64::NAN);
        let detail = format!(
            "{} scenarios, {} scored, >=1: {}, (0.999,1): {}, mean {mean:.6}",
            suite.len(),
            scores.len(),
            report.scores.at_least_one,
            report.scores.near_one
        );
        if suite.len() == 57 && scores.len() == 57 && all_in && (0.9995..=1.0005).contains(&mean) {
            Ok(detail)
        } else {
            Err(detail)
        }
    };
    let c7 = {
        let bad: Vec<String> = report
            .rows
            .iter()
            .filter(|r| {
                let crossover_ok = match r.engine {
                    Engine::Pdhg => r.crossover_ms > 0.0,
                    Engine::Simplex => r.crossover_ms == 0.0,
                };
                !(r.presolve_ms > 0.0
                    && r.relaxation_ms > 0.0
                    && r.branch_and_bound_ms > 0.0
                    && crossover_ok
                    && r.stage_sum_ms() <= 1.05 * r.total_ms)
            })
            .map(|r| format!("{}/{}", r.scenario, r.engine.as_str()))
            .collect();
        if bad.is_empty() {
            Ok(format!("{} rows with four stage durations within total", report.rows.len()))
        } else {
            Err(format!("bad rows: {}", bad.join(", ")))
        }
    };
    let c9 = (|| -> Check {
        let before = std::fs::read(dir.join("report.json")).map_err(|e| e.to_string())?;
        let again = run_suite(&suite, dir, 1).map_err(|e| e.to_string())?;
        let after = std::fs::read(dir.join("report.json")).map_err(|e| e.to_string())?;
        if again.solves != 0 || before != after {
            return Err(format!("resume performed {} solves", again.solves));
        }
        let milp = to_milp(&generate_instance(&suite[20].uc_config));
        let mps = dir.join("instance.mps");
        std::fs::write(&mps, write_mps(&milp.base).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        for engine in ["pdhg", "simplex"] {
            let run = || {
                Command::new(env!("CARGO_BIN_EXE_ucbench"))
                    .args(["solve", "--instance"])
                    .arg(&mps)
                    .args(["--engine", engine, "--eps", "1e-6", "--seed", "3", "--log-period", "50"])
                    .output()
                    .expect("ucbench runs")
            };
            let (a, b) = (run(), run());
            if a.status.code() != Some(0) || a.stdout != b.stdout || a.stdout.is_empty() {
                return Err(format!("solve --engine {engine} output differs or failed"));
            }
        }
        Ok("solve output byte-identical for both engines; resume did 0 solves, report unchanged".into())
    })();
    (c6, c7, c9)
}

fn criterion_8() -> Check {
    for units in [1, 5, 10, 50] {
        let c = |d| count_profile(&UcConfig::new(units, Horizon::Division(d), 0));
        let (d1, d2, d3) = (c(Division::D1), c(Division::D2), c(Division::D3));
        let ok = [
            (d1.binaries, d2.binaries, d3.binaries),
            (d1.continuous, d2.continuous, d3.continuous),
            (d1.constraints, d2.constraints, d3.constraints),
        ]
        .iter()
        .all(|&(a, b, c)| b * 18 == a * 48 && c * 18 == a * 42);
        if !ok {
            return Err(format!("{units} units: {d1:?} {d2:?} {d3:?}"));
        }
    }
    let c = count_profile(&UcConfig::new(10, Horizon::Division(Division::D1), 0));
    Ok(format!("exact 48/18 and 42/18 ratios; (10, D1) has {} binaries", c.binaries))
}

fn criterion_10(cases: &[LpCase]) -> Check {
    let mut worst_exact: f64 = 0.0;
    let mut worst_pipeline: f64 = 0.0;
    for (k, c) in cases.iter().enumerate() {
        let (scaled, diag) = ruiz_scale(&c.prob, RUIZ_PASSES);
        let s = simplex_solve(&scaled, None).map_err(|e| e.to_string())?;
        let x = diag.unscale_primal(&s.x);
        worst_exact = worst_exact.max(rel(c.prob.objective(&x), c.oracle.objective));
        let (sol, _) = solve_lp_scaled(&c.prob, &PdhgParams::default(), None, RUIZ_PASSES).map_err(|e| e.to_string())?;
        let v = crossover(&c.prob, &sol.x, &sol.y, CLASSIFY_TOL).map_err(|e| e.to_string())?;
        worst_pipeline = worst_pipeline.max(rel(v.solution.objective, c.oracle.objective));
        if worst_exact > 1e-6 || worst_pipeline > 1e-6 {
            return Err(format!("LP {k}: exact {worst_exact:.2e}, pipeline {worst_pipeline:.2e}"));
        }
    }
    Ok(format!(
        "scaled optimum worst {worst_exact:.2e}; scaled PDHG + crossover worst {worst_pipeline:.2e}"
    ))
}

fn main() {
    let (cases, secs) = lp_cases();
    let mut cleanup = Vec::new();
    let tmp = tempfile::tempdir().expect("temp dir");
    let c3 = criterion_3(&cases, &mut cleanup);
    let c4 = if cleanup.len() == cases.len() {
        criterion_4(&cases, &cleanup)
    } else {
        Err("crossover failed".into())
    };
    let (c6, c7, c9) = criteria_6_7_9(tmp.path());
    let results = [
        criterion_1(&cases, secs),
        criterion_2(&cases),
        c3,
        c4,
        criterion_5(),
        c6,
        c7,
        criterion_8(),
        c9,
        criterion_10(&cases),
    ];
    let mut failed = 0;
    for (k, r) in results.iter().enumerate() {
        match r {
            Ok(detail) => println!("criterion {:>2}: PASS  {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {detail}", k + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
