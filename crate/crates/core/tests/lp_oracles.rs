use ucsolve::lpgen::{random_suite, RandomLpConfig};
use ucsolve::model::StandardLp;
use ucsolve::pdlp::{pdhg_step, residuals, solve_lp, LpStatus, PdhgParams, PdhgState};
use ucsolve::simplex::{crossover, simplex_solve, BasicSolution, SimplexStatus, CLASSIFY_TOL};
use ucsolve::sparse::{dot, norm_inf};

fn suite() -> Vec<StandardLp> {
    random_suite(12, 7000, &RandomLpConfig { min_dim: 8, max_dim: 40, density: 0.2 })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Independent optimality certificate: primal and dual feasibility plus
/// equal objectives.
fn assert_certified(p: &StandardLp, s: &BasicSolution) {
    assert_eq!(s.status, SimplexStatus::Optimal);
    assert!(p.max_violation(&s.x) <= 1e-8);
    assert!(s.y.iter().all(|&v| v >= -1e-9));
    let aty = p.a.spmv_transpose(&s.y).unwrap();
    for (j, (&c, &a)) in p.c.iter().zip(&aty).enumerate() {
        assert!(a <= c + 1e-8 * (1.0 + c.abs()), "dual row {j}: {a} > {c}");
    }
    let (primal, dual) = (dot(&p.c, &s.x), dot(&p.b, &s.y));
    assert!(rel(primal, dual) < 1e-9, "{primal} vs {dual}");
}

fn assert_vertex(p: &StandardLp, s: &BasicSolution) {
    let (n, m) = (p.num_vars(), p.num_rows());
    assert_eq!(s.basis.len(), m);
    let mut in_basis = vec![false; n + m];
    for &j in &s.basis {
        assert!(!in_basis[j], "column {j} twice in basis");
        in_basis[j] = true;
    }
    for j in 0..n {
        assert!(s.x[j] >= 0.0);
        if !in_basis[j] {
            assert_eq!(s.x[j], 0.0);
        }
    }
    let ax = p.a.spmv(&s.x).unwrap();
    for i in 0..m {
        assert!((ax[i] - p.b[i] - s.surplus[i]).abs() <= 1e-8 * (1.0 + p.b[i].abs()));
        assert!(s.surplus[i] >= 0.0);
    }
    let nonzeros = s.x.iter().chain(&s.surplus).filter(|&&v| v != 0.0).count();
    assert!(nonzeros <= m);
}

#[test]
fn simplex_solutions_are_certified_vertices() {
    for p in suite() {
        let s = simplex_solve(&p, None).unwrap();
        assert_certified(&p, &s);
        assert_vertex(&p, &s);
    }
}

#[test]
fn oracle_pair_is_a_pdhg_fixed_point_with_zero_residuals() {
    for p in suite() {
        let s = simplex_solve(&p, None).unwrap();
        let r = residuals(&p, &s.x, &s.y);
        assert!(r.rel_primal_res <= 1e-9 && r.rel_dual_res <= 1e-9 && r.rel_gap <= 1e-9);
        let eta = 0.9 / p.a.spectral_norm();
        let state = PdhgState::new(&p, &s.x, &s.y, eta, eta).unwrap();
        let next = pdhg_step(&state, &p).unwrap();
        for (a, b) in next.x.iter().zip(&s.x).chain(next.y.iter().zip(&s.y)) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }
}

#[test]
fn pdhg_invariants_on_suite() {
    let params = PdhgParams::default();
    for p in suite() {
        let sol = solve_lp(&p, &params, None).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        let bound = params.eta_safety * params.eta_safety;
        assert!(sol.tau * sol.sigma * sol.norm_estimate.powi(2) <= bound * (1.0 + 1e-12));
        for w in sol.restart_gaps.windows(2) {
            assert!(w[1] <= params.restart_trigger_ratio * w[0]);
        }
        let r = sol.report;
        let slack = 3.0 * params.eps_rel * (1.0 + r.primal_obj.abs() + r.dual_obj.abs());
        assert!(r.dual_obj <= r.primal_obj + slack);
        let again = solve_lp(&p, &params, None).unwrap();
        assert_eq!(sol, again);
        assert!(sol.x.iter().chain(&sol.y).all(|&v| v >= 0.0));
        let oracle = simplex_solve(&p, None).unwrap();
        assert!(rel(r.primal_obj, oracle.objective) < 1e-5);
    }
}

#[test]
fn crossover_matches_cold_simplex() {
    let params = PdhgParams::default();
    for p in suite() {
        let sol = solve_lp(&p, &params, None).unwrap();
        let cold = simplex_solve(&p, None).unwrap();
        let c = crossover(&p, &sol.x, &sol.y, CLASSIFY_TOL).unwrap();
        assert_certified(&p, &c.solution);
        assert_vertex(&p, &c.solution);
        assert!(rel(c.solution.objective, cold.objective) < 1e-9);
        assert!(norm_inf(&c.solution.x).is_finite());
    }
}

#[test]
fn warm_start_from_optimum_stops_immediately() {
    let params = PdhgParams::default();
    for p in suite().into_iter().take(4) {
        let s = simplex_solve(&p, None).unwrap();
        let sol = solve_lp(&p, &params, Some((&s.x, &s.y))).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.iterations, 0);
    }
}
