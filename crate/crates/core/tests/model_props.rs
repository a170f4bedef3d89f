use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ucsolve::lpgen::{random_suite, RandomLpConfig};
use ucsolve::model::{
    canonicalize, postsolve, presolve, read_mps, ruiz_scale, write_mps, GeneralLp, Relation, Sense,
    StandardLp, VarKind, RUIZ_PASSES,
};
use ucsolve::simplex::{simplex_solve, SimplexStatus};
use ucsolve::sparse::CsrMatrix;
use ucsolve::ucgen::{generate_instance, to_milp, Division, Horizon, UcConfig};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Small bounded feasible LP with every bound and relation type.
fn random_general(seed: u64) -> GeneralLp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sense = if rng.gen_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    let mut p = GeneralLp::new(format!("G{seed}"), sense);
    let n = 3;
    let mut x0 = Vec::new();
    for j in 0..n {
        let v = rng.gen_range(-3.0f64..3.0).round();
        let (lo, up) = match rng.gen_range(0..4) {
            0 => (v.min(0.0), f64::INFINITY),
            1 => (v - 2.0, v + 1.0),
            2 => (f64::NEG_INFINITY, v + 1.0),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        };
        let v = if lo == 0.0 { v.max(0.0) } else { v };
        x0.push(v);
        p.add_var(format!("x{j}"), rng.gen_range(-5.0f64..5.0).round(), lo, up, VarKind::Continuous);
    }
    p.constant = 1.5;
    for i in 0..4 {
        let coeffs: Vec<(usize, f64)> = (0..n).map(|j| (j, rng.gen_range(-3.0f64..3.0).round())).collect();
        let ax0: f64 = coeffs.iter().map(|&(j, a)| a * x0[j]).sum();
        let rel = [Relation::Le, Relation::Ge, Relation::Eq][rng.gen_range(0..3)];
        let rhs = match rel {
            Relation::Le => ax0 + rng.gen_range(0.0f64..2.0).round(),
            Relation::Ge => ax0 - rng.gen_range(0.0f64..2.0).round(),
            Relation::Eq => ax0,
        };
        p.add_row(format!("r{i}"), coeffs, rel, rhs);
    }
    // Box rows keep the problem bounded whatever the variable bounds are.
    for j in 0..n {
        p.add_row(format!("b{j}"), vec![(j, 1.0)], Relation::Le, 20.0);
        p.add_row(format!("c{j}"), vec![(j, 1.0)], Relation::Ge, -20.0);
    }
    p
}

/// Best objective over all vertices: every choice of `n` constraints (rows
/// or finite bounds) held with equality, solved densely.
fn vertex_oracle(p: &GeneralLp) -> f64 {
    let n = p.num_vars();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for r in &p.rows {
        let mut a = vec![0.0; n];
        for &(j, v) in &r.coeffs {
            a[j] += v;
        }
        planes.push((a, r.rhs));
    }
    for j in 0..n {
        for b in [p.lower[j], p.upper[j]] {
            if b.is_finite() {
                let mut a = vec![0.0; n];
                a[j] = 1.0;
                planes.push((a, b));
            }
        }
    }
    let better = |a: f64, b: f64| match p.sense {
        Sense::Minimize => a < b,
        Sense::Maximize => a > b,
    };
    let mut best: Option<f64> = None;
    let k = planes.len();
    for i0 in 0..k {
        for i1 in i0 + 1..k {
            for i2 in i1 + 1..k {
                let idx = [i0, i1, i2];
                let m = DMatrix::from_fn(3, 3, |r, c| planes[idx[r]].0[c]);
                let rhs = DVector::from_fn(3, |r, _| planes[idx[r]].1);
                let Some(x) = m.lu().solve(&rhs) else { continue };
                let x: Vec<f64> = x.iter().copied().collect();
                if p.max_violation(&x) > 1e-9 {
                    continue;
                }
                let obj = p.objective_at(&x);
                if best.is_none_or(|b| better(obj, b)) {
                    best = Some(obj);
                }
            }
        }
    }
    best.expect("feasible bounded instance has a vertex")
}

#[test]
fn canonicalize_preserves_optimum() {
    for seed in 0..60 {
        let p = random_general(seed);
        let s = canonicalize(&p).unwrap();
        let sol = simplex_solve(&s, None).unwrap();
        assert_eq!(sol.status, SimplexStatus::Optimal, "seed {seed}");
        let (x, obj) = postsolve(&s, &sol.x).unwrap();
        assert!(p.max_violation(&x) < 1e-8, "seed {seed}");
        assert!(rel(obj, s.original_objective(sol.objective)) < 1e-12);
        let oracle = vertex_oracle(&p);
        assert!(rel(obj, oracle) < 1e-9, "seed {seed}: {obj} vs {oracle}");
    }
}

fn suite() -> Vec<StandardLp> {
    random_suite(20, 500, &RandomLpConfig { min_dim: 5, max_dim: 40, density: 0.3 })
}

#[test]
fn ruiz_scaling_preserves_optimum() {
    for (k, p) in suite().iter().enumerate() {
        let plain = simplex_solve(p, None).unwrap();
        let (scaled, diag) = ruiz_scale(p, RUIZ_PASSES);
        let s = simplex_solve(&scaled, None).unwrap();
        assert_eq!(s.status, SimplexStatus::Optimal);
        let x = diag.unscale_primal(&s.x);
        assert!(p.max_violation(&x) < 1e-8, "instance {k}");
        assert!(rel(p.objective(&x), plain.objective) < 1e-6, "instance {k}");
        let (_, via_log) = postsolve(&scaled, &s.x).unwrap();
        assert!(rel(via_log, plain.objective) < 1e-6);
    }
}

/// Adds an empty row with `b ≤ 0`, an empty zero-cost column and a copy of
/// row 0 with a weaker right-hand side.
fn with_redundancy(p: &StandardLp) -> StandardLp {
    let (m, n) = (p.num_rows(), p.num_vars());
    let mut t = Vec::new();
    for i in 0..m {
        let (idx, vals) = p.a.row(i);
        for (&j, &v) in idx.iter().zip(vals) {
            t.push((i, j, v));
        }
    }
    let (idx0, vals0) = p.a.row(0);
    for (&j, &v) in idx0.iter().zip(vals0) {
        t.push((m + 1, j, v));
    }
    let a = CsrMatrix::from_triplets(m + 2, n + 1, &t).unwrap();
    let mut b = p.b.clone();
    b.push(-1.0);
    b.push(p.b[0] - 3.0);
    let mut c = p.c.clone();
    c.push(0.0);
    StandardLp::new(c, a, b).unwrap()
}

#[test]
fn presolve_preserves_optimum() {
    for (k, p) in suite().iter().enumerate() {
        let padded = with_redundancy(p);
        let reduced = presolve(&padded).unwrap();
        assert!(reduced.num_rows() <= p.num_rows());
        assert!(reduced.num_vars() <= p.num_vars());
        let oracle = simplex_solve(&padded, None).unwrap();
        let s = simplex_solve(&reduced, None).unwrap();
        let (x, obj) = postsolve(&reduced, &s.x).unwrap();
        assert!(padded.max_violation(&x) < 1e-8, "instance {k}");
        assert!(rel(obj, oracle.objective) < 1e-9, "instance {k}");
    }
}

fn assert_same_shape(a: &GeneralLp, b: &GeneralLp) {
    assert_eq!(a.num_vars(), b.num_vars());
    assert_eq!(a.num_rows(), b.num_rows());
    assert_eq!(a.lower, b.lower);
    assert_eq!(a.upper, b.upper);
    assert_eq!(a.kinds, b.kinds);
}

#[test]
fn mps_round_trip_of_generated_instances() {
    for (units, horizon, seed) in [(2, Horizon::Steps(3), 1), (3, Horizon::Division(Division::D1), 2)] {
        let milp = to_milp(&generate_instance(&UcConfig::new(units, horizon, seed)));
        let back = read_mps(&write_mps(&milp.base).unwrap()).unwrap();
        assert_same_shape(&milp.base, &back);
        assert_eq!(back.costs, milp.base.costs);
        for (r, o) in back.rows.iter().zip(&milp.base.rows) {
            let mut sorted = o.coeffs.clone();
            sorted.sort_by_key(|&(j, _)| j);
            let mut got = r.coeffs.clone();
            got.sort_by_key(|&(j, _)| j);
            assert_eq!((&r.name, got, r.relation, r.rhs), (&o.name, sorted, o.relation, o.rhs));
        }
    }
    for seed in 0..10 {
        let p = random_general(seed);
        let back = read_mps(&write_mps(&p).unwrap()).unwrap();
        assert_same_shape(&p, &back);
        assert_eq!(back.sense, p.sense);
        assert_eq!(back.constant, p.constant);
    }
}
