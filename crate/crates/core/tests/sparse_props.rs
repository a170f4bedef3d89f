use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ucsolve::sparse::{dot, CsrMatrix};

fn triplets(max_dim: usize) -> impl Strategy<Value = (usize, usize, Vec<(usize, usize, f64)>)> {
    (1..max_dim, 1..max_dim).prop_flat_map(|(m, n)| {
        let entry = (0..m, 0..n, -1e6f64..1e6);
        (Just(m), Just(n), prop::collection::vec(entry, 0..3 * (m + n)))
    })
}

proptest! {
    #[test]
    fn adjoint_identity((m, n, t) in triplets(12), seed in any::<u64>()) {
        let a = CsrMatrix::from_triplets(m, n, &t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1e6..1e6)).collect();
        let y: Vec<f64> = (0..m).map(|_| rng.gen_range(-1e6..1e6)).collect();
        let lhs = dot(&y, &a.spmv(&x).unwrap());
        let rhs = dot(&a.spmv_transpose(&y).unwrap(), &x);
        // Scale by the sum of absolute products, the natural size of either side.
        let mag: f64 = t.iter().map(|&(i, j, v)| (y[i] * v * x[j]).abs()).sum::<f64>().max(1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * mag, "{lhs} vs {rhs}");
    }

    #[test]
    fn triplets_expand_to_dense_sum((m, n, t) in triplets(10)) {
        let a = CsrMatrix::from_triplets(m, n, &t).unwrap();
        let mut dense = vec![vec![0.0; n]; m];
        // Same order as the input, so sums round identically.
        for &(i, j, v) in &t {
            dense[i][j] += v;
        }
        prop_assert_eq!(a.to_dense(), dense);
        let starts = a.row_starts();
        prop_assert_eq!(starts[0], 0);
        prop_assert_eq!(starts[m], a.nnz());
        for i in 0..m {
            let (idx, vals) = a.row(i);
            prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(vals.iter().all(|&v| v != 0.0));
        }
    }

    #[test]
    fn transpose_matvec_matches_explicit_transpose((m, n, t) in triplets(10)) {
        let a = CsrMatrix::from_triplets(m, n, &t).unwrap();
        let y: Vec<f64> = (0..m).map(|i| i as f64 - 2.5).collect();
        let implicit = a.spmv_transpose(&y).unwrap();
        let explicit = a.transpose().spmv(&y).unwrap();
        for (u, v) in implicit.iter().zip(&explicit) {
            prop_assert!((u - v).abs() <= 1e-9 * (1.0 + v.abs()));
        }
    }
}

fn random_dense(m: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| {
            (0..n)
                .map(|_| if rng.gen_bool(0.3) { rng.gen_range(-1.0..1.0) } else { 0.0 })
                .collect()
        })
        .collect()
}

#[test]
fn spectral_norm_matches_dense_eigensolve() {
    let rows = random_dense(50, 80, 11);
    let a = CsrMatrix::from_dense(&rows);
    let dense = DMatrix::from_fn(50, 80, |i, j| rows[i][j]);
    let ata = dense.transpose() * &dense;
    let exact = ata
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(0.0f64, f64::max)
        .sqrt();
    let est = a.spectral_norm_estimate(200, 1e-6, 0);
    assert!(((est - exact) / exact).abs() < 1e-4, "estimate {est}, exact {exact}");
    assert!(est <= exact * (1.0 + 1e-12));
}

#[test]
fn spectral_norm_is_reproducible() {
    let a = CsrMatrix::from_dense(&random_dense(30, 20, 5));
    let first = a.spectral_norm_estimate(200, 1e-6, 42);
    for _ in 0..3 {
        assert_eq!(first.to_bits(), a.spectral_norm_estimate(200, 1e-6, 42).to_bits());
    }
}
