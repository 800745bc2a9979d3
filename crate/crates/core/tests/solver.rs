use hdg_stokes::dense::{DenseLu, DenseMatrix};
use hdg_stokes::solver::{solve_sparse, CsrMatrix, LuOptions, OrderingKind, SparseLu, SparseMatrix};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sparse symmetric indefinite matrix: random ±diagonal plus off-diagonal couplings.
fn random_indefinite(n: usize, seed: u64) -> CsrMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coo = SparseMatrix::new(n, n);
    for i in 0..n {
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        coo.push(i, i, sign * rng.gen_range(0.5..2.0));
        for _ in 0..3 {
            let j = rng.gen_range(0..n);
            if j != i {
                let v = rng.gen_range(-1.0..1.0);
                coo.push(i, j, v);
                coo.push(j, i, v);
            }
        }
    }
    coo.to_csr()
}

fn rhs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn sparse_lu_agrees_with_dense_lu() {
    for seed in 0..5 {
        let a = random_indefinite(50, seed);
        assert!(a.symmetry_defect() == 0.0);
        let b = rhs(50, 100 + seed);
        let dense = DenseLu::new(a.to_dense()).unwrap().solve(&b);
        for ordering in [OrderingKind::Natural, OrderingKind::NestedDissection] {
            let opts = LuOptions { ordering, ..LuOptions::default() };
            let (x, report) = solve_sparse(&a, &b, &opts).unwrap();
            let scale = dense.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let diff = x.iter().zip(&dense).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
            assert!(diff <= 1e-10 * scale, "seed {seed}: {diff}");
            assert!(report.relative_residual <= 1e-12, "seed {seed}: {report:?}");
            // Independent residual.
            let r = a.matvec(&x);
            let res = r.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(res / bn <= 1e-12);
        }
    }
}

#[test]
fn repeated_solves_are_bit_identical() {
    let a = random_indefinite(60, 7);
    let b = rhs(60, 8);
    let lu = SparseLu::factorize(&a, &LuOptions::default()).unwrap();
    let (x1, _) = lu.solve(&b).unwrap();
    let (x2, _) = lu.solve(&b).unwrap();
    let (x3, _) = solve_sparse(&a, &b, &LuOptions::default()).unwrap();
    assert_eq!(x1, x2);
    assert_eq!(x1, x3);
}

#[test]
fn zero_rhs_gives_zero_solution() {
    let a = random_indefinite(30, 3);
    let (x, report) = solve_sparse(&a, &vec![0.0; 30], &LuOptions::default()).unwrap();
    assert!(x.iter().all(|&v| v == 0.0));
    assert_eq!(report.relative_residual, 0.0);
}

#[test]
fn saddle_point_without_diagonal_in_the_constraint_block() {
    // [I  B^T; B 0] with B = [1 1 0; 0 1 1].
    let d = DenseMatrix::<f64>::from_fn(5, 5, |i, j| match (i, j) {
        (i, j) if i == j && i < 3 => 2.0,
        (3, 0) | (3, 1) | (0, 3) | (1, 3) => 1.0,
        (4, 1) | (4, 2) | (1, 4) | (2, 4) => 1.0,
        _ => 0.0,
    });
    let a = CsrMatrix::from_dense(&d);
    let b = [1.0, -2.0, 3.0, 0.5, -0.5];
    let (x, report) = solve_sparse(&a, &b, &LuOptions::default()).unwrap();
    let expected = DenseLu::new(d).unwrap().solve(&b);
    for (p, q) in x.iter().zip(&expected) {
        assert!((p - q).abs() < 1e-13);
    }
    assert!(report.relative_residual < 1e-14);
}

proptest! {
    #[test]
    fn coo_assembly_is_order_independent(
        entries in prop::collection::vec((0usize..8, 0usize..8, -20i32..20), 1..60),
        seed in any::<u64>(),
    ) {
        // Integer values make every summation order exact.
        let mut a = SparseMatrix::new(8, 8);
        a.extend(entries.iter().map(|&(i, j, v)| (i, j, f64::from(v))));
        let mut shuffled = entries.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut b = SparseMatrix::new(8, 8);
        b.extend(shuffled.iter().map(|&(i, j, v)| (i, j, f64::from(v))));
        let (ca, cb) = (a.to_csr(), b.to_csr());
        prop_assert_eq!(&ca, &cb);
        let mut dense = [[0.0f64; 8]; 8];
        for &(i, j, v) in &entries {
            dense[i][j] += f64::from(v);
        }
        for (i, row) in dense.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                prop_assert_eq!(ca.get(i, j), v);
            }
        }
    }
}
