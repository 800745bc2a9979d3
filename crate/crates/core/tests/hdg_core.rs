use hdg_stokes::exact::{ExactSolution, ManufacturedFlow, Poly2, PolynomialFlow, ZeroFlow};
use hdg_stokes::hdg::{
    assemble, assemble_exact, consistency_residual, divergence_residual, local_forms, solve_full, HdgSolution,
    ReferenceTables, SpaceSpec, Stabilization,
};
use hdg_stokes::mesh::Point2;
use hdg_stokes::Mesh64 as Mesh;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_flow(k: usize, rng: &mut ChaCha8Rng) -> PolynomialFlow<f64> {
    let dim = |d: usize| (d + 1) * (d + 2) / 2;
    let psi = Poly2::from_coeffs(k + 2, (0..dim(k + 2)).map(|_| rng.gen_range(-1.0..1.0)).collect());
    let p = Poly2::from_coeffs(k, (0..dim(k)).map(|_| rng.gen_range(-1.0..1.0)).collect());
    PolynomialFlow::from_stream_function(&psi, &p)
}

#[test]
fn zero_data_gives_zero_solution() {
    let mesh = Mesh::structured_unit_square(3).unwrap();
    for k in 0..=2 {
        let spec = SpaceSpec::new(k).unwrap();
        let sys = assemble_exact(&mesh, &spec, &ZeroFlow).unwrap();
        let sol = solve_full(&sys).unwrap();
        assert_eq!(sol.max_abs(), 0.0);
        assert_eq!(sol.report.unwrap().relative_residual, 0.0);
    }
}

#[test]
fn system_dimension_k0_structured2() {
    let mesh = Mesh::structured_unit_square(2).unwrap();
    let spec = SpaceSpec::new(0).unwrap();
    let sys = assemble_exact(&mesh, &spec, &ManufacturedFlow).unwrap();
    assert_eq!(sys.matrix.nrows(), 73);
    assert_eq!(sys.rhs.len(), 73);
}

#[test]
fn assembled_matrix_is_symmetric() {
    for n in [2, 4] {
        let mesh = Mesh::structured_unit_square(n).unwrap();
        for k in 0..=2 {
            let spec = SpaceSpec::new(k).unwrap();
            let sys = assemble_exact(&mesh, &spec, &ManufacturedFlow).unwrap();
            assert!(sys.matrix.symmetry_defect() <= 1e-12 * sys.matrix.max_abs());
        }
    }
}

#[test]
fn polynomial_pairs_are_reproduced() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mesh = Mesh::structured_unit_square(2).unwrap();
    for k in 0..=2 {
        for _ in 0..3 {
            let flow = random_flow(k, &mut rng);
            let spec = SpaceSpec::new(k).unwrap();
            let sys = assemble_exact(&mesh, &spec, &flow).unwrap();
            let sol = solve_full(&sys).unwrap();
            let reference = HdgSolution::project(&mesh, &spec, &flow).unwrap();
            let d = sol.max_diff_parts(&reference);
            assert!(d.iter().all(|&v| v <= 1e-9), "k={k}: {d:?}");
            assert!(sol.pressure_integral().abs() <= 1e-10);
            assert!(divergence_residual(&sys, &sol) <= 1e-9 * sys.data_norm);
        }
    }
}

#[test]
fn solution_is_linear_in_data() {
    let mesh = Mesh::structured_unit_square(4).unwrap();
    let spec = SpaceSpec::new(1).unwrap();
    let f = |x: Point2<f64>| ExactSolution::<f64>::forcing(&ManufacturedFlow, x);
    let f2 = |x: Point2<f64>| {
        let v = f(x);
        [2.0 * v[0], 2.0 * v[1]]
    };
    let g = |_: Point2<f64>| [0.0, 0.0];
    let s1 = solve_full(&assemble(&mesh, &spec, &f, &g).unwrap()).unwrap();
    let s2 = solve_full(&assemble(&mesh, &spec, &f2, &g).unwrap()).unwrap();
    let mut doubled = s1.clone();
    for v in doubled.u.iter_mut().chain(doubled.uhat.iter_mut()).chain(doubled.p.iter_mut()) {
        v.iter_mut().for_each(|x| *x *= 2.0);
    }
    assert!(s2.max_diff(&doubled) <= 1e-12 * s2.max_abs());
}

#[test]
fn linear_flow_consistency_residual() {
    // u = (y, x), p = x + y − 1, f = (1, 1).
    let psi = Poly2::<f64>::from_terms(&[(0.5, 0, 2), (-0.5, 2, 0)]);
    let pr = Poly2::from_terms(&[(1.0, 1, 0), (1.0, 0, 1), (-1.0, 0, 0)]);
    let flow = PolynomialFlow::from_stream_function(&psi, &pr);
    assert_eq!(flow.forcing(Point2::new(0.3, 0.4)), [1.0, 1.0]);
    let mesh = Mesh::structured_unit_square(3).unwrap();
    let spec = SpaceSpec::new(0).unwrap();
    let r = consistency_residual(&flow, &mesh, &spec).unwrap();
    assert!(r.max() <= 1e-11, "{r:?}");
    let z = consistency_residual(&ZeroFlow, &mesh, &spec).unwrap();
    assert_eq!(z.max(), 0.0);
}

#[test]
fn trigonometric_consistency_improves_with_quadrature() {
    let mesh = Mesh::structured_unit_square(4).unwrap();
    for k in 0..=2 {
        let low = consistency_residual(&ManufacturedFlow, &mesh, &SpaceSpec::new(k).unwrap().quad_boost(0)).unwrap();
        let high = consistency_residual(&ManufacturedFlow, &mesh, &SpaceSpec::new(k).unwrap().quad_boost(4)).unwrap();
        assert!(high.max() < low.max(), "k={k}: {low:?} vs {high:?}");
    }
}

#[test]
fn reduced_quadrature_matches_projection() {
    let mesh = Mesh::structured_unit_square(2).unwrap();
    for k in 0..=2 {
        let proj = SpaceSpec::new(k).unwrap();
        let red = proj.stabilization(Stabilization::ReducedQuadrature);
        let full = proj.stabilization(Stabilization::Unprojected);
        let tp = ReferenceTables::new(&proj).unwrap();
        for e in 0..mesh.num_triangles() {
            let a = local_forms(&mesh, e, &proj, &tp).unwrap().matrix;
            let b = local_forms(&mesh, e, &red, &tp).unwrap().matrix;
            let c = local_forms(&mesh, e, &full, &tp).unwrap().matrix;
            let mut d_red: f64 = 0.0;
            let mut d_full: f64 = 0.0;
            for i in 0..a.rows() {
                for j in 0..a.cols() {
                    d_red = d_red.max((a[(i, j)] - b[(i, j)]).abs());
                    d_full = d_full.max((a[(i, j)] - c[(i, j)]).abs());
                }
            }
            assert!(d_red <= 1e-12 * a.max_abs(), "k={k}: {d_red}");
            // Only the degree-(k+1) trace part differs, which the full
            // penalty does see.
            assert!(d_full > 1e-6);
        }
    }
}

#[test]
fn constants_lie_in_the_kernel_of_a_h() {
    let mesh = Mesh::structured_unit_square(2).unwrap();
    for k in 0..=2 {
        let spec = SpaceSpec::new(k).unwrap();
        let tables = ReferenceTables::new(&spec).unwrap();
        let lf = local_forms(&mesh, 3, &spec, &tables).unwrap();
        let nu = spec.nu();
        let nf = spec.nf();
        // v = (a, b) constant: coefficient a/√2 on φ₀; v̂ = (a, b): coefficient a·√2 on L₀.
        let (a, b) = (0.7, -1.3);
        let mut x = vec![0.0; lf.dim()];
        x[0] = a / 2f64.sqrt();
        x[nu] = b / 2f64.sqrt();
        for s in 0..3 {
            let r = lf.edge_range(s);
            x[r.start] = a * 2f64.sqrt();
            x[r.start + nf] = b * 2f64.sqrt();
        }
        let n = lf.p_range().start;
        let mut val = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                val += x[i] * lf.matrix[(i, j)] * x[j];
            }
        }
        assert!(val.abs() < 1e-12, "k={k}: {val}");
    }
}
