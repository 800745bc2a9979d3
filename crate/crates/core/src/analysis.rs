//! Error norms, convergence orders and a dense inf-sup estimator.
//!
//! The energy norm of (v, v̂) is
//! `|v|²_{1,h} + Σ_K h_K² |v|²_{2,K} + Σ_K Σ_{e⊂∂K} h_e⁻¹ ‖P_k(v̂ − v)‖²_{0,e}`.
//! For the error the facet component is u|_Γ − û_h, so the trace of u
//! cancels inside the jump and only the discrete pair is left.

use rayon::prelude::*;

use crate::basis::TriBasis;
use crate::dense::{symmetric_eigenvalues, DenseCholesky, DenseMatrix};
use crate::error::{Error, Result};
use crate::exact::{ExactSolution, ZeroFlow};
use crate::hdg::{
    local_forms, trace_projection_matrix, DofMap, EdgeSide, ElementGeometry, HdgSolution, ReferenceTables, SpaceSpec,
};
use crate::mesh::Mesh;
use crate::quadrature::tri_quadrature;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport<T> {
    pub h: T,
    pub l2_u: T,
    /// Broken H¹ seminorm.
    pub h1_u: T,
    /// (Σ_K h_K² |·|²_{2,K})^{1/2}.
    pub h2_weighted: T,
    pub jump: T,
    /// sqrt(h1² + h2_weighted² + jump²).
    pub energy: T,
    pub l2_p: T,
}

impl<T: Real> ErrorReport<T> {
    /// Energy norm over the same norm without the weighted H² part; at least 1.
    pub fn norm_equivalence_ratio(&self) -> T {
        let reduced = (self.h1_u * self.h1_u + self.jump * self.jump).sqrt();
        if reduced == T::zero() {
            T::one()
        } else {
            self.energy / reduced
        }
    }

    pub fn get(&self, column: ErrorColumn) -> T {
        match column {
            ErrorColumn::L2U => self.l2_u,
            ErrorColumn::H1U => self.h1_u,
            ErrorColumn::H2Weighted => self.h2_weighted,
            ErrorColumn::Jump => self.jump,
            ErrorColumn::Energy => self.energy,
            ErrorColumn::L2P => self.l2_p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorColumn {
    L2U,
    H1U,
    H2Weighted,
    Jump,
    Energy,
    L2P,
}

impl ErrorColumn {
    pub const ALL: [ErrorColumn; 6] = [
        ErrorColumn::L2U,
        ErrorColumn::H1U,
        ErrorColumn::H2Weighted,
        ErrorColumn::Jump,
        ErrorColumn::Energy,
        ErrorColumn::L2P,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ErrorColumn::L2U => "l2_u",
            ErrorColumn::H1U => "h1_u",
            ErrorColumn::H2Weighted => "h2_weighted",
            ErrorColumn::Jump => "jump",
            ErrorColumn::Energy => "energy",
            ErrorColumn::L2P => "l2_p",
        }
    }
}

/// Squared contributions of one element, summed in element order afterwards.
#[derive(Default, Clone, Copy)]
struct Squares<T> {
    l2_u: T,
    h1_u: T,
    h2: T,
    jump: T,
    l2_p: T,
}

/// Errors of `sol` against `exact`, integrated with exactness
/// 2(k+1) + `quad_boost`. The jump uses the assembly edge rule and the same
/// trace projection as the stabilization.
pub fn compute_errors<T: Real, E: ExactSolution<T> + ?Sized>(
    sol: &HdgSolution<'_, T>,
    exact: &E,
    quad_boost: usize,
) -> Result<ErrorReport<T>> {
    let mesh = sol.mesh;
    let spec = sol.spec;
    let k = spec.k;
    let (nu, nf) = (spec.nu(), spec.nf());
    let tables = ReferenceTables::new(&spec)?;
    let rule = tri_quadrature::<T>(spec.assembly_degree() + quad_boost)?;
    let vb = TriBasis::<T>::new(k + 1)?;
    let pb = TriBasis::<T>::new(k)?;
    let jets: Vec<_> = (0..rule.len())
        .map(|q| {
            let (x, y) = rule.reference_point(q);
            (vb.jets(x, y), pb.values(x, y))
        })
        .collect();

    let parts: Vec<Squares<T>> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|e| {
            let geom = ElementGeometry::new(mesh, e)?;
            let hk = mesh.triangles[e].diameter;
            let coef = &sol.u[e];
            let mut s = Squares::default();
            for (q, (vj, pv)) in jets.iter().enumerate() {
                let (xi, eta) = rule.reference_point(q);
                let x = geom.map(xi, eta);
                let w = rule.weights[q] * geom.det;
                let ue = exact.velocity(x);
                let ge = exact.velocity_gradient(x);
                let he = exact.velocity_hessian(x);
                for c in 0..2 {
                    let mut val = ue[c];
                    let mut grad = ge[c];
                    let mut hess = he[c];
                    for (i, jet) in vj.iter().enumerate() {
                        let a = coef[c * nu + i];
                        if a == T::zero() {
                            continue;
                        }
                        let g = geom.grad(jet.grad);
                        let h = geom.hess(jet.hess);
                        val -= a * jet.value;
                        grad[0] -= a * g[0];
                        grad[1] -= a * g[1];
                        for r in 0..3 {
                            hess[r] -= a * h[r];
                        }
                    }
                    s.l2_u += w * val * val;
                    s.h1_u += w * (grad[0] * grad[0] + grad[1] * grad[1]);
                    s.h2 += w * hk * hk * (hess[0] * hess[0] + T::lit(2.0) * hess[1] * hess[1] + hess[2] * hess[2]);
                }
                let mut pe = exact.pressure(x);
                for (l, &v) in pv.iter().enumerate() {
                    pe -= sol.p[e][l] * v;
                }
                s.l2_p += w * pe * pe;
            }
            for (side_idx, side) in EdgeSide::all(mesh, e).into_iter().enumerate() {
                let proj = trace_projection_matrix(&tables.edge, side_idx, side.forward, k, nu)?;
                let uhat = &sol.uhat[side.edge];
                // h_e⁻¹ ‖Σ_m d_m L_m‖²_e = ½ Σ_m d_m² for Legendre orthonormal on [−1, 1].
                for c in 0..2 {
                    for (m, row) in proj.iter().enumerate() {
                        let mut d = uhat[c * nf + m];
                        for (j, &pmj) in row.iter().enumerate() {
                            d -= pmj * coef[c * nu + j];
                        }
                        s.jump += T::lit(0.5) * d * d;
                    }
                }
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;

    let mut total = Squares::<T>::default();
    for s in parts {
        total.l2_u += s.l2_u;
        total.h1_u += s.h1_u;
        total.h2 += s.h2;
        total.jump += s.jump;
        total.l2_p += s.l2_p;
    }
    Ok(ErrorReport {
        h: mesh.h,
        l2_u: total.l2_u.sqrt(),
        h1_u: total.h1_u.sqrt(),
        h2_weighted: total.h2.sqrt(),
        jump: total.jump.sqrt(),
        energy: (total.h1_u + total.h2 + total.jump).sqrt(),
        l2_p: total.l2_p.sqrt(),
    })
}

/// Norms of the discrete triple itself (errors against the zero pair).
pub fn solution_norms<T: Real>(sol: &HdgSolution<'_, T>) -> Result<ErrorReport<T>> {
    compute_errors(sol, &ZeroFlow, 0)
}

/// log(e₁/e₂) / log(h₁/h₂).
pub fn convergence_order<T: Real>(e1: T, e2: T, h1: T, h2: T) -> T {
    (e1 / e2).ln() / (h1 / h2).ln()
}

/// Error reports over a refinement sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct EocTable<T> {
    pub reports: Vec<ErrorReport<T>>,
}

impl<T: Real> EocTable<T> {
    /// `None` for the first level.
    pub fn orders(&self, column: ErrorColumn) -> Vec<Option<T>> {
        let mut out = vec![None];
        for w in self.reports.windows(2) {
            out.push(Some(convergence_order(w[0].get(column), w[1].get(column), w[0].h, w[1].h)));
        }
        out
    }

    /// Order between the last two levels.
    pub fn last_order(&self, column: ErrorColumn) -> T {
        self.orders(column).last().copied().flatten().expect("at least two levels")
    }

    /// Rows `k,h,l2_u,order,h1_u,order,l2_p,order` in the printed style
    /// `4.938E-02` / `2.01`, first-row orders as `--`.
    pub fn to_csv(&self, k: usize) -> String {
        let cols = [ErrorColumn::L2U, ErrorColumn::H1U, ErrorColumn::L2P];
        let orders: Vec<Vec<Option<T>>> = cols.iter().map(|&c| self.orders(c)).collect();
        let mut out = String::from("k,h,l2_u,order_l2_u,h1_u,order_h1_u,l2_p,order_l2_p\n");
        for (i, r) in self.reports.iter().enumerate() {
            out.push_str(&format!("{k},{:.4}", r.h.to_f64_lossy()));
            for (c, col) in cols.iter().enumerate() {
                out.push(',');
                out.push_str(&format_error(r.get(*col).to_f64_lossy()));
                out.push(',');
                out.push_str(&orders[c][i].map_or_else(|| "--".to_string(), |o| format_order(o.to_f64_lossy())));
            }
            out.push('\n');
        }
        out
    }

    /// Every column with its order, in the same number style.
    pub fn to_csv_full(&self, k: usize) -> String {
        let mut out = String::from("k,h");
        for c in ErrorColumn::ALL {
            out.push_str(&format!(",{0},order_{0}", c.name()));
        }
        out.push('\n');
        let orders: Vec<Vec<Option<T>>> = ErrorColumn::ALL.iter().map(|&c| self.orders(c)).collect();
        for (i, r) in self.reports.iter().enumerate() {
            out.push_str(&format!("{k},{:.4}", r.h.to_f64_lossy()));
            for (c, col) in ErrorColumn::ALL.iter().enumerate() {
                out.push(',');
                out.push_str(&format_error(r.get(*col).to_f64_lossy()));
                out.push(',');
                out.push_str(&orders[c][i].map_or_else(|| "--".to_string(), |o| format_order(o.to_f64_lossy())));
            }
            out.push('\n');
        }
        out
    }
}

/// Needs at least two levels with strictly decreasing h.
pub fn eoc<T: Real>(reports: Vec<ErrorReport<T>>) -> Result<EocTable<T>> {
    if reports.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "convergence orders need at least two levels, got {}",
            reports.len()
        )));
    }
    for (i, w) in reports.windows(2).enumerate() {
        if !(w[1].h < w[0].h) {
            return Err(Error::NonMonotoneMeshSize { level: i + 1 });
        }
    }
    Ok(EocTable { reports })
}

/// Four significant digits, two-digit signed exponent: `4.938E-02`.
pub fn format_error(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.3E}");
    let (mantissa, exp) = s.split_once('E').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}E{sign}{:02}", exp.abs())
}

/// Two decimals.
pub fn format_order(x: f64) -> String {
    format!("{x:.2}")
}

pub const INFSUP_DIMENSION_LIMIT: usize = 3000;

/// Velocity (element plus interior facet) and pressure unknown counts used
/// by [`infsup_estimate`].
pub fn infsup_dimensions<T: Real>(mesh: &Mesh<T>, spec: &SpaceSpec<T>) -> (usize, usize) {
    let d = DofMap::new(mesh, spec);
    (d.pressure_range().start, d.pressure_range().len())
}

/// Discrete inf-sup constant
///
/// ```text
/// β_h = min_{q ⊥ 1} sup_{(v, v̂)} b_h(v, v̂; q) / (‖(v, v̂)‖_E ‖q‖)
/// ```
///
/// over homogeneous facet data, with ‖·‖_E the energy norm (unit jump
/// weight). Computed as the square root of the smallest eigenvalue of
/// M_Q^{-1/2} B M_V⁻¹ Bᵀ M_Q^{-1/2} on the orthogonal complement of the
/// constant pressure, which is removed by a Householder reflection.
pub fn infsup_estimate<T: Real>(mesh: &Mesh<T>, spec: &SpaceSpec<T>) -> Result<T> {
    infsup_estimate_with_limit(mesh, spec, INFSUP_DIMENSION_LIMIT)
}

/// [`infsup_estimate`] with a caller-chosen bound on velocity plus pressure
/// unknowns. Cost grows with the cube of that number.
pub fn infsup_estimate_with_limit<T: Real>(mesh: &Mesh<T>, spec: &SpaceSpec<T>, limit: usize) -> Result<T> {
    let (nv, nq) = infsup_dimensions(mesh, spec);
    if nv + nq > limit {
        return Err(Error::DimensionGuard {
            dimension: nv + nq,
            limit,
        });
    }
    let dof = DofMap::new(mesh, spec);
    let tables = ReferenceTables::new(spec)?;
    let (nu, nf) = (spec.nu(), spec.nf());
    let ne = mesh.num_triangles();

    let locals: Vec<(DenseMatrix<T>, DenseMatrix<T>)> = (0..ne)
        .into_par_iter()
        .map(|e| {
            let lf = local_forms(mesh, e, spec, &tables)?;
            let nvl = lf.p_range().start;
            let b = lf.block(lf.p_range(), 0..nvl);
            Ok((local_energy_gram(mesh, e, spec, &tables)?, b))
        })
        .collect::<Result<_>>()?;

    let mut mv = DenseMatrix::<T>::zeros(nv, nv);
    let mut b = DenseMatrix::<T>::zeros(nq, nv);
    let p0 = dof.pressure_range().start;
    for (e, (g, be)) in locals.iter().enumerate() {
        let slots: Vec<Option<usize>> = dof
            .element_slots(mesh, e)
            .into_iter()
            .take(2 * nu + 6 * nf)
            .map(|s| match s {
                crate::hdg::Slot::Free(i) => Some(i),
                crate::hdg::Slot::Fixed { .. } => None,
            })
            .collect();
        for (a, sa) in slots.iter().enumerate() {
            let Some(i) = *sa else { continue };
            for (c, sc) in slots.iter().enumerate() {
                if let Some(j) = *sc {
                    mv.row_mut(i)[j] += g[(a, c)];
                }
            }
            for l in 0..spec.np() {
                b.row_mut(dof.pressure(e, l) - p0)[i] += be[(l, a)];
            }
        }
    }

    let chol = DenseCholesky::new(&mv)
        .map_err(|step| Error::InvalidArgument(format!("velocity Gram matrix not positive definite at {step}")))?;
    // Rows of X = B L⁻ᵀ, scaled by M_Q^{-1/2}; M_Q = diag(2|K|).
    let x: Vec<Vec<T>> = (0..nq)
        .into_par_iter()
        .map(|r| {
            let e = r / spec.np();
            let scale = (T::lit(2.0) * mesh.signed_area(e).abs()).sqrt().recip();
            chol.solve_lower(b.row(r)).into_iter().map(|v| v * scale).collect()
        })
        .collect();
    let s = DenseMatrix::from_fn(nq, nq, |i, j| x[i].iter().zip(&x[j]).map(|(&a, &b)| a * b).sum::<T>());

    // Constant pressure in the scaled coordinates: sqrt(2|K|)·(1/√2) on ψ₀.
    let mut w = vec![T::zero(); nq];
    for e in 0..ne {
        w[e * spec.np()] = mesh.signed_area(e).abs().sqrt();
    }
    let reduced = deflate(&s, &w);
    let eig = symmetric_eigenvalues(&reduced);
    let lmin = eig.first().copied().unwrap_or_else(T::zero);
    Ok(lmin.max(T::zero()).sqrt())
}

/// Energy-norm Gram matrix of element `e` on the local velocity unknowns
/// [u | û on edges 0, 1, 2], with unit jump weight.
pub fn local_energy_gram<T: Real>(
    mesh: &Mesh<T>,
    e: usize,
    spec: &SpaceSpec<T>,
    tables: &ReferenceTables<T>,
) -> Result<DenseMatrix<T>> {
    let geom = ElementGeometry::new(mesh, e)?;
    let (nu, nf, k) = (spec.nu(), spec.nf(), spec.k);
    let hk2 = mesh.triangles[e].diameter * mesh.triangles[e].diameter;
    let nvl = 2 * nu + 6 * nf;
    let mut g = DenseMatrix::<T>::zeros(nvl, nvl);
    for (q, jets) in tables.tri_velocity.iter().enumerate() {
        let w = tables.tri.weights[q] * geom.det;
        let d: Vec<([T; 2], [T; 3])> = jets.iter().map(|j| (geom.grad(j.grad), geom.hess(j.hess))).collect();
        for i in 0..nu {
            for j in 0..nu {
                let (gi, hi) = d[i];
                let (gj, hj) = d[j];
                let v = w
                    * (gi[0] * gj[0]
                        + gi[1] * gj[1]
                        + hk2 * (hi[0] * hj[0] + T::lit(2.0) * hi[1] * hj[1] + hi[2] * hj[2]));
                g.row_mut(i)[j] += v;
                g.row_mut(nu + i)[nu + j] += v;
            }
        }
    }
    for (s, side) in EdgeSide::all(mesh, e).into_iter().enumerate() {
        let proj = trace_projection_matrix(&tables.edge, s, side.forward, k, nu)?;
        let start = 2 * nu + s * 2 * nf;
        for c in 0..2 {
            for (m, row) in proj.iter().enumerate() {
                // d = v̂_m − Σ_j P[m][j] v_j, contributes ½ d².
                let mut coeffs: Vec<(usize, T)> = vec![(start + c * nf + m, T::one())];
                coeffs.extend(row.iter().enumerate().map(|(j, &p)| (c * nu + j, -p)));
                for &(a, ca) in &coeffs {
                    for &(b, cb) in &coeffs {
                        g.row_mut(a)[b] += T::lit(0.5) * ca * cb;
                    }
                }
            }
        }
    }
    Ok(g)
}

/// Applies the Householder reflector sending `w` to a multiple of e₀ and
/// drops the first row and column.
fn deflate<T: Real>(a: &DenseMatrix<T>, w: &[T]) -> DenseMatrix<T> {
    let n = a.rows();
    let norm = w.iter().map(|&x| x * x).sum::<T>().sqrt();
    let mut v: Vec<T> = w.iter().map(|&x| x / norm).collect();
    let shift = if v[0] >= T::zero() { T::one() } else { -T::one() };
    v[0] += shift;
    let vv: T = v.iter().map(|&x| x * x).sum();
    let beta = T::lit(2.0) / vv;
    let p: Vec<T> = a.matvec(&v).into_iter().map(|x| x * beta).collect();
    let kappa = beta * T::lit(0.5) * v.iter().zip(&p).map(|(&a, &b)| a * b).sum::<T>();
    let qv: Vec<T> = p.iter().zip(&v).map(|(&pi, &vi)| pi - kappa * vi).collect();
    DenseMatrix::from_fn(n - 1, n - 1, |i, j| {
        let (i, j) = (i + 1, j + 1);
        a[(i, j)] - v[i] * qv[j] - qv[i] * v[j]
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_formatting() {
        assert_eq!(format_error(4.938e-2), "4.938E-02");
        assert_eq!(format_error(3.672), "3.672E+00");
        assert_eq!(format_error(0.0), "0.000E+00");
        assert_eq!(format_error(1.5e12), "1.500E+12");
        assert_eq!(format_order(2.016), "2.02");
    }

    #[test]
    fn deflation_removes_the_given_direction() {
        // A = I + 5 wwᵀ: after deflation along w only the unit eigenvalues remain.
        let w = [0.3, -0.4, 1.2, 0.5];
        let n2: f64 = w.iter().map(|x| x * x).sum();
        let a = DenseMatrix::from_fn(4, 4, |i, j| if i == j { 1.0 } else { 0.0 } + 5.0 * w[i] * w[j] / n2);
        let r = deflate(&a, &w);
        let eig = symmetric_eigenvalues(&r);
        assert!(eig.iter().all(|&l| (l - 1.0).abs() < 1e-13), "{eig:?}");
    }
}
