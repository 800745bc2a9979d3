//! Orthonormal polynomial bases on the reference triangle and on edges.
//!
//! The triangle basis is Gram–Schmidt applied to the monomials
//! 1, x, y, x², xy, y², … on the reference triangle. Internally the monomials
//! are centred at the barycentre; the nested spans are unchanged, so the
//! resulting orthonormal functions are the same, only better conditioned.
//! The first function is the constant √2; every other function has zero
//! mean.
//!
//! Edge functions are orthonormal Legendre polynomials on [-1, 1].

use crate::error::{Error, Result};
use crate::quadrature::EdgeQuadRule;
use crate::scalar::Real;

pub const MAX_TRIANGLE_BASIS_DEGREE: usize = 3;

/// Number of polynomials of total degree ≤ `degree` in two variables.
pub const fn tri_dim(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Value, gradient and Hessian `[∂xx, ∂xy, ∂yy]` of a function at a point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet<T> {
    pub value: T,
    pub grad: [T; 2],
    pub hess: [T; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriBasis<T> {
    degree: usize,
    exponents: Vec<(usize, usize)>,
    /// Row `i` holds the centred-monomial coefficients of function `i`.
    coeffs: Vec<Vec<T>>,
}

const CENTRE: f64 = 1.0 / 3.0;

impl<T: Real> TriBasis<T> {
    pub fn new(degree: usize) -> Result<Self> {
        if degree > MAX_TRIANGLE_BASIS_DEGREE {
            return Err(Error::UnsupportedDegree {
                degree,
                max: MAX_TRIANGLE_BASIS_DEGREE,
            });
        }
        let exponents: Vec<(usize, usize)> = (0..=degree)
            .flat_map(|d| (0..=d).map(move |j| (d - j, j)))
            .collect();
        let n = exponents.len();

        // Exact Gram matrix of the centred monomials, in f64.
        let gram: Vec<Vec<f64>> = exponents
            .iter()
            .map(|&(a1, b1)| {
                exponents
                    .iter()
                    .map(|&(a2, b2)| centred_monomial_integral(a1 + a2, b1 + b2))
                    .collect()
            })
            .collect();
        let inner = |u: &[f64], v: &[f64]| -> f64 {
            let mut s = 0.0;
            for i in 0..n {
                if u[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    s += u[i] * gram[i][j] * v[j];
                }
            }
            s
        };

        // Modified Gram–Schmidt with one re-orthogonalization pass.
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            for _pass in 0..2 {
                for r in &rows {
                    let c = inner(r, &v);
                    for (vj, rj) in v.iter_mut().zip(r) {
                        *vj -= c * rj;
                    }
                }
            }
            let norm = inner(&v, &v).sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            rows.push(v);
        }

        Ok(Self {
            degree,
            exponents,
            coeffs: rows.into_iter().map(|r| r.into_iter().map(T::lit).collect()).collect(),
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Values of all basis functions at reference point (ξ, η).
    pub fn values(&self, xi: T, eta: T) -> Vec<T> {
        let mono = self.monomials(xi, eta);
        self.coeffs
            .iter()
            .map(|row| row.iter().zip(&mono).map(|(&c, m)| c * m.value).sum())
            .collect()
    }

    /// Values, reference gradients and reference Hessians of all functions.
    pub fn jets(&self, xi: T, eta: T) -> Vec<Jet<T>> {
        let mono = self.monomials(xi, eta);
        self.coeffs
            .iter()
            .map(|row| {
                let mut j = Jet::default();
                for (&c, m) in row.iter().zip(&mono) {
                    j.value += c * m.value;
                    j.grad[0] += c * m.grad[0];
                    j.grad[1] += c * m.grad[1];
                    for k in 0..3 {
                        j.hess[k] += c * m.hess[k];
                    }
                }
                j
            })
            .collect()
    }

    /// ∫ over the reference triangle of each basis function.
    pub fn reference_integrals(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        out[0] = T::lit(0.5).sqrt();
        out
    }

    fn monomials(&self, xi: T, eta: T) -> Vec<Jet<T>> {
        let x = xi - T::lit(CENTRE);
        let y = eta - T::lit(CENTRE);
        let d = self.degree;
        let mut px = vec![T::one(); d + 1];
        let mut py = vec![T::one(); d + 1];
        for i in 1..=d {
            px[i] = px[i - 1] * x;
            py[i] = py[i - 1] * y;
        }
        let pow = |p: &[T], e: usize, order: usize| -> T {
            // d^order/dx^order of x^e
            if order > e {
                return T::zero();
            }
            let mut f = T::one();
            for k in 0..order {
                f *= T::from_count(e - k);
            }
            f * p[e - order]
        };
        self.exponents
            .iter()
            .map(|&(a, b)| Jet {
                value: pow(&px, a, 0) * pow(&py, b, 0),
                grad: [pow(&px, a, 1) * pow(&py, b, 0), pow(&px, a, 0) * pow(&py, b, 1)],
                hess: [
                    pow(&px, a, 2) * pow(&py, b, 0),
                    pow(&px, a, 1) * pow(&py, b, 1),
                    pow(&px, a, 0) * pow(&py, b, 2),
                ],
            })
            .collect()
    }
}

/// ∫ (ξ − 1/3)^a (η − 1/3)^b over the reference triangle, by binomial
/// expansion into plain monomials.
fn centred_monomial_integral(a: usize, b: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..=a {
        for j in 0..=b {
            let c = binomial(a, i) * binomial(b, j) * (-CENTRE).powi((a - i + b - j) as i32);
            s += c * monomial_integral(i, j);
        }
    }
    s
}

/// ∫ ξ^a η^b over the reference triangle: a! b! / (a + b + 2)!.
pub fn monomial_integral(a: usize, b: usize) -> f64 {
    let mut v = 1.0;
    // a! b! / (a+b+2)! = 1 / ((a+b+2)(a+b+1) · C(a+b, a))
    v /= ((a + b + 2) * (a + b + 1)) as f64;
    v / binomial(a + b, a)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Orthonormal Legendre polynomials `L_i = sqrt((2i+1)/2) P_i` on [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeBasis {
    degree: usize,
}

impl EdgeBasis {
    pub fn new(degree: usize) -> Self {
        Self { degree }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn values<T: Real>(&self, t: T) -> Vec<T> {
        let mut p = Vec::with_capacity(self.dim());
        p.push(T::one());
        if self.degree >= 1 {
            p.push(t);
        }
        for j in 2..=self.degree {
            let jf = T::from_count(j);
            let next = ((T::lit(2.0) * jf - T::one()) * t * p[j - 1] - (jf - T::one()) * p[j - 2]) / jf;
            p.push(next);
        }
        p.iter()
            .enumerate()
            .map(|(i, &v)| v * (T::from_count(2 * i + 1) / T::lit(2.0)).sqrt())
            .collect()
    }

    /// Evaluates the expansion with coefficients `c` at `t`.
    pub fn evaluate<T: Real>(&self, coeffs: &[T], t: T) -> T {
        self.values(t).iter().zip(coeffs).map(|(&l, &c)| l * c).sum()
    }
}

/// Coefficients of the L²(-1, 1) projection onto polynomials of degree `k`,
/// in the orthonormal Legendre basis, from values sampled at the points of
/// `rule`. The rule must integrate degree `2k + 2` exactly so that traces of
/// degree-(k+1) polynomials are projected without quadrature error.
pub fn edge_trace_projection<T: Real>(k: usize, values: &[T], rule: &EdgeQuadRule<T>) -> Result<Vec<T>> {
    if rule.exactness_degree < 2 * k + 2 {
        return Err(Error::InsufficientQuadrature {
            required: 2 * k + 2,
            available: rule.exactness_degree,
        });
    }
    if values.len() != rule.len() {
        return Err(Error::DimensionMismatch {
            expected: rule.len(),
            found: values.len(),
        });
    }
    let basis = EdgeBasis::new(k);
    let mut c = vec![T::zero(); k + 1];
    for ((&t, &w), &f) in rule.points.iter().zip(&rule.weights).zip(values) {
        for (ci, li) in c.iter_mut().zip(basis.values(t)) {
            *ci += w * f * li;
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{gauss_legendre_1d, tri_quadrature};

    #[test]
    fn constant_function_is_sqrt_two() {
        let b = TriBasis::<f64>::new(0).unwrap();
        assert_eq!(b.dim(), 1);
        assert!((b.values(0.2, 0.3)[0] - 2f64.sqrt()).abs() < 1e-15);
        let b = TriBasis::<f64>::new(3).unwrap();
        assert!((b.values(0.7, 0.1)[0] - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn gram_matrix_is_identity() {
        for degree in 0..=MAX_TRIANGLE_BASIS_DEGREE {
            let b = TriBasis::<f64>::new(degree).unwrap();
            assert_eq!(b.dim(), tri_dim(degree));
            let rule = tri_quadrature::<f64>(2 * degree).unwrap();
            let tab: Vec<Vec<f64>> = (0..rule.len())
                .map(|q| {
                    let (x, y) = rule.reference_point(q);
                    b.values(x, y)
                })
                .collect();
            for i in 0..b.dim() {
                for j in 0..b.dim() {
                    let g: f64 = (0..rule.len()).map(|q| rule.weights[q] * tab[q][i] * tab[q][j]).sum();
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((g - expected).abs() < 1e-12, "degree {degree} ({i},{j}): {g}");
                }
            }
        }
        assert!(TriBasis::<f64>::new(4).is_err());
    }

    #[test]
    fn reference_integrals_match_quadrature() {
        let b = TriBasis::<f64>::new(2).unwrap();
        let rule = tri_quadrature::<f64>(4).unwrap();
        let means = b.reference_integrals();
        for i in 0..b.dim() {
            let q = rule.integrate(|x, y| b.values(x, y)[i]);
            assert!((q - means[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn legendre_orthonormality() {
        let rule = gauss_legendre_1d::<f64>(6).unwrap();
        let basis = EdgeBasis::new(4);
        for i in 0..5 {
            for j in 0..5 {
                let g = rule.integrate(|t| basis.values(t)[i] * basis.values(t)[j]);
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g - e).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn projection_of_odd_function_onto_constants() {
        let rule = gauss_legendre_1d::<f64>(2).unwrap();
        let vals: Vec<f64> = rule.points.clone();
        let c = edge_trace_projection(0, &vals, &rule).unwrap();
        assert!(c[0].abs() < 1e-15);
    }

    #[test]
    fn projection_needs_enough_points() {
        let rule = gauss_legendre_1d::<f64>(1).unwrap();
        assert!(matches!(
            edge_trace_projection(1, &[1.0], &rule),
            Err(Error::InsufficientQuadrature { .. })
        ));
    }

    #[test]
    fn projection_reproduces_degree_k() {
        let rule = gauss_legendre_1d::<f64>(4).unwrap();
        let f = |t: f64| 0.3 - 1.7 * t + 2.2 * t * t;
        let vals: Vec<f64> = rule.points.iter().map(|&t| f(t)).collect();
        let c = edge_trace_projection(2, &vals, &rule).unwrap();
        let basis = EdgeBasis::new(2);
        for t in [-1.0, -0.3, 0.0, 0.45, 1.0] {
            assert!((basis.evaluate(&c, t) - f(t)).abs() < 1e-13);
        }
    }
}
