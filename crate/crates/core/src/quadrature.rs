//! Gauss–Legendre rules on [-1, 1] and collapsed-coordinate rules on the
//! reference triangle {(ξ, η) : ξ, η ≥ 0, ξ + η ≤ 1}.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAX_EDGE_POINTS: usize = 20;
pub const MAX_TRIANGLE_DEGREE: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeQuadRule<T> {
    pub points: Vec<T>,
    pub weights: Vec<T>,
    pub exactness_degree: usize,
}

impl<T: Real> EdgeQuadRule<T> {
    /// Smallest Gauss–Legendre rule integrating polynomials of degree
    /// `degree` exactly.
    pub fn for_degree(degree: usize) -> Result<Self> {
        gauss_legendre_1d(degree / 2 + 1)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        self.points.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

/// `npoints`-point Gauss–Legendre rule, exact to degree `2·npoints − 1`.
pub fn gauss_legendre_1d<T: Real>(npoints: usize) -> Result<EdgeQuadRule<T>> {
    if !(1..=MAX_EDGE_POINTS).contains(&npoints) {
        return Err(Error::UnsupportedQuadrature {
            what: "Gauss-Legendre point count",
            requested: npoints,
            min: 1,
            max: MAX_EDGE_POINTS,
        });
    }
    let n = npoints;
    let mut points = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = T::from_count(n);
    let tol = T::epsilon() * T::lit(4.0);
    // Roots come in ± pairs; Newton on the upper half, mirrored.
    for i in 0..n.div_ceil(2) {
        let mut x = (T::PI() * (T::from_count(i) + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= tol {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d.is_finite() { d } else { dp };
        let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
        points[i] = -x;
        points[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = T::zero();
    }
    Ok(EdgeQuadRule {
        points,
        weights,
        exactness_degree: 2 * n - 1,
    })
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p_prev = T::one();
    let mut p = x;
    if n == 0 {
        return (T::one(), T::zero());
    }
    for j in 2..=n {
        let jf = T::from_count(j);
        let next = ((T::lit(2.0) * jf - T::one()) * x * p - (jf - T::one()) * p_prev) / jf;
        p_prev = p;
        p = next;
    }
    let d = T::from_count(n) * (x * p - p_prev) / (x * x - T::one());
    (p, d)
}

/// Quadrature on the reference triangle; weights sum to its area 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct TriQuadRule<T> {
    /// Barycentric coordinates (λ0, λ1, λ2); the reference point is (λ1, λ2).
    pub points: Vec<[T; 3]>,
    pub weights: Vec<T>,
    pub exactness_degree: usize,
}

impl<T: Real> TriQuadRule<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Reference coordinates (ξ, η) of point `q`.
    pub fn reference_point(&self, q: usize) -> (T, T) {
        (self.points[q][1], self.points[q][2])
    }

    pub fn integrate(&self, f: impl Fn(T, T) -> T) -> T {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, &w)| w * f(p[1], p[2]))
            .sum()
    }
}

/// Conical-product (Duffy) rule exact for polynomials of total degree
/// `required_degree`. All weights are positive and all points interior.
pub fn tri_quadrature<T: Real>(required_degree: usize) -> Result<TriQuadRule<T>> {
    if required_degree > MAX_TRIANGLE_DEGREE {
        return Err(Error::UnsupportedQuadrature {
            what: "triangle exactness degree",
            requested: required_degree,
            min: 0,
            max: MAX_TRIANGLE_DEGREE,
        });
    }
    // ξ = s(1 − t), η = t, dξ dη = (1 − t) ds dt: degree d in s, d + 1 in t.
    let ns = (required_degree + 2) / 2;
    let nt = (required_degree + 3) / 2;
    let rs = gauss_legendre_1d::<T>(ns)?;
    let rt = gauss_legendre_1d::<T>(nt)?;
    let half = T::lit(0.5);
    let mut points = Vec::with_capacity(ns * nt);
    let mut weights = Vec::with_capacity(ns * nt);
    for (&gt, &wt) in rt.points.iter().zip(&rt.weights) {
        let t = half * (gt + T::one());
        for (&gs, &ws) in rs.points.iter().zip(&rs.weights) {
            let s = half * (gs + T::one());
            let xi = s * (T::one() - t);
            let eta = t;
            points.push([T::one() - xi - eta, xi, eta]);
            weights.push(ws * wt * T::lit(0.25) * (T::one() - t));
        }
    }
    Ok(TriQuadRule {
        points,
        weights,
        exactness_degree: (2 * ns - 1).min(2 * nt - 2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// ∫ ξ^a η^b over the reference triangle.
    fn monomial_integral(a: u32, b: u32) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    #[test]
    fn one_point_rule() {
        let r = gauss_legendre_1d::<f64>(1).unwrap();
        assert_eq!(r.points, vec![0.0]);
        assert_eq!(r.weights, vec![2.0]);
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..=MAX_EDGE_POINTS {
            let r = gauss_legendre_1d::<f64>(n).unwrap();
            assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for i in 0..n {
                assert!((r.points[i] + r.points[n - 1 - i]).abs() < 1e-15);
                assert!(r.weights[i] > 0.0);
            }
            for d in 0..=r.exactness_degree {
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                let got = r.integrate(|t| t.powi(d as i32));
                assert!((got - exact).abs() < 1e-13, "n={n} d={d}: {got} vs {exact}");
            }
        }
        let r = gauss_legendre_1d::<f64>(2).unwrap();
        assert!((r.integrate(|t| t * t) - 2.0 / 3.0).abs() < 1e-15);
        assert!(gauss_legendre_1d::<f64>(0).is_err());
        assert!(gauss_legendre_1d::<f64>(21).is_err());
    }

    #[test]
    fn triangle_rules_integrate_monomials() {
        for deg in 0..=MAX_TRIANGLE_DEGREE {
            let r = tri_quadrature::<f64>(deg).unwrap();
            assert!(r.exactness_degree >= deg);
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!((r.weights.iter().sum::<f64>() - 0.5).abs() < 1e-14);
            for a in 0..=deg as u32 {
                for b in 0..=(deg as u32 - a) {
                    let got = r.integrate(|x, y| x.powi(a as i32) * y.powi(b as i32));
                    let exact = monomial_integral(a, b);
                    assert!((got - exact).abs() < 1e-13 * exact.max(1e-3), "deg={deg} a={a} b={b}");
                }
            }
        }
        assert!(tri_quadrature::<f64>(21).is_err());
    }

    #[test]
    fn reference_values() {
        let r = tri_quadrature::<f64>(5).unwrap();
        assert!((r.integrate(|_, _| 1.0) - 0.5).abs() < 1e-15);
        assert!((r.integrate(|x, _| x) - 1.0 / 6.0).abs() < 1e-15);
        assert!((r.integrate(|x, y| x * x * y * y * y) - 1.0 / 420.0).abs() < 1e-15);
    }

    #[test]
    fn single_precision_rules() {
        let r = tri_quadrature::<f32>(6).unwrap();
        assert!((r.integrate(|x, y| x * y) - 1.0 / 24.0).abs() < 1e-6);
    }
}
