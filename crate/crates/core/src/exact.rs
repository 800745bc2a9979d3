//! Exact Stokes pairs (u, p) with derived forcing f = −Δu + ∇p, and the
//! small bivariate polynomial type used to build polynomial test flows.

use crate::mesh::Point2;
use crate::scalar::Real;

/// Regularity of an exact pair, used to pick quadrature and tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    /// Polynomial of the given total degree; integrals are exact under a
    /// rule of sufficient degree.
    Polynomial(usize),
    Analytic,
}

/// Velocity and pressure with first and second derivatives. `forcing` is
/// always derived from the other evaluators.
pub trait ExactSolution<T: Real>: Sync {
    fn velocity(&self, x: Point2<T>) -> [T; 2];
    /// `g[i][j] = ∂_j u_i`.
    fn velocity_gradient(&self, x: Point2<T>) -> [[T; 2]; 2];
    /// `h[i] = [∂xx u_i, ∂xy u_i, ∂yy u_i]`.
    fn velocity_hessian(&self, x: Point2<T>) -> [[T; 3]; 2];
    fn pressure(&self, x: Point2<T>) -> T;
    fn pressure_gradient(&self, x: Point2<T>) -> [T; 2];
    fn smoothness(&self) -> Smoothness;

    fn velocity_laplacian(&self, x: Point2<T>) -> [T; 2] {
        let h = self.velocity_hessian(x);
        [h[0][0] + h[0][2], h[1][0] + h[1][2]]
    }

    fn divergence(&self, x: Point2<T>) -> T {
        let g = self.velocity_gradient(x);
        g[0][0] + g[1][1]
    }

    fn forcing(&self, x: Point2<T>) -> [T; 2] {
        let l = self.velocity_laplacian(x);
        let gp = self.pressure_gradient(x);
        [gp[0] - l[0], gp[1] - l[1]]
    }
}

/// The manufactured flow on the unit square: stream function
/// ψ = sin²(πx) sin²(πy), u = (∂_y ψ, −∂_x ψ), p = 4π sin(2πx) sin(2πy).
/// u vanishes on the boundary and p has zero mean.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ManufacturedFlow;

impl<T: Real> ExactSolution<T> for ManufacturedFlow {
    fn velocity(&self, x: Point2<T>) -> [T; 2] {
        let pi = T::PI();
        let (a, b) = (pi * x.x, pi * x.y);
        let (sa, sb) = (a.sin(), b.sin());
        let two = T::lit(2.0);
        [pi * sa * sa * (two * b).sin(), -pi * (two * a).sin() * sb * sb]
    }

    fn velocity_gradient(&self, x: Point2<T>) -> [[T; 2]; 2] {
        let pi = T::PI();
        let pi2 = pi * pi;
        let two = T::lit(2.0);
        let (a, b) = (pi * x.x, pi * x.y);
        let (sa, sb) = (a.sin(), b.sin());
        let (s2a, s2b, c2a, c2b) = ((two * a).sin(), (two * b).sin(), (two * a).cos(), (two * b).cos());
        [
            [pi2 * s2a * s2b, two * pi2 * sa * sa * c2b],
            [-two * pi2 * c2a * sb * sb, -pi2 * s2a * s2b],
        ]
    }

    fn velocity_hessian(&self, x: Point2<T>) -> [[T; 3]; 2] {
        let pi = T::PI();
        let pi3 = pi * pi * pi;
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        let (a, b) = (pi * x.x, pi * x.y);
        let (sa, sb) = (a.sin(), b.sin());
        let (s2a, s2b, c2a, c2b) = ((two * a).sin(), (two * b).sin(), (two * a).cos(), (two * b).cos());
        [
            [two * pi3 * c2a * s2b, two * pi3 * s2a * c2b, -four * pi3 * sa * sa * s2b],
            [four * pi3 * s2a * sb * sb, -two * pi3 * c2a * s2b, -two * pi3 * s2a * c2b],
        ]
    }

    fn pressure(&self, x: Point2<T>) -> T {
        let pi = T::PI();
        let two = T::lit(2.0);
        T::lit(4.0) * pi * (two * pi * x.x).sin() * (two * pi * x.y).sin()
    }

    fn pressure_gradient(&self, x: Point2<T>) -> [T; 2] {
        let pi = T::PI();
        let two = T::lit(2.0);
        let c = T::lit(8.0) * pi * pi;
        let (a, b) = (two * pi * x.x, two * pi * x.y);
        [c * a.cos() * b.sin(), c * a.sin() * b.cos()]
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Analytic
    }
}

/// u = 0, p = 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ZeroFlow;

impl<T: Real> ExactSolution<T> for ZeroFlow {
    fn velocity(&self, _: Point2<T>) -> [T; 2] {
        [T::zero(); 2]
    }
    fn velocity_gradient(&self, _: Point2<T>) -> [[T; 2]; 2] {
        [[T::zero(); 2]; 2]
    }
    fn velocity_hessian(&self, _: Point2<T>) -> [[T; 3]; 2] {
        [[T::zero(); 3]; 2]
    }
    fn pressure(&self, _: Point2<T>) -> T {
        T::zero()
    }
    fn pressure_gradient(&self, _: Point2<T>) -> [T; 2] {
        [T::zero(); 2]
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::Polynomial(0)
    }
}

/// Bivariate polynomial Σ c_ab x^a y^b with a + b ≤ degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2<T> {
    degree: usize,
    /// Indexed by `index(a, b)`.
    coeffs: Vec<T>,
}

fn index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

impl<T: Real> Poly2<T> {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            coeffs: vec![T::zero(); (degree + 1) * (degree + 2) / 2],
        }
    }

    /// Coefficients in the order 1, x, y, x², xy, y², …
    pub fn from_coeffs(degree: usize, coeffs: Vec<T>) -> Self {
        assert_eq!(coeffs.len(), (degree + 1) * (degree + 2) / 2);
        Self { degree, coeffs }
    }

    /// Builds from `(coefficient, a, b)` terms.
    pub fn from_terms(terms: &[(f64, usize, usize)]) -> Self {
        let degree = terms.iter().map(|&(_, a, b)| a + b).max().unwrap_or(0);
        let mut p = Self::zero(degree);
        for &(c, a, b) in terms {
            p.coeffs[index(a, b)] += T::lit(c);
        }
        p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, a: usize, b: usize) -> T {
        if a + b > self.degree {
            T::zero()
        } else {
            self.coeffs[index(a, b)]
        }
    }

    fn terms(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..=self.degree).flat_map(move |d| (0..=d).map(move |b| (d - b, b, self.coeffs[index(d - b, b)])))
    }

    pub fn eval(&self, x: Point2<T>) -> T {
        // Horner in y within each power of x.
        let mut s = T::zero();
        for a in (0..=self.degree).rev() {
            let mut inner = T::zero();
            for b in (0..=self.degree - a).rev() {
                inner = inner * x.y + self.coeffs[index(a, b)];
            }
            s = s * x.x + inner;
        }
        s
    }

    pub fn dx(&self) -> Self {
        let mut out = Self::zero(self.degree.saturating_sub(1));
        for (a, b, c) in self.terms() {
            if a > 0 {
                out.coeffs[index(a - 1, b)] += c * T::from_count(a);
            }
        }
        out
    }

    pub fn dy(&self) -> Self {
        let mut out = Self::zero(self.degree.saturating_sub(1));
        for (a, b, c) in self.terms() {
            if b > 0 {
                out.coeffs[index(a, b - 1)] += c * T::from_count(b);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.degree.max(other.degree));
        for (a, b, c) in self.terms().chain(other.terms()) {
            out.coeffs[index(a, b)] += c;
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    /// ∫ over the unit square.
    pub fn unit_square_integral(&self) -> T {
        self.terms()
            .map(|(a, b, c)| c / (T::from_count(a + 1) * T::from_count(b + 1)))
            .sum()
    }

    /// Copy with the unit-square mean removed from the constant term.
    pub fn mean_free(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[0] -= self.unit_square_integral();
        out
    }
}

/// Polynomial vector field, not necessarily divergence free.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyField<T> {
    pub components: [Poly2<T>; 2],
}

impl<T: Real> PolyField<T> {
    pub fn new(u: Poly2<T>, v: Poly2<T>) -> Self {
        Self { components: [u, v] }
    }

    pub fn degree(&self) -> usize {
        self.components[0].degree().max(self.components[1].degree())
    }

    pub fn value(&self, x: Point2<T>) -> [T; 2] {
        [self.components[0].eval(x), self.components[1].eval(x)]
    }

    pub fn divergence(&self, x: Point2<T>) -> T {
        self.components[0].dx().eval(x) + self.components[1].dy().eval(x)
    }
}

/// Divergence-free polynomial flow u = (∂_y ψ, −∂_x ψ) with a mean-free
/// polynomial pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialFlow<T> {
    u: [Poly2<T>; 2],
    grad: [[Poly2<T>; 2]; 2],
    hess: [[Poly2<T>; 3]; 2],
    p: Poly2<T>,
    p_grad: [Poly2<T>; 2],
}

impl<T: Real> PolynomialFlow<T> {
    /// `pressure` is shifted to zero mean on the unit square.
    pub fn from_stream_function(psi: &Poly2<T>, pressure: &Poly2<T>) -> Self {
        let u = [psi.dy(), psi.dx().scale(-T::one())];
        let grad = [[u[0].dx(), u[0].dy()], [u[1].dx(), u[1].dy()]];
        let hess = [
            [grad[0][0].dx(), grad[0][0].dy(), grad[0][1].dy()],
            [grad[1][0].dx(), grad[1][0].dy(), grad[1][1].dy()],
        ];
        let p = pressure.mean_free();
        let p_grad = [p.dx(), p.dy()];
        Self { u, grad, hess, p, p_grad }
    }

    pub fn velocity_degree(&self) -> usize {
        self.u[0].degree().max(self.u[1].degree())
    }
}

impl<T: Real> ExactSolution<T> for PolynomialFlow<T> {
    fn velocity(&self, x: Point2<T>) -> [T; 2] {
        [self.u[0].eval(x), self.u[1].eval(x)]
    }
    fn velocity_gradient(&self, x: Point2<T>) -> [[T; 2]; 2] {
        let g = &self.grad;
        [[g[0][0].eval(x), g[0][1].eval(x)], [g[1][0].eval(x), g[1][1].eval(x)]]
    }
    fn velocity_hessian(&self, x: Point2<T>) -> [[T; 3]; 2] {
        let h = &self.hess;
        [
            [h[0][0].eval(x), h[0][1].eval(x), h[0][2].eval(x)],
            [h[1][0].eval(x), h[1][1].eval(x), h[1][2].eval(x)],
        ]
    }
    fn pressure(&self, x: Point2<T>) -> T {
        self.p.eval(x)
    }
    fn pressure_gradient(&self, x: Point2<T>) -> [T; 2] {
        [self.p_grad[0].eval(x), self.p_grad[1].eval(x)]
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::Polynomial(self.velocity_degree().max(self.p.degree()))
    }
}
