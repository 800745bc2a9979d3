use super::geometry::edge_reference_point;
use super::SpaceSpec;
use crate::basis::{EdgeBasis, Jet, TriBasis};
use crate::error::Result;
use crate::quadrature::{gauss_legendre_1d, tri_quadrature, EdgeQuadRule, TriQuadRule};
use crate::scalar::Real;

/// Basis values at the points of an edge rule, as seen from one local edge
/// in one orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct SideTable<T> {
    pub reference_points: Vec<(T, T)>,
    pub velocity: Vec<Vec<Jet<T>>>,
    pub pressure: Vec<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeTables<T> {
    pub rule: EdgeQuadRule<T>,
    /// Orthonormal Legendre values of degree ≤ k at each point.
    pub legendre: Vec<Vec<T>>,
    /// Indexed `[local edge][forward as usize]`.
    pub sides: [[SideTable<T>; 2]; 3],
}

impl<T: Real> EdgeTables<T> {
    pub fn new(rule: EdgeQuadRule<T>, k: usize, velocity: &TriBasis<T>, pressure: &TriBasis<T>) -> Self {
        let eb = EdgeBasis::new(k);
        let legendre = rule.points.iter().map(|&t| eb.values(t)).collect();
        let side = |s: usize, forward: bool| {
            let reference_points: Vec<(T, T)> = rule
                .points
                .iter()
                .map(|&t| edge_reference_point(s, forward, t))
                .collect();
            SideTable {
                velocity: reference_points.iter().map(|&(x, y)| velocity.jets(x, y)).collect(),
                pressure: reference_points.iter().map(|&(x, y)| pressure.values(x, y)).collect(),
                reference_points,
            }
        };
        let sides = [0, 1, 2].map(|s| [side(s, false), side(s, true)]);
        Self { rule, legendre, sides }
    }

    pub fn side(&self, s: usize, forward: bool) -> &SideTable<T> {
        &self.sides[s][forward as usize]
    }
}

/// Everything that depends only on the reference element and the `SpaceSpec`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTables<T> {
    pub k: usize,
    pub velocity: TriBasis<T>,
    pub pressure: TriBasis<T>,
    /// Exact for stiffness and divergence terms.
    pub tri: TriQuadRule<T>,
    pub tri_velocity: Vec<Vec<Jet<T>>>,
    pub tri_pressure: Vec<Vec<T>>,
    /// Elevated rule for loads and errors.
    pub load: TriQuadRule<T>,
    pub load_velocity: Vec<Vec<Jet<T>>>,
    pub load_pressure: Vec<Vec<T>>,
    /// k + 2 points: exact for degree 2k + 3, enough for the trace projection.
    pub edge: EdgeTables<T>,
    /// k + 1 Gauss points.
    pub reduced_edge: EdgeTables<T>,
}

impl<T: Real> ReferenceTables<T> {
    pub fn new(spec: &SpaceSpec<T>) -> Result<Self> {
        let k = spec.k;
        let velocity = TriBasis::new(k + 1)?;
        let pressure = TriBasis::new(k)?;
        let tri = tri_quadrature(spec.assembly_degree())?;
        let load = tri_quadrature(spec.load_degree())?;
        let tab = |r: &TriQuadRule<T>| {
            let v: Vec<Vec<Jet<T>>> = (0..r.len())
                .map(|q| {
                    let (x, y) = r.reference_point(q);
                    velocity.jets(x, y)
                })
                .collect();
            let p: Vec<Vec<T>> = (0..r.len())
                .map(|q| {
                    let (x, y) = r.reference_point(q);
                    pressure.values(x, y)
                })
                .collect();
            (v, p)
        };
        let (tri_velocity, tri_pressure) = tab(&tri);
        let (load_velocity, load_pressure) = tab(&load);
        let edge = EdgeTables::new(gauss_legendre_1d(k + 2)?, k, &velocity, &pressure);
        let reduced_edge = EdgeTables::new(gauss_legendre_1d(k + 1)?, k, &velocity, &pressure);
        Ok(Self {
            k,
            velocity,
            pressure,
            tri,
            tri_velocity,
            tri_pressure,
            load,
            load_velocity,
            load_pressure,
            edge,
            reduced_edge,
        })
    }

    /// Edge tables for an arbitrary exactness degree (at least the default).
    pub fn edge_tables_for_degree(&self, degree: usize) -> Result<EdgeTables<T>> {
        let rule = EdgeQuadRule::for_degree(degree.max(2 * self.k + 3))?;
        Ok(EdgeTables::new(rule, self.k, &self.velocity, &self.pressure))
    }
}
