//! Conforming triangulations with full edge topology.
//!
//! Edges are numbered in order of first appearance while sweeping the
//! triangles, so every derived quantity is deterministic. Edge `i` of a
//! triangle is the one opposite its vertex `i`. An edge stores its vertices
//! in increasing index order; this is the global orientation used to
//! parameterize facet unknowns. The stored unit normal points out of the
//! lower-indexed adjacent triangle.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product.
    pub fn cross(self, other: Self) -> T {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn midpoint(self, other: Self) -> Self {
        let half = T::lit(0.5);
        Self::new(half * (self.x + other.x), half * (self.y + other.y))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl<T: Real> Add for Point2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Real> Sub for Point2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Real> Mul<T> for Point2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triangle<T> {
    pub vertices: [usize; 3],
    /// `edges[i]` is opposite `vertices[i]`.
    pub edges: [usize; 3],
    /// Longest side length.
    pub diameter: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge<T> {
    /// Sorted ascending; defines the edge orientation.
    pub vertices: [usize; 2],
    /// One (boundary) or two (interior) triangles, sorted ascending.
    pub triangles: Vec<usize>,
    pub is_boundary: bool,
    pub length: T,
    /// Unit normal pointing out of `triangles[0]`.
    pub normal: Point2<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    pub vertices: Vec<Point2<T>>,
    pub triangles: Vec<Triangle<T>>,
    pub edges: Vec<Edge<T>>,
    /// Maximum triangle diameter.
    pub h: T,
}

impl<T: Real> Mesh<T> {
    /// Builds edge topology for the given triangles.
    ///
    /// Orientation is not enforced here (see [`Mesh::validate`]); only index
    /// bounds and edge manifoldness are.
    pub fn from_triangles(vertices: Vec<Point2<T>>, connectivity: &[[usize; 3]]) -> Result<Self> {
        let nv = vertices.len();
        if let Some(p) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMesh(format!("vertex {p} has non-finite coordinates")));
        }
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(connectivity.len() * 2);
        let mut edges: Vec<Edge<T>> = Vec::with_capacity(connectivity.len() * 3 / 2 + 4);
        let mut triangles = Vec::with_capacity(connectivity.len());

        for (t, tri) in connectivity.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&v| v >= nv) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references vertex {bad} but only {nv} exist"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("triangle {t} repeats a vertex")));
            }
            let mut edge_ids = [0usize; 3];
            let mut diameter = T::zero();
            for i in 0..3 {
                let a = tri[(i + 1) % 3];
                let b = tri[(i + 2) % 3];
                let key = (a.min(b), a.max(b));
                let length = (vertices[key.1] - vertices[key.0]).norm();
                diameter = diameter.max(length);
                let id = *lookup.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        vertices: [key.0, key.1],
                        triangles: Vec::with_capacity(2),
                        is_boundary: false,
                        length,
                        normal: Point2::default(),
                    });
                    edges.len() - 1
                });
                if edges[id].triangles.len() == 2 {
                    return Err(Error::InvalidMesh(format!(
                        "edge ({}, {}) shared by more than two triangles",
                        key.0, key.1
                    )));
                }
                edges[id].triangles.push(t);
                edge_ids[i] = id;
            }
            triangles.push(Triangle {
                vertices: *tri,
                edges: edge_ids,
                diameter,
            });
        }

        for edge in &mut edges {
            edge.is_boundary = edge.triangles.len() == 1;
            let owner = &triangles[edge.triangles[0]];
            let opposite = owner
                .vertices
                .iter()
                .copied()
                .find(|v| !edge.vertices.contains(v))
                .expect("triangle has a vertex off each edge");
            let a = vertices[edge.vertices[0]];
            let b = vertices[edge.vertices[1]];
            let d = b - a;
            let mut n = Point2::new(d.y, -d.x) * (T::one() / edge.length);
            if n.dot(vertices[opposite] - a) > T::zero() {
                n = n * -T::one();
            }
            edge.normal = n;
        }

        let h = triangles.iter().fold(T::zero(), |m, t| m.max(t.diameter));
        Ok(Self {
            vertices,
            triangles,
            edges,
            h,
        })
    }

    /// Uniform triangulation of (0,1)² with `n` squares per side, each split
    /// along its lower-left to upper-right diagonal.
    pub fn structured_unit_square(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("structured mesh needs n >= 1".into()));
        }
        let nf = T::from_count(n);
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push(Point2::new(T::from_count(i) / nf, T::from_count(j) / nf));
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut tris = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                tris.push([v00, v10, v11]);
                tris.push([v00, v11, v01]);
            }
        }
        Self::from_triangles(vertices, &tris)
    }

    /// Red refinement: every triangle is split into four congruent children
    /// through its edge midpoints. Midpoint of edge `e` becomes vertex
    /// `num_vertices + e`.
    pub fn uniform_refine(&self) -> Result<Self> {
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend(self.edges.iter().map(|e| {
            self.vertices[e.vertices[0]].midpoint(self.vertices[e.vertices[1]])
        }));
        let mut tris = Vec::with_capacity(4 * self.triangles.len());
        for t in &self.triangles {
            let [a, b, c] = t.vertices;
            let [ma, mb, mc] = t.edges.map(|e| nv + e);
            tris.push([a, mc, mb]);
            tris.push([mc, b, ma]);
            tris.push([mb, ma, c]);
            tris.push([ma, mb, mc]);
        }
        Self::from_triangles(vertices, &tris)
    }

    /// Reads the plain-text format: `V T`, then `V` lines `x y`, then `T`
    /// lines `i j k` (0-based, counter-clockwise).
    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true));

        let mut next_fields = |what: &str| -> Result<(usize, Vec<String>)> {
            match lines.next() {
                Some((line, Ok(text))) => Ok((line, text.split_whitespace().map(str::to_owned).collect())),
                Some((line, Err(e))) => Err(Error::MeshParse { line, message: e.to_string() }),
                None => Err(Error::MeshParse { line: 0, message: format!("unexpected end of file, expected {what}") }),
            }
        };
        fn parse<V: std::str::FromStr>(line: usize, field: &str) -> Result<V> {
            field.parse().map_err(|_| Error::MeshParse {
                line,
                message: format!("cannot parse {field:?}"),
            })
        }

        let (line, header) = next_fields("header")?;
        if header.len() != 2 {
            return Err(Error::MeshParse { line, message: "header must be `V T`".into() });
        }
        let nv: usize = parse(line, &header[0])?;
        let nt: usize = parse(line, &header[1])?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (line, f) = next_fields("vertex")?;
            if f.len() != 2 {
                return Err(Error::MeshParse { line, message: "vertex line must be `x y`".into() });
            }
            let x: f64 = parse(line, &f[0])?;
            let y: f64 = parse(line, &f[1])?;
            vertices.push(Point2::new(T::lit(x), T::lit(y)));
        }
        let mut tris = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (line, f) = next_fields("triangle")?;
            if f.len() != 3 {
                return Err(Error::MeshParse { line, message: "triangle line must be `i j k`".into() });
            }
            tris.push([parse(line, &f[0])?, parse(line, &f[1])?, parse(line, &f[2])?]);
        }
        Self::from_triangles(vertices, &tris)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_interior_edges(&self) -> usize {
        self.edges.iter().filter(|e| !e.is_boundary).count()
    }

    pub fn triangle_points(&self, t: usize) -> [Point2<T>; 3] {
        self.triangles[t].vertices.map(|v| self.vertices[v])
    }

    /// Signed area; positive for counter-clockwise triangles.
    pub fn signed_area(&self, t: usize) -> T {
        let [a, b, c] = self.triangle_points(t);
        T::lit(0.5) * (b - a).cross(c - a)
    }

    pub fn edge_points(&self, e: usize) -> [Point2<T>; 2] {
        self.edges[e].vertices.map(|v| self.vertices[v])
    }

    /// Checks orientation, adjacency, the Euler relation and that boundary
    /// edges lie on the boundary of the unit square.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        let tol = T::lit(1e-12);

        for t in 0..self.triangles.len() {
            let area = self.signed_area(t);
            if !(area > T::zero()) {
                issues.push(MeshIssue::Orientation { triangle: t, area: area.to_f64_lossy() });
            }
        }

        for (t, tri) in self.triangles.iter().enumerate() {
            for i in 0..3 {
                let e = tri.edges[i];
                let Some(edge) = self.edges.get(e) else {
                    issues.push(MeshIssue::Adjacency(format!("triangle {t} references missing edge {e}")));
                    continue;
                };
                let (a, b) = (tri.vertices[(i + 1) % 3], tri.vertices[(i + 2) % 3]);
                if edge.vertices != [a.min(b), a.max(b)] {
                    issues.push(MeshIssue::Adjacency(format!(
                        "triangle {t} local edge {i} is ({a}, {b}) but edge {e} joins {:?}",
                        edge.vertices
                    )));
                }
                if !edge.triangles.contains(&t) {
                    issues.push(MeshIssue::Adjacency(format!("edge {e} does not list triangle {t}")));
                }
            }
        }

        for (e, edge) in self.edges.iter().enumerate() {
            let count = edge.triangles.len();
            if count == 0 || count > 2 {
                issues.push(MeshIssue::Adjacency(format!("edge {e} has {count} adjacent triangles")));
            }
            if edge.is_boundary != (count == 1) {
                issues.push(MeshIssue::Adjacency(format!(
                    "edge {e} boundary flag {} disagrees with {count} adjacent triangles",
                    edge.is_boundary
                )));
            }
            for &t in &edge.triangles {
                match self.triangles.get(t) {
                    Some(tri) if tri.edges.contains(&e) => {}
                    _ => issues.push(MeshIssue::Adjacency(format!("edge {e} lists triangle {t} which does not own it"))),
                }
            }
            if !(edge.length > T::zero()) {
                issues.push(MeshIssue::Adjacency(format!("edge {e} has non-positive length")));
            }
            if edge.is_boundary {
                let [p, q] = edge.vertices.map(|v| self.vertices.get(v).copied().unwrap_or_default());
                let on_side = |a: T, b: T, s: T| (a - s).abs() <= tol && (b - s).abs() <= tol;
                let on_boundary = on_side(p.x, q.x, T::zero())
                    || on_side(p.x, q.x, T::one())
                    || on_side(p.y, q.y, T::zero())
                    || on_side(p.y, q.y, T::one());
                if !on_boundary {
                    issues.push(MeshIssue::BoundaryOffDomain { edge: e });
                }
            }
        }

        let (v, e, t) = (self.vertices.len() as i64, self.edges.len() as i64, self.triangles.len() as i64);
        if v - e + t != 1 {
            issues.push(MeshIssue::Euler { vertices: v, edges: e, triangles: t });
        }

        ValidationReport { issues }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshIssue {
    Orientation { triangle: usize, area: f64 },
    Adjacency(String),
    Euler { vertices: i64, edges: i64, triangles: i64 },
    BoundaryOffDomain { edge: usize },
}

impl fmt::Display for MeshIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshIssue::Orientation { triangle, area } => {
                write!(f, "triangle {triangle} is not counter-clockwise (signed area {area:e})")
            }
            MeshIssue::Adjacency(msg) => write!(f, "adjacency: {msg}"),
            MeshIssue::Euler { vertices, edges, triangles } => {
                write!(f, "Euler relation fails: {vertices} - {edges} + {triangles} != 1")
            }
            MeshIssue::BoundaryOffDomain { edge } => write!(f, "boundary edge {edge} is off the unit square boundary"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<MeshIssue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn has_orientation_issue(&self) -> bool {
        self.issues.iter().any(|i| matches!(i, MeshIssue::Orientation { .. }))
    }

    pub fn has_adjacency_issue(&self) -> bool {
        self.issues.iter().any(|i| matches!(i, MeshIssue::Adjacency(_)))
    }
}
