use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point2};
use crate::scalar::Real;

/// Affine map x = v0 + J (ξ, η) of the reference triangle onto element K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry<T> {
    pub vertices: [Point2<T>; 3],
    pub jac: [[T; 2]; 2],
    pub inv: [[T; 2]; 2],
    /// det J = 2 |K| > 0.
    pub det: T,
    pub area: T,
    pub diameter: T,
}

impl<T: Real> ElementGeometry<T> {
    pub fn new(mesh: &Mesh<T>, element: usize) -> Result<Self> {
        let v = mesh.triangle_points(element);
        let jac = [[v[1].x - v[0].x, v[2].x - v[0].x], [v[1].y - v[0].y, v[2].y - v[0].y]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if !(det > T::zero()) {
            return Err(Error::DegenerateElement {
                element,
                area: (det * T::lit(0.5)).to_f64_lossy(),
            });
        }
        let inv = [[jac[1][1] / det, -jac[0][1] / det], [-jac[1][0] / det, jac[0][0] / det]];
        Ok(Self {
            vertices: v,
            jac,
            inv,
            det,
            area: det * T::lit(0.5),
            diameter: mesh.triangles[element].diameter,
        })
    }

    pub fn map(&self, xi: T, eta: T) -> Point2<T> {
        Point2::new(
            self.vertices[0].x + self.jac[0][0] * xi + self.jac[0][1] * eta,
            self.vertices[0].y + self.jac[1][0] * xi + self.jac[1][1] * eta,
        )
    }

    /// Physical gradient from a reference gradient: J⁻ᵀ ∇_ξ.
    pub fn grad(&self, g: [T; 2]) -> [T; 2] {
        [
            self.inv[0][0] * g[0] + self.inv[1][0] * g[1],
            self.inv[0][1] * g[0] + self.inv[1][1] * g[1],
        ]
    }

    /// Physical Hessian `[xx, xy, yy]` from a reference one: J⁻ᵀ H J⁻¹.
    pub fn hess(&self, h: [T; 3]) -> [T; 3] {
        let hr = [[h[0], h[1]], [h[1], h[2]]];
        let g = &self.inv;
        let entry = |a: usize, b: usize| {
            let mut s = T::zero();
            for c in 0..2 {
                for d in 0..2 {
                    s += g[c][a] * hr[c][d] * g[d][b];
                }
            }
            s
        };
        [entry(0, 0), entry(0, 1), entry(1, 1)]
    }
}

/// Local edge `s` of an element as seen from that element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeSide<T> {
    pub edge: usize,
    /// The local vertex order (s+1, s+2) matches the global edge orientation.
    pub forward: bool,
    pub normal: Point2<T>,
    pub length: T,
    pub is_boundary: bool,
}

impl<T: Real> EdgeSide<T> {
    pub fn new(mesh: &Mesh<T>, element: usize, s: usize) -> Self {
        let tri = &mesh.triangles[element];
        let e = tri.edges[s];
        let edge = &mesh.edges[e];
        let forward = tri.vertices[(s + 1) % 3] == edge.vertices[0];
        let normal = if edge.triangles[0] == element {
            edge.normal
        } else {
            edge.normal * -T::one()
        };
        Self {
            edge: e,
            forward,
            normal,
            length: edge.length,
            is_boundary: edge.is_boundary,
        }
    }

    pub fn all(mesh: &Mesh<T>, element: usize) -> [Self; 3] {
        [0, 1, 2].map(|s| Self::new(mesh, element, s))
    }
}

/// Reference coordinates of the point with global edge parameter `t` on
/// local edge `s`.
pub(crate) fn edge_reference_point<T: Real>(s: usize, forward: bool, t: T) -> (T, T) {
    let half = T::lit(0.5);
    let (a, b) = ((s + 1) % 3, (s + 2) % 3);
    let mut lam = [T::zero(); 3];
    let (la, lb) = (half * (T::one() - t), half * (T::one() + t));
    if forward {
        lam[a] = la;
        lam[b] = lb;
    } else {
        lam[a] = lb;
        lam[b] = la;
    }
    (lam[1], lam[2])
}
