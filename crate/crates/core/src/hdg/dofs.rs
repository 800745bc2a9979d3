use std::ops::Range;

use super::SpaceSpec;
use crate::mesh::Mesh;
use crate::scalar::Real;

/// Where a local unknown lives globally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Free(usize),
    /// Boundary facet coefficient `index` of `edge`, fixed by the data.
    Fixed { edge: usize, index: usize },
}

/// Global numbering: [u | û on interior edges | p | λ].
///
/// Within an element, velocity unknowns are component-major (all of u₁,
/// then all of u₂); within an edge, facet unknowns are component-major too.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    pub k: usize,
    nu: usize,
    nf: usize,
    np: usize,
    n_elements: usize,
    /// Interior-edge index of each edge, `None` on the boundary.
    interior: Vec<Option<usize>>,
    n_interior: usize,
}

impl DofMap {
    pub fn new<T: Real>(mesh: &Mesh<T>, spec: &SpaceSpec<T>) -> Self {
        let mut n_interior = 0;
        let interior = mesh
            .edges
            .iter()
            .map(|e| {
                if e.is_boundary {
                    None
                } else {
                    n_interior += 1;
                    Some(n_interior - 1)
                }
            })
            .collect();
        Self {
            k: spec.k,
            nu: spec.nu(),
            nf: spec.nf(),
            np: spec.np(),
            n_elements: mesh.num_triangles(),
            interior,
            n_interior,
        }
    }

    pub fn num_elements(&self) -> usize {
        self.n_elements
    }

    pub fn num_interior_edges(&self) -> usize {
        self.n_interior
    }

    pub fn interior_index(&self, edge: usize) -> Option<usize> {
        self.interior[edge]
    }

    pub fn velocity_range(&self) -> Range<usize> {
        0..self.n_elements * 2 * self.nu
    }

    pub fn facet_range(&self) -> Range<usize> {
        let s = self.velocity_range().end;
        s..s + self.n_interior * 2 * self.nf
    }

    pub fn pressure_range(&self) -> Range<usize> {
        let s = self.facet_range().end;
        s..s + self.n_elements * self.np
    }

    pub fn multiplier(&self) -> usize {
        self.pressure_range().end
    }

    pub fn dim(&self) -> usize {
        self.multiplier() + 1
    }

    pub fn velocity(&self, element: usize, component: usize, i: usize) -> usize {
        element * 2 * self.nu + component * self.nu + i
    }

    pub fn facet(&self, edge: usize, component: usize, m: usize) -> Slot {
        let index = component * self.nf + m;
        match self.interior[edge] {
            Some(ie) => Slot::Free(self.facet_range().start + ie * 2 * self.nf + index),
            None => Slot::Fixed { edge, index },
        }
    }

    pub fn pressure(&self, element: usize, l: usize) -> usize {
        self.pressure_range().start + element * self.np + l
    }

    /// Global slots of the local unknowns of `element`, in local order.
    pub fn element_slots<T: Real>(&self, mesh: &Mesh<T>, element: usize) -> Vec<Slot> {
        let mut out = Vec::with_capacity(2 * self.nu + 6 * self.nf + self.np);
        for c in 0..2 {
            for i in 0..self.nu {
                out.push(Slot::Free(self.velocity(element, c, i)));
            }
        }
        for &e in &mesh.triangles[element].edges {
            for c in 0..2 {
                for m in 0..self.nf {
                    out.push(self.facet(e, c, m));
                }
            }
        }
        for l in 0..self.np {
            out.push(Slot::Free(self.pressure(element, l)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k0_structured2_dimension() {
        let mesh = Mesh::<f64>::structured_unit_square(2).unwrap();
        let spec = SpaceSpec::new(0).unwrap();
        let d = DofMap::new(&mesh, &spec);
        assert_eq!(d.velocity_range().len(), 48);
        assert_eq!(d.facet_range().len(), 16);
        assert_eq!(d.pressure_range().len(), 8);
        assert_eq!(d.dim(), 73);
    }

    #[test]
    fn slots_cover_free_range_once_per_element() {
        let mesh = Mesh::<f64>::structured_unit_square(3).unwrap();
        let spec = SpaceSpec::new(1).unwrap();
        let d = DofMap::new(&mesh, &spec);
        let mut hits = vec![0usize; d.dim()];
        for k in 0..mesh.num_triangles() {
            for s in d.element_slots(&mesh, k) {
                if let Slot::Free(g) = s {
                    hits[g] += 1;
                }
            }
        }
        for g in d.velocity_range().chain(d.pressure_range()) {
            assert_eq!(hits[g], 1);
        }
        for g in d.facet_range() {
            assert_eq!(hits[g], 2);
        }
        assert_eq!(hits[d.multiplier()], 0);
    }
}
