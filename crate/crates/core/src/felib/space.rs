//! Global degree-of-freedom numbering for continuous Lagrange spaces.
//!
//! Numbering: mesh vertices first (same index), then `r - 1` nodes per edge
//! ordered from the edge's low vertex to its high vertex, then cell-interior
//! nodes. On the structured square mesh this gives `(rM + 1)^2` DOFs.

use std::sync::Arc;

use super::element::{reference_element, ReferenceElement};
use super::quadrature::QuadratureRule;
use crate::error::Result;
use crate::mesh::{Mesh, LOCAL_EDGES};

/// Affine map `x = origin + jac * xi` of one triangle.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub origin: [f64; 2],
    /// Columns are the edge vectors `p1 - p0`, `p2 - p0`.
    pub jac: [[f64; 2]; 2],
    /// Inverse transpose of `jac`, mapping reference gradients to physical ones.
    pub jinv_t: [[f64; 2]; 2],
    /// Jacobian determinant, twice the signed area.
    pub det: f64,
}

impl CellGeometry {
    fn new([p0, p1, p2]: [[f64; 2]; 3]) -> Self {
        let jac = [
            [p1[0] - p0[0], p2[0] - p0[0]],
            [p1[1] - p0[1], p2[1] - p0[1]],
        ];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let jinv_t = [
            [jac[1][1] / det, -jac[1][0] / det],
            [-jac[0][1] / det, jac[0][0] / det],
        ];
        Self {
            origin: p0,
            jac,
            jinv_t,
            det,
        }
    }

    #[inline]
    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * xi[0] + self.jac[0][1] * xi[1],
            self.origin[1] + self.jac[1][0] * xi[0] + self.jac[1][1] * xi[1],
        ]
    }

    #[inline]
    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.jinv_t[0][0] * g[0] + self.jinv_t[0][1] * g[1],
            self.jinv_t[1][0] * g[0] + self.jinv_t[1][1] * g[1],
        ]
    }
}

/// Basis values and reference gradients of one element at the points of one rule.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub nloc: usize,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// `values[q * nloc + i]`
    pub values: Vec<f64>,
    /// `ref_grads[q * nloc + i]`
    pub ref_grads: Vec<[f64; 2]>,
}

impl Tabulation {
    pub fn new(element: &dyn ReferenceElement, rule: &QuadratureRule) -> Self {
        let nloc = element.num_nodes();
        let nq = rule.len();
        let mut values = vec![0.0; nq * nloc];
        let mut ref_grads = vec![[0.0; 2]; nq * nloc];
        for (q, &p) in rule.points().iter().enumerate() {
            element.eval_basis(p, &mut values[q * nloc..(q + 1) * nloc]);
            element.eval_grad(p, &mut ref_grads[q * nloc..(q + 1) * nloc]);
        }
        Self {
            nloc,
            points: rule.points().to_vec(),
            weights: rule.weights().to_vec(),
            values,
            ref_grads,
        }
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }
}

#[derive(Debug)]
struct SpaceData {
    mesh: Mesh,
    element: Arc<dyn ReferenceElement>,
    ndof: usize,
    cell_dofs: Vec<usize>,
    dof_coords: Vec<[f64; 2]>,
    geometry: Vec<CellGeometry>,
}

/// A continuous degree-`r` Lagrange space on a mesh. Cloning is cheap.
#[derive(Debug, Clone)]
pub struct FeSpace {
    inner: Arc<SpaceData>,
}

impl PartialEq for FeSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }
}

impl FeSpace {
    pub fn new(mesh: Mesh, element: Arc<dyn ReferenceElement>) -> Self {
        let nloc = element.num_nodes();
        let per_edge = element.nodes_per_edge();
        let per_cell = element.nodes_per_interior();
        let nv = mesh.vertices().len();
        let ne = mesh.edges().len();
        let nt = mesh.num_triangles();
        let ndof = nv + per_edge * ne + per_cell * nt;

        let mut cell_dofs = Vec::with_capacity(nt * nloc);
        for (t, tri) in mesh.triangles().iter().enumerate() {
            cell_dofs.extend_from_slice(tri);
            for (k, &(a, b)) in LOCAL_EDGES.iter().enumerate() {
                let e = mesh.triangle_edges()[t][k];
                let base = nv + e * per_edge;
                if tri[a] < tri[b] {
                    cell_dofs.extend(base..base + per_edge);
                } else {
                    cell_dofs.extend((base..base + per_edge).rev());
                }
            }
            let base = nv + per_edge * ne + t * per_cell;
            cell_dofs.extend(base..base + per_cell);
        }

        let geometry: Vec<_> = (0..nt)
            .map(|t| CellGeometry::new(mesh.triangle_coords(t)))
            .collect();

        let mut dof_coords = vec![[f64::NAN; 2]; ndof];
        for t in 0..nt {
            for (i, &node) in element.nodes().iter().enumerate() {
                dof_coords[cell_dofs[t * nloc + i]] = geometry[t].map(node);
            }
        }

        Self {
            inner: Arc::new(SpaceData {
                mesh,
                element,
                ndof,
                cell_dofs,
                dof_coords,
                geometry,
            }),
        }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.inner.mesh
    }

    pub fn element(&self) -> &dyn ReferenceElement {
        self.inner.element.as_ref()
    }

    pub fn degree(&self) -> usize {
        self.inner.element.degree()
    }

    pub fn ndof(&self) -> usize {
        self.inner.ndof
    }

    pub fn nloc(&self) -> usize {
        self.inner.element.num_nodes()
    }

    pub fn num_cells(&self) -> usize {
        self.inner.geometry.len()
    }

    /// Global DOFs of triangle `t`, in local node order.
    #[inline]
    pub fn cell_dofs(&self, t: usize) -> &[usize] {
        let n = self.nloc();
        &self.inner.cell_dofs[t * n..(t + 1) * n]
    }

    pub fn dof_coords(&self) -> &[[f64; 2]] {
        &self.inner.dof_coords
    }

    #[inline]
    pub fn geometry(&self, t: usize) -> &CellGeometry {
        &self.inner.geometry[t]
    }

    pub fn tabulate(&self, rule: &QuadratureRule) -> Tabulation {
        Tabulation::new(self.element(), rule)
    }
}

/// Degree-`r` Lagrange space on `mesh`.
pub fn build_space(mesh: Mesh, r: usize) -> Result<FeSpace> {
    Ok(FeSpace::new(mesh, reference_element(r)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ndof_examples() {
        assert_eq!(build_space(build_mesh(8).unwrap(), 2).unwrap().ndof(), 289);
        assert_eq!(build_space(build_mesh(8).unwrap(), 3).unwrap().ndof(), 625);
        assert_eq!(build_space(build_mesh(1).unwrap(), 1).unwrap().ndof(), 4);
        assert!(build_space(build_mesh(1).unwrap(), 4).is_err());
    }

    #[test]
    fn ndof_formula() {
        for m in 1..6 {
            for r in 1..=3 {
                let s = build_space(build_mesh(m).unwrap(), r).unwrap();
                assert_eq!(s.ndof(), (r * m + 1).pow(2));
            }
        }
    }

    #[test]
    fn shared_dofs_have_consistent_coordinates() {
        // every (cell, local node) pair must map its node to the stored DOF coordinate
        for r in 1..=3 {
            let s = build_space(build_mesh(4).unwrap(), r).unwrap();
            let el = s.element();
            let mut hits = vec![0usize; s.ndof()];
            for t in 0..s.num_cells() {
                for (i, &d) in s.cell_dofs(t).iter().enumerate() {
                    let x = s.geometry(t).map(el.nodes()[i]);
                    assert_abs_diff_eq!(x[0], s.dof_coords()[d][0], epsilon = 1e-14);
                    assert_abs_diff_eq!(x[1], s.dof_coords()[d][1], epsilon = 1e-14);
                    hits[d] += 1;
                }
            }
            assert!(hits.iter().all(|&h| h > 0));
        }
    }

    #[test]
    fn dof_coords_lie_on_lattice() {
        let m = 3;
        let r = 3;
        let s = build_space(build_mesh(m).unwrap(), r).unwrap();
        let n = (r * m) as f64;
        let mut keys: Vec<(i64, i64)> = s
            .dof_coords()
            .iter()
            .map(|p| {
                let (i, j) = ((p[0] * n).round(), (p[1] * n).round());
                assert_abs_diff_eq!(p[0] * n, i, epsilon = 1e-12);
                assert_abs_diff_eq!(p[1] * n, j, epsilon = 1e-12);
                (i as i64, j as i64)
            })
            .collect();
        keys.sort_unstable();
        keys.dedup();
        assert_eq!(keys.len(), s.ndof());
    }

    #[test]
    fn jacobian_det_is_twice_area() {
        let mesh = build_mesh(5).unwrap();
        let areas: Vec<f64> = (0..mesh.num_triangles())
            .map(|t| mesh.signed_area(t))
            .collect();
        let s = build_space(mesh, 2).unwrap();
        for (t, a) in areas.iter().enumerate() {
            assert!(s.geometry(t).det > 0.0);
            assert_abs_diff_eq!(s.geometry(t).det, 2.0 * a, epsilon = 1e-15);
        }
    }
}
