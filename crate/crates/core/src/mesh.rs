//! Structured triangulations of the unit square.
//!
//! Every square of an `n × n` grid is cut along its lower-left to upper-right
//! diagonal. Edges are oriented from the lower to the higher vertex index,
//! and each cell stores, per local edge, the sign relating its outward
//! normal to that global orientation. The lowest-order Raviart-Thomas space
//! relies on this bookkeeping.

use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MeshError {
    #[error("mesh needs at least one cell per side")]
    ZeroCells,
    #[error("cell index {index} out of range for a mesh with {count} cells")]
    CellOutOfRange { index: usize, count: usize },
}

/// Which mesh entity carries the degrees of freedom of a space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntityKind {
    Vertex,
    Edge,
}

/// Local edge `i` of a cell lies opposite local vertex `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellEdge {
    pub edge: usize,
    /// `+1` when the outward normal of the cell agrees with the global
    /// edge normal, `-1` otherwise.
    pub sign: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredTriMesh {
    n: usize,
    vertices: Vec<[f64; 2]>,
    cells: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    cell_edges: Vec<[CellEdge; 3]>,
    boundary_vertices: Vec<bool>,
    boundary_edges: Vec<bool>,
}

/// Geometry of a single triangle. P1 gradients are constant per cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    pub area: f64,
    pub coords: [[f64; 2]; 3],
    pub grads: [[f64; 2]; 3],
    /// Length of the edge opposite each local vertex.
    pub edge_lengths: [f64; 3],
}

impl CellGeometry {
    pub fn from_coords(coords: [[f64; 2]; 3]) -> Self {
        let [a, b, c] = coords;
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let area = 0.5 * det;
        // grad λ_i = rot(x_{i+2} - x_{i+1}) / (2|K|)
        let mut grads = [[0.0; 2]; 3];
        let mut edge_lengths = [0.0; 3];
        for i in 0..3 {
            let p = coords[(i + 1) % 3];
            let q = coords[(i + 2) % 3];
            grads[i] = [(p[1] - q[1]) / det, (q[0] - p[0]) / det];
            edge_lengths[i] = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
        }
        Self {
            area,
            coords,
            grads,
            edge_lengths,
        }
    }

    pub fn centroid(&self) -> [f64; 2] {
        let [a, b, c] = self.coords;
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Physical point for barycentric coordinates.
    pub fn point(&self, bary: [f64; 3]) -> [f64; 2] {
        let mut x = [0.0; 2];
        for (l, c) in bary.iter().zip(&self.coords) {
            x[0] += l * c[0];
            x[1] += l * c[1];
        }
        x
    }
}

impl StructuredTriMesh {
    pub fn unit_square(n: usize) -> Result<Self, MeshError> {
        if n == 0 {
            return Err(MeshError::ZeroCells);
        }
        let side = n + 1;
        let h = 1.0 / n as f64;
        let vertices: Vec<[f64; 2]> = (0..side)
            .flat_map(|j| (0..side).map(move |i| [i as f64 * h, j as f64 * h]))
            .collect();
        let boundary_vertices = (0..side)
            .flat_map(|j| (0..side).map(move |i| i == 0 || j == 0 || i == n || j == n))
            .collect();

        let idx = |i: usize, j: usize| j * side + i;
        let mut cells = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v01, v11) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
                cells.push([v00, v10, v11]);
                cells.push([v00, v11, v01]);
            }
        }

        let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * n * n + 2 * n);
        let mut edges = Vec::with_capacity(3 * n * n + 2 * n);
        let mut edge_cells = Vec::with_capacity(3 * n * n + 2 * n);
        let mut cell_edges = Vec::with_capacity(cells.len());
        for cell in &cells {
            let mut local = [CellEdge { edge: 0, sign: 1.0 }; 3];
            for (i, slot) in local.iter_mut().enumerate() {
                // counterclockwise traversal a -> b of the edge opposite vertex i
                let a = cell[(i + 1) % 3];
                let b = cell[(i + 2) % 3];
                let key = (a.min(b), a.max(b));
                let edge = *lookup.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_cells.push(0usize);
                    edges.len() - 1
                });
                edge_cells[edge] += 1;
                *slot = CellEdge {
                    edge,
                    sign: if a < b { 1.0 } else { -1.0 },
                };
            }
            cell_edges.push(local);
        }
        let boundary_edges = edge_cells.iter().map(|&c| c == 1).collect();

        Ok(Self {
            n,
            vertices,
            cells,
            edges,
            cell_edges,
            boundary_vertices,
            boundary_edges,
        })
    }

    pub fn cells_per_side(&self) -> usize {
        self.n
    }

    /// Hypotenuse length of the triangles, `√2 / n`.
    pub fn mesh_size(&self) -> f64 {
        std::f64::consts::SQRT_2 / self.n as f64
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn cell_edges(&self, cell: usize) -> &[CellEdge; 3] {
        &self.cell_edges[cell]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertices[v]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary_edges[e]
    }

    pub fn cell_geometry(&self, cell: usize) -> Result<CellGeometry, MeshError> {
        let verts = self.cells.get(cell).ok_or(MeshError::CellOutOfRange {
            index: cell,
            count: self.cells.len(),
        })?;
        Ok(CellGeometry::from_coords(verts.map(|v| self.vertices[v])))
    }

    /// Unit normal of a global edge: the tangent (low → high vertex)
    /// rotated clockwise.
    pub fn edge_normal(&self, edge: usize) -> [f64; 2] {
        let [a, b] = self.edges[edge];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        let t = [pb[0] - pa[0], pb[1] - pa[1]];
        let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
        [t[1] / len, -t[0] / len]
    }

    /// Indices of the entities lying on the boundary of the unit square.
    pub fn boundary_dofs(&self, kind: EntityKind) -> Vec<usize> {
        let flags = match kind {
            EntityKind::Vertex => &self.boundary_vertices,
            EntityKind::Edge => &self.boundary_edges,
        };
        flags
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_cells() {
        assert_eq!(StructuredTriMesh::unit_square(0), Err(MeshError::ZeroCells));
    }

    #[test]
    fn entity_counts() {
        for (n, v, c, e) in [(1, 4, 2, 5), (2, 9, 8, 16)] {
            let mesh = StructuredTriMesh::unit_square(n).unwrap();
            assert_eq!(mesh.num_vertices(), v);
            assert_eq!(mesh.num_cells(), c);
            assert_eq!(mesh.num_edges(), e);
        }
        for n in 1..=20 {
            let mesh = StructuredTriMesh::unit_square(n).unwrap();
            assert_eq!(mesh.num_edges(), 3 * n * n + 2 * n);
            let euler = mesh.num_vertices() as i64 - mesh.num_edges() as i64 + mesh.num_cells() as i64;
            assert_eq!(euler, 1);
        }
    }

    #[test]
    fn full_resolution_mesh_size() {
        let mesh = StructuredTriMesh::unit_square(65).unwrap();
        assert!((mesh.mesh_size() - 2f64.sqrt() / 65.0).abs() < 1e-15);
        let g = mesh.cell_geometry(0).unwrap();
        let hyp = g.edge_lengths.iter().cloned().fold(0.0, f64::max);
        assert!((hyp - mesh.mesh_size()).abs() < 1e-15);
    }

    #[test]
    fn cell_geometry_basics() {
        let g = CellGeometry::from_coords([[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]]);
        assert!((g.area - 0.125).abs() < 1e-15);
        let s = g.grads.iter().fold([0.0, 0.0], |a, d| [a[0] + d[0], a[1] + d[1]]);
        assert!(s[0].abs() < 1e-14 && s[1].abs() < 1e-14);

        let mesh = StructuredTriMesh::unit_square(1).unwrap();
        for c in 0..2 {
            assert!((mesh.cell_geometry(c).unwrap().area - 0.5).abs() < 1e-15);
        }
        assert_eq!(
            mesh.cell_geometry(2),
            Err(MeshError::CellOutOfRange { index: 2, count: 2 })
        );
    }

    #[test]
    fn areas_sum_to_one() {
        for n in 1..=65 {
            let mesh = StructuredTriMesh::unit_square(n).unwrap();
            let total: f64 = (0..mesh.num_cells())
                .map(|c| {
                    let a = mesh.cell_geometry(c).unwrap().area;
                    assert!(a > 0.0);
                    a
                })
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "n={n}: {total}");
        }
    }

    #[test]
    fn edge_sharing_and_signs() {
        let mesh = StructuredTriMesh::unit_square(5).unwrap();
        let mut incident: Vec<Vec<f64>> = vec![Vec::new(); mesh.num_edges()];
        for c in 0..mesh.num_cells() {
            for ce in mesh.cell_edges(c) {
                incident[ce.edge].push(ce.sign);
            }
        }
        for (e, signs) in incident.iter().enumerate() {
            if mesh.is_boundary_edge(e) {
                assert_eq!(signs.len(), 1);
            } else {
                assert_eq!(signs.len(), 2);
                assert_eq!(signs[0], -signs[1]);
            }
        }
    }

    #[test]
    fn sign_matches_outward_normal() {
        let mesh = StructuredTriMesh::unit_square(3).unwrap();
        for c in 0..mesh.num_cells() {
            let g = mesh.cell_geometry(c).unwrap();
            let centroid = g.centroid();
            for (i, ce) in mesh.cell_edges(c).iter().enumerate() {
                let mid = {
                    let p = g.coords[(i + 1) % 3];
                    let q = g.coords[(i + 2) % 3];
                    [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0]
                };
                let n = mesh.edge_normal(ce.edge);
                let outward = (mid[0] - centroid[0]) * n[0] + (mid[1] - centroid[1]) * n[1];
                assert_eq!(outward.signum(), ce.sign);
            }
        }
    }

    #[test]
    fn boundary_sets() {
        let m1 = StructuredTriMesh::unit_square(1).unwrap();
        assert_eq!(m1.boundary_dofs(EntityKind::Vertex), vec![0, 1, 2, 3]);
        let m2 = StructuredTriMesh::unit_square(2).unwrap();
        assert_eq!(m2.boundary_dofs(EntityKind::Vertex).len(), 8);
        assert_eq!(m2.boundary_dofs(EntityKind::Edge).len(), 8);
    }

    #[test]
    fn construction_is_deterministic() {
        assert_eq!(
            StructuredTriMesh::unit_square(7).unwrap(),
            StructuredTriMesh::unit_square(7).unwrap()
        );
    }
}
