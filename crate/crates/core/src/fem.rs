//! Function spaces and element-level assembly on [`StructuredTriMesh`].
//!
//! Four discretizations are supported: scalar P1 (phase-field and chemical
//! potential), vector P1 (displacement), P0 (pressure) and lowest-order
//! Raviart-Thomas (flux). Vector P1 dofs are interleaved per vertex,
//! `2·v + component`.

use thiserror::Error;

use crate::linalg::{SparseMatrix, TripletBuffer};
use crate::mesh::{CellGeometry, EntityKind, StructuredTriMesh};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("function spaces live on different meshes")]
    MeshMismatch,
    #[error("operation not defined for a {0:?} space")]
    UnsupportedSpace(SpaceKind),
    #[error("dof {dof} out of range (system size {size})")]
    DofOutOfRange { dof: usize, size: usize },
    #[error("coefficient vector has length {found}, space has {expected} dofs")]
    LengthMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    P1,
    P1Vector,
    P0,
    Rt0,
}

/// Symmetric quadrature on triangles; weights are fractions of the cell
/// area and sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    /// Seven-point rule, exact for polynomials of degree 5.
    pub fn degree5() -> Self {
        let s15 = 15f64.sqrt();
        let a1 = (6.0 - s15) / 21.0;
        let a2 = (6.0 + s15) / 21.0;
        let w1 = (155.0 - s15) / 1200.0;
        let w2 = (155.0 + s15) / 1200.0;
        let b1 = 1.0 - 2.0 * a1;
        let b2 = 1.0 - 2.0 * a2;
        let third = 1.0 / 3.0;
        Self {
            points: vec![
                [third, third, third],
                [a1, a1, b1],
                [a1, b1, a1],
                [b1, a1, a1],
                [a2, a2, b2],
                [a2, b2, a2],
                [b2, a2, a2],
            ],
            weights: vec![9.0 / 40.0, w1, w1, w1, w2, w2, w2],
            degree: 5,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 3], f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::degree5()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FunctionSpace<'m> {
    kind: SpaceKind,
    mesh: &'m StructuredTriMesh,
}

impl<'m> FunctionSpace<'m> {
    pub fn new(kind: SpaceKind, mesh: &'m StructuredTriMesh) -> Self {
        Self { kind, mesh }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn mesh(&self) -> &'m StructuredTriMesh {
        self.mesh
    }

    pub fn ndofs(&self) -> usize {
        match self.kind {
            SpaceKind::P1 => self.mesh.num_vertices(),
            SpaceKind::P1Vector => 2 * self.mesh.num_vertices(),
            SpaceKind::P0 => self.mesh.num_cells(),
            SpaceKind::Rt0 => self.mesh.num_edges(),
        }
    }

    pub fn local_dofs(&self) -> usize {
        match self.kind {
            SpaceKind::P1 | SpaceKind::Rt0 => 3,
            SpaceKind::P1Vector => 6,
            SpaceKind::P0 => 1,
        }
    }

    /// Global dofs of a cell in local order.
    pub fn cell_dofs(&self, cell: usize) -> Vec<usize> {
        let verts = &self.mesh.cells()[cell];
        match self.kind {
            SpaceKind::P1 => verts.to_vec(),
            SpaceKind::P1Vector => verts.iter().flat_map(|&v| [2 * v, 2 * v + 1]).collect(),
            SpaceKind::P0 => vec![cell],
            SpaceKind::Rt0 => self.mesh.cell_edges(cell).iter().map(|e| e.edge).collect(),
        }
    }

    /// Dofs on the boundary of the domain.
    pub fn boundary_dofs(&self) -> Vec<usize> {
        match self.kind {
            SpaceKind::P1 => self.mesh.boundary_dofs(EntityKind::Vertex),
            SpaceKind::P1Vector => self
                .mesh
                .boundary_dofs(EntityKind::Vertex)
                .into_iter()
                .flat_map(|v| [2 * v, 2 * v + 1])
                .collect(),
            SpaceKind::Rt0 => self.mesh.boundary_dofs(EntityKind::Edge),
            SpaceKind::P0 => Vec::new(),
        }
    }

    fn same_mesh(&self, other: &FunctionSpace<'_>) -> bool {
        std::ptr::eq(self.mesh, other.mesh)
    }
}

/// Coefficients of a discrete function.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFunction {
    pub kind: SpaceKind,
    pub values: Vec<f64>,
}

impl FieldFunction {
    pub fn new(space: &FunctionSpace<'_>, values: Vec<f64>) -> Result<Self, FemError> {
        if values.len() != space.ndofs() {
            return Err(FemError::LengthMismatch {
                expected: space.ndofs(),
                found: values.len(),
            });
        }
        Ok(Self {
            kind: space.kind(),
            values,
        })
    }

    pub fn zeros(space: &FunctionSpace<'_>) -> Self {
        Self {
            kind: space.kind(),
            values: vec![0.0; space.ndofs()],
        }
    }
}

/// Per-cell data handed to assembly kernels.
#[derive(Debug, Clone, Copy)]
pub struct CellData {
    pub index: usize,
    pub geometry: CellGeometry,
    /// Orientation signs of the three local edges.
    pub edge_signs: [f64; 3],
}

impl CellData {
    pub fn new(mesh: &StructuredTriMesh, index: usize) -> Self {
        let geometry = mesh.cell_geometry(index).expect("cell index from mesh loop");
        let edge_signs = mesh.cell_edges(index).map(|e| e.sign);
        Self {
            index,
            geometry,
            edge_signs,
        }
    }
}

/// Basis functions evaluated at one point of a cell.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisEval {
    Scalar {
        values: Vec<f64>,
        gradients: Vec<[f64; 2]>,
    },
    Vector {
        values: Vec<[f64; 2]>,
        divergences: Vec<f64>,
    },
}

pub fn p1_values(bary: [f64; 3]) -> [f64; 3] {
    bary
}

/// Voigt strains `(ε_xx, ε_yy, 2ε_xy)` of the six vector P1 basis
/// functions, ordered `(vertex, component)`.
pub fn p1_vector_strains(geom: &CellGeometry) -> [[f64; 3]; 6] {
    let mut out = [[0.0; 3]; 6];
    for (a, g) in geom.grads.iter().enumerate() {
        out[2 * a] = [g[0], 0.0, g[1]];
        out[2 * a + 1] = [0.0, g[1], g[0]];
    }
    out
}

/// Divergences of the six vector P1 basis functions.
pub fn p1_vector_divergences(geom: &CellGeometry) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (a, g) in geom.grads.iter().enumerate() {
        out[2 * a] = g[0];
        out[2 * a + 1] = g[1];
    }
    out
}

/// Raviart-Thomas basis of the edge opposite vertex `i`, oriented along the
/// global edge normal: `σ_i |E_i| / (2|K|) · (x − x_i)`. Its normal
/// component on `E_i` is 1 and vanishes on the other two edges.
pub fn rt0_values(geom: &CellGeometry, signs: &[f64; 3], x: [f64; 2]) -> [[f64; 2]; 3] {
    let mut out = [[0.0; 2]; 3];
    for i in 0..3 {
        let scale = signs[i] * geom.edge_lengths[i] / (2.0 * geom.area);
        let xi = geom.coords[i];
        out[i] = [scale * (x[0] - xi[0]), scale * (x[1] - xi[1])];
    }
    out
}

/// Constant divergences `σ_i |E_i| / |K|`.
pub fn rt0_divergences(geom: &CellGeometry, signs: &[f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| signs[i] * geom.edge_lengths[i] / geom.area)
}

pub fn eval_basis(kind: SpaceKind, cell: &CellData, bary: [f64; 3]) -> BasisEval {
    let geom = &cell.geometry;
    match kind {
        SpaceKind::P1 => BasisEval::Scalar {
            values: p1_values(bary).to_vec(),
            gradients: geom.grads.to_vec(),
        },
        SpaceKind::P0 => BasisEval::Scalar {
            values: vec![1.0],
            gradients: vec![[0.0, 0.0]],
        },
        SpaceKind::P1Vector => {
            let l = p1_values(bary);
            let values = (0..6)
                .map(|k| if k % 2 == 0 { [l[k / 2], 0.0] } else { [0.0, l[k / 2]] })
                .collect();
            BasisEval::Vector {
                values,
                divergences: p1_vector_divergences(geom).to_vec(),
            }
        }
        SpaceKind::Rt0 => BasisEval::Vector {
            values: rt0_values(geom, &cell.edge_signs, geom.point(bary)).to_vec(),
            divergences: rt0_divergences(geom, &cell.edge_signs).to_vec(),
        },
    }
}

/// Loops over cells, lets `kernel` fill the dense local matrix (row-major,
/// test dofs × trial dofs) and scatters it into a triplet buffer.
pub fn assemble_bilinear<F>(
    test: &FunctionSpace<'_>,
    trial: &FunctionSpace<'_>,
    mut kernel: F,
) -> Result<TripletBuffer, FemError>
where
    F: FnMut(&CellData, &mut [f64]),
{
    if !test.same_mesh(trial) {
        return Err(FemError::MeshMismatch);
    }
    let mesh = test.mesh();
    let (nr, nc) = (test.local_dofs(), trial.local_dofs());
    let mut buf = TripletBuffer::with_capacity(test.ndofs(), trial.ndofs(), mesh.num_cells() * nr * nc);
    let mut local = vec![0.0; nr * nc];
    for c in 0..mesh.num_cells() {
        let cell = CellData::new(mesh, c);
        local.iter_mut().for_each(|v| *v = 0.0);
        kernel(&cell, &mut local);
        let rows = test.cell_dofs(c);
        let cols = trial.cell_dofs(c);
        for (i, &r) in rows.iter().enumerate() {
            for (j, &col) in cols.iter().enumerate() {
                let v = local[i * nc + j];
                if v != 0.0 {
                    buf.push(r, col, v);
                }
            }
        }
    }
    Ok(buf)
}

/// Linear-form counterpart of [`assemble_bilinear`].
pub fn assemble_linear<F>(test: &FunctionSpace<'_>, mut kernel: F) -> Vec<f64>
where
    F: FnMut(&CellData, &mut [f64]),
{
    let mesh = test.mesh();
    let mut out = vec![0.0; test.ndofs()];
    let mut local = vec![0.0; test.local_dofs()];
    for c in 0..mesh.num_cells() {
        let cell = CellData::new(mesh, c);
        local.iter_mut().for_each(|v| *v = 0.0);
        kernel(&cell, &mut local);
        for (&r, v) in test.cell_dofs(c).iter().zip(&local) {
            out[r] += v;
        }
    }
    out
}

pub fn p1_local_mass(geom: &CellGeometry, quad: &QuadratureRule) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for (bary, w) in quad.iter() {
        let l = p1_values(bary);
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += w * geom.area * l[i] * l[j];
            }
        }
    }
    m
}

pub fn p1_local_stiffness(geom: &CellGeometry) -> [[f64; 3]; 3] {
    let g = &geom.grads;
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = geom.area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
    }
    k
}

pub fn mass_matrix(space: &FunctionSpace<'_>, quad: &QuadratureRule) -> Result<SparseMatrix, FemError> {
    if space.kind() != SpaceKind::P1 {
        return Err(FemError::UnsupportedSpace(space.kind()));
    }
    let buf = assemble_bilinear(space, space, |cell, local| {
        let m = p1_local_mass(&cell.geometry, quad);
        for i in 0..3 {
            local[3 * i..3 * i + 3].copy_from_slice(&m[i]);
        }
    })?;
    Ok(buf.compress().expect("mesh dofs in range"))
}

pub fn stiffness_matrix(space: &FunctionSpace<'_>) -> Result<SparseMatrix, FemError> {
    if space.kind() != SpaceKind::P1 {
        return Err(FemError::UnsupportedSpace(space.kind()));
    }
    let buf = assemble_bilinear(space, space, |cell, local| {
        let k = p1_local_stiffness(&cell.geometry);
        for i in 0..3 {
            local[3 * i..3 * i + 3].copy_from_slice(&k[i]);
        }
    })?;
    Ok(buf.compress().expect("mesh dofs in range"))
}

/// Imposes `x[dof] = value` on each constrained dof by replacing its row
/// with an identity row. With `symmetric`, the constrained columns are
/// also eliminated from the remaining rows and moved to the right-hand side.
pub fn apply_dirichlet(
    matrix: &SparseMatrix,
    rhs: &mut [f64],
    dofs: &[usize],
    value: f64,
    symmetric: bool,
) -> Result<SparseMatrix, FemError> {
    let n = matrix.nrows();
    if rhs.len() != n {
        return Err(FemError::LengthMismatch {
            expected: n,
            found: rhs.len(),
        });
    }
    let mut constrained = vec![false; n];
    for &d in dofs {
        if d >= n || d >= matrix.ncols() {
            return Err(FemError::DofOutOfRange { dof: d, size: n });
        }
        constrained[d] = true;
    }
    if symmetric {
        for i in (0..n).filter(|&i| !constrained[i]) {
            for (j, v) in matrix.row(i) {
                if constrained[j] {
                    rhs[i] -= v * value;
                }
            }
        }
    }
    let mut buf = TripletBuffer::with_capacity(n, matrix.ncols(), matrix.nnz());
    for i in 0..n {
        if constrained[i] {
            buf.push(i, i, 1.0);
            rhs[i] = value;
            continue;
        }
        for (j, v) in matrix.row(i) {
            if !(symmetric && constrained[j]) {
                buf.push(i, j, v);
            }
        }
    }
    Ok(buf.compress().expect("indices taken from an existing matrix"))
}

/// Nodal interpolation of a scalar expression: vertices for P1, centroids
/// for P0.
pub fn interpolate(space: &FunctionSpace<'_>, f: impl Fn([f64; 2]) -> f64) -> Result<FieldFunction, FemError> {
    let mesh = space.mesh();
    let values = match space.kind() {
        SpaceKind::P1 => mesh.vertices().iter().map(|&x| f(x)).collect(),
        SpaceKind::P0 => (0..mesh.num_cells())
            .map(|c| f(mesh.cell_geometry(c).expect("cell in range").centroid()))
            .collect(),
        kind => return Err(FemError::UnsupportedSpace(kind)),
    };
    Ok(FieldFunction {
        kind: space.kind(),
        values,
    })
}

/// Interpolation of a vector expression: nodal for vector P1, normal
/// component at edge midpoints for RT0.
pub fn interpolate_vector(
    space: &FunctionSpace<'_>,
    f: impl Fn([f64; 2]) -> [f64; 2],
) -> Result<FieldFunction, FemError> {
    let mesh = space.mesh();
    let values = match space.kind() {
        SpaceKind::P1Vector => mesh.vertices().iter().flat_map(|&x| f(x)).collect(),
        SpaceKind::Rt0 => (0..mesh.num_edges())
            .map(|e| {
                let [a, b] = mesh.edges()[e];
                let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
                let v = f([(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0]);
                let n = mesh.edge_normal(e);
                v[0] * n[0] + v[1] * n[1]
            })
            .collect(),
        kind => return Err(FemError::UnsupportedSpace(kind)),
    };
    Ok(FieldFunction {
        kind: space.kind(),
        values,
    })
}

/// `∫_Ω f_h` for a P1 or P0 field.
pub fn integrate_field(space: &FunctionSpace<'_>, field: &FieldFunction, quad: &QuadratureRule) -> Result<f64, FemError> {
    if field.values.len() != space.ndofs() {
        return Err(FemError::LengthMismatch {
            expected: space.ndofs(),
            found: field.values.len(),
        });
    }
    let mesh = space.mesh();
    let mut total = 0.0;
    for c in 0..mesh.num_cells() {
        let geom = mesh.cell_geometry(c).expect("cell in range");
        total += match space.kind() {
            SpaceKind::P1 => {
                let v = mesh.cells()[c].map(|i| field.values[i]);
                quad.iter()
                    .map(|(l, w)| w * (l[0] * v[0] + l[1] * v[1] + l[2] * v[2]))
                    .sum::<f64>()
                    * geom.area
            }
            SpaceKind::P0 => field.values[c] * geom.area,
            kind => return Err(FemError::UnsupportedSpace(kind)),
        };
    }
    Ok(total)
}

/// `∫_Ω f` by cellwise quadrature.
pub fn integrate_expression(mesh: &StructuredTriMesh, quad: &QuadratureRule, f: impl Fn([f64; 2]) -> f64) -> f64 {
    (0..mesh.num_cells())
        .map(|c| {
            let geom = mesh.cell_geometry(c).expect("cell in range");
            quad.iter().map(|(l, w)| w * f(geom.point(l))).sum::<f64>() * geom.area
        })
        .sum()
}

/// Value of an RT0 field at a point of a cell.
pub fn rt0_eval(mesh: &StructuredTriMesh, coeffs: &[f64], cell: usize, x: [f64; 2]) -> [f64; 2] {
    let data = CellData::new(mesh, cell);
    let psi = rt0_values(&data.geometry, &data.edge_signs, x);
    let mut v = [0.0; 2];
    for (ce, p) in mesh.cell_edges(cell).iter().zip(&psi) {
        v[0] += coeffs[ce.edge] * p[0];
        v[1] += coeffs[ce.edge] * p[1];
    }
    v
}
