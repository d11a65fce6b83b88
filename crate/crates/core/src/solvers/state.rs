use crate::mesh::StructuredTriMesh;

/// Unknown blocks of the coupled system, in monolithic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Field {
    Phi,
    Mu,
    U,
    P,
    Q,
}

impl Field {
    pub const ALL: [Field; 5] = [Field::Phi, Field::Mu, Field::U, Field::P, Field::Q];

    pub fn name(self) -> &'static str {
        match self {
            Field::Phi => "phi",
            Field::Mu => "mu",
            Field::U => "u",
            Field::P => "p",
            Field::Q => "q",
        }
    }
}

/// Contiguous run of fields `first..=last` solved together.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldBlock {
    pub first: Field,
    pub last: Field,
}

impl FieldBlock {
    pub const CAHN_HILLIARD: FieldBlock = FieldBlock { first: Field::Phi, last: Field::Mu };
    pub const ELASTICITY: FieldBlock = FieldBlock { first: Field::U, last: Field::U };
    pub const FLOW: FieldBlock = FieldBlock { first: Field::P, last: Field::Q };
    pub const ALL: FieldBlock = FieldBlock { first: Field::Phi, last: Field::Q };

    pub fn contains(&self, f: Field) -> bool {
        self.first <= f && f <= self.last
    }
}

/// Sizes and offsets of the five blocks in the stacked vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub vertices: usize,
    pub cells: usize,
    pub edges: usize,
}

impl Layout {
    pub fn new(mesh: &StructuredTriMesh) -> Self {
        Self {
            vertices: mesh.num_vertices(),
            cells: mesh.num_cells(),
            edges: mesh.num_edges(),
        }
    }

    pub fn len(&self, f: Field) -> usize {
        match f {
            Field::Phi | Field::Mu => self.vertices,
            Field::U => 2 * self.vertices,
            Field::P => self.cells,
            Field::Q => self.edges,
        }
    }

    pub fn offset(&self, f: Field) -> usize {
        Field::ALL.iter().take_while(|&&g| g != f).map(|&g| self.len(g)).sum()
    }

    pub fn total(&self) -> usize {
        Field::ALL.iter().map(|&f| self.len(f)).sum()
    }

    pub fn block_offset(&self, block: FieldBlock) -> usize {
        self.offset(block.first)
    }

    pub fn block_len(&self, block: FieldBlock) -> usize {
        Field::ALL.iter().filter(|&&f| block.contains(f)).map(|&f| self.len(f)).sum()
    }

    pub fn range(&self, f: Field) -> std::ops::Range<usize> {
        let o = self.offset(f);
        o..o + self.len(f)
    }
}

/// Coefficients of `(φ, μ, u, p, q)` at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub phi: Vec<f64>,
    pub mu: Vec<f64>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Time level index.
    pub step: usize,
}

impl FieldState {
    pub fn zeros(layout: &Layout) -> Self {
        Self {
            phi: vec![0.0; layout.len(Field::Phi)],
            mu: vec![0.0; layout.len(Field::Mu)],
            u: vec![0.0; layout.len(Field::U)],
            p: vec![0.0; layout.len(Field::P)],
            q: vec![0.0; layout.len(Field::Q)],
            step: 0,
        }
    }

    pub fn field(&self, f: Field) -> &[f64] {
        match f {
            Field::Phi => &self.phi,
            Field::Mu => &self.mu,
            Field::U => &self.u,
            Field::P => &self.p,
            Field::Q => &self.q,
        }
    }

    pub fn field_mut(&mut self, f: Field) -> &mut Vec<f64> {
        match f {
            Field::Phi => &mut self.phi,
            Field::Mu => &mut self.mu,
            Field::U => &mut self.u,
            Field::P => &mut self.p,
            Field::Q => &mut self.q,
        }
    }

    /// Concatenation of the fields of `block`.
    pub fn gather(&self, block: FieldBlock) -> Vec<f64> {
        Field::ALL
            .iter()
            .filter(|&&f| block.contains(f))
            .flat_map(|&f| self.field(f).iter().copied())
            .collect()
    }

    /// Inverse of [`FieldState::gather`].
    pub fn scatter(&mut self, block: FieldBlock, values: &[f64]) {
        let mut start = 0;
        for f in Field::ALL.into_iter().filter(|&f| block.contains(f)) {
            let dst = self.field_mut(f);
            let n = dst.len();
            dst.copy_from_slice(&values[start..start + n]);
            start += n;
        }
    }

    /// Adds `delta` to the fields of `block`.
    pub fn add(&mut self, block: FieldBlock, delta: &[f64]) {
        let mut start = 0;
        for f in Field::ALL.into_iter().filter(|&f| block.contains(f)) {
            let dst = self.field_mut(f);
            for (d, v) in dst.iter_mut().zip(&delta[start..]) {
                *d += v;
            }
            start += dst.len();
        }
    }

    pub fn max_abs_diff(&self, other: &FieldState, f: Field) -> f64 {
        self.field(f)
            .iter()
            .zip(other.field(f))
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}
