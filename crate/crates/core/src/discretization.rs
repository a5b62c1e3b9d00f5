//! Uniform interior grids on intervals and rectangles, the finite-difference
//! Dirichlet Laplacian, and midpoint quadrature weights.
//!
//! Node ordering is lexicographic with the first axis fastest: node
//! `(i, j)` of a 2D grid has index `i + n·j`. Boundary nodes are never
//! stored; homogeneous Dirichlet data is built into the stencil.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{BandCholesky, BandMatrix};
use crate::math::round;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec<'a> {
    pub dimension: usize,
    pub extents: &'a [f64],
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dimension: usize,
    extents: Vec<f64>,
    n: usize,
    spacing: Vec<f64>,
    coords: Vec<f64>,
    cell_measure: f64,
}

/// Builds the interior grid; `h = extent / (n + 1)` on every axis.
pub fn build_grid(spec: DomainSpec<'_>) -> Result<Grid> {
    let DomainSpec { dimension, extents, n } = spec;
    if !(1..=2).contains(&dimension) {
        return Err(Error::InvalidGrid(format!("dimension {dimension} not in {{1, 2}}")));
    }
    if extents.len() != dimension {
        return Err(Error::InvalidGrid(format!("{} extents given for dimension {dimension}", extents.len())));
    }
    if n < 3 {
        return Err(Error::InvalidGrid(format!("n = {n}; need at least 3 interior nodes per axis")));
    }
    if let Some(e) = extents.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidGrid(format!("extent {e} is not positive")));
    }
    let spacing: Vec<f64> = extents.iter().map(|e| e / (n as f64 + 1.0)).collect();
    let count = n.pow(dimension as u32);
    let mut coords = Vec::with_capacity(count * dimension);
    for idx in 0..count {
        let mut rest = idx;
        for h in &spacing {
            coords.push((rest % n + 1) as f64 * h);
            rest /= n;
        }
    }
    let cell_measure = spacing.iter().product();
    Ok(Grid { dimension, extents: extents.to_vec(), n, spacing, coords, cell_measure })
}

impl Grid {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    /// Interior nodes per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn node(&self, index: usize) -> &[f64] {
        &self.coords[index * self.dimension..(index + 1) * self.dimension]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dimension)
    }

    pub fn cell_measure(&self) -> f64 {
        self.cell_measure
    }

    /// `|Ω|`.
    pub fn domain_measure(&self) -> f64 {
        self.extents.iter().product()
    }

    /// Per-axis node position `(i, j)`, zero based.
    pub fn multi_index(&self, index: usize) -> [usize; 2] {
        [index % self.n, if self.dimension == 2 { index / self.n } else { 0 }]
    }

    pub fn flat_index(&self, multi: [usize; 2]) -> usize {
        multi[0] + if self.dimension == 2 { self.n * multi[1] } else { 0 }
    }

    /// Inverse of [`Grid::node`] for coordinates that sit on a node.
    pub fn locate(&self, point: &[f64]) -> Option<usize> {
        if point.len() != self.dimension {
            return None;
        }
        let mut multi = [0usize; 2];
        for (axis, (x, h)) in point.iter().zip(&self.spacing).enumerate() {
            let k = round(x / h);
            if k < 1.0 || k > self.n as f64 {
                return None;
            }
            multi[axis] = k as usize - 1;
        }
        let idx = self.flat_index(multi);
        (self.node(idx) == point).then_some(idx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    ThreePoint,
    FivePoint,
}

/// Discrete `-Δ` with homogeneous Dirichlet data on the interior nodes.
#[derive(Debug, Clone)]
pub struct DirichletOperator {
    matrix: BandMatrix,
    stencil: Stencil,
    cell_measure: f64,
}

pub fn assemble_laplacian(grid: &Grid) -> DirichletOperator {
    let n = grid.n();
    let size = grid.len();
    let hx2 = grid.spacing()[0] * grid.spacing()[0];
    match grid.dimension() {
        1 => {
            let mut m = BandMatrix::zeros(size, 1);
            for i in 0..size {
                m.set(i, i, 2.0 / hx2);
                if i > 0 {
                    m.set(i, i - 1, -1.0 / hx2);
                }
            }
            DirichletOperator { matrix: m, stencil: Stencil::ThreePoint, cell_measure: grid.cell_measure() }
        }
        _ => {
            let hy2 = grid.spacing()[1] * grid.spacing()[1];
            let mut m = BandMatrix::zeros(size, n);
            for idx in 0..size {
                let [i, j] = grid.multi_index(idx);
                m.set(idx, idx, 2.0 / hx2 + 2.0 / hy2);
                if i > 0 {
                    m.set(idx, idx - 1, -1.0 / hx2);
                }
                if j > 0 {
                    m.set(idx, idx - n, -1.0 / hy2);
                }
            }
            DirichletOperator { matrix: m, stencil: Stencil::FivePoint, cell_measure: grid.cell_measure() }
        }
    }
}

/// Midpoint weights: every interior node carries one cell.
pub fn quadrature_weights(grid: &Grid) -> Vec<f64> {
    vec![grid.cell_measure(); grid.len()]
}

impl DirichletOperator {
    pub fn matrix(&self) -> &BandMatrix {
        &self.matrix
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn cell_measure(&self) -> f64 {
        self.cell_measure
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.mul(x)
    }

    pub fn factor(&self) -> BandCholesky {
        // diagonally dominant with positive diagonal, so this cannot fail
        self.matrix.cholesky().expect("Dirichlet Laplacian is positive definite")
    }

    /// Discrete `∫|∇u|²`.
    pub fn dirichlet_energy(&self, u: &[f64]) -> f64 {
        self.matrix.quadratic_form(u) * self.cell_measure
    }

    /// Discrete `H₀¹` norm.
    pub fn h1_norm(&self, u: &[f64]) -> f64 {
        crate::math::sqrt(self.dirichlet_energy(u).max(0.0))
    }

    /// `L_h = -Δ_h + diag(ψ)`.
    pub fn with_potential(&self, potential: &[f64]) -> Result<SchrodingerOperator> {
        if potential.len() != self.dim() {
            return Err(Error::GridMismatch { expected: self.dim(), found: potential.len() });
        }
        let mut matrix = self.matrix.clone();
        matrix.add_diagonal(potential);
        Ok(SchrodingerOperator { matrix })
    }
}

/// `-Δ_h + diag(ψ)` for a bounded potential `ψ`.
#[derive(Debug, Clone)]
pub struct SchrodingerOperator {
    matrix: BandMatrix,
}

impl SchrodingerOperator {
    pub fn matrix(&self) -> &BandMatrix {
        &self.matrix
    }
}

/// Symmetric operators the spectral routines accept.
pub trait SymmetricOperator {
    fn band(&self) -> &BandMatrix;
}

impl SymmetricOperator for DirichletOperator {
    fn band(&self) -> &BandMatrix {
        &self.matrix
    }
}

impl SymmetricOperator for SchrodingerOperator {
    fn band(&self) -> &BandMatrix {
        &self.matrix
    }
}

impl SymmetricOperator for BandMatrix {
    fn band(&self) -> &BandMatrix {
        self
    }
}
