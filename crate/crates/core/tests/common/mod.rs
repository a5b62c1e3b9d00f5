#![allow(dead_code)]

use coopbif_core::bifurcation::{BifurcationProblem, Mode};
use coopbif_core::discretization::{assemble_laplacian, build_grid, quadrature_weights, DomainSpec, Grid};
use coopbif_core::nonlocal::{sample_kernel, CrowdingFunction, KernelSpec, NonlocalPair, NonlocalTerm};
use coopbif_core::operators::NonlocalSystem;
use coopbif_core::spectral::CouplingMatrix;

pub fn grid_1d(n: usize) -> Grid {
    build_grid(DomainSpec { dimension: 1, extents: &[1.0], n }).unwrap()
}

pub fn term(grid: &Grid, kernel: KernelSpec, f: CrowdingFunction) -> NonlocalTerm {
    NonlocalTerm::new(sample_kernel(&kernel, grid).unwrap(), quadrature_weights(grid), f).unwrap()
}

/// K = Γ ≡ 1, f = g = |t| + |s|.
pub fn system(grid: Grid, coupling: CouplingMatrix) -> NonlocalSystem {
    let f = CrowdingFunction::power_sum(1.0, 1.0, 1.0).unwrap();
    let t = term(&grid, KernelSpec::Constant(1.0), f);
    let lap = assemble_laplacian(&grid);
    NonlocalSystem::new(grid, lap, coupling, NonlocalPair::new(t.clone(), t).unwrap()).unwrap()
}

pub fn acceptance(n: usize) -> BifurcationProblem {
    BifurcationProblem::new(system(grid_1d(n), CouplingMatrix::new(2.0, 1.0, 1.0, 2.0).unwrap()), Mode::Tp1, 3).unwrap()
}

pub fn tp2(n: usize) -> BifurcationProblem {
    BifurcationProblem::new(system(grid_1d(n), CouplingMatrix::new(1.0, 2.0, 3.0, 2.0).unwrap()), Mode::Tp2, 3).unwrap()
}

/// Dense copy of a band matrix for the nalgebra oracles.
pub fn dense(m: &coopbif_core::linalg::BandMatrix) -> nalgebra::DMatrix<f64> {
    let d = m.to_dense();
    nalgebra::DMatrix::from_row_slice(d.rows(), d.cols(), d.as_slice())
}

pub fn sorted_eigenvalues(m: nalgebra::DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}
