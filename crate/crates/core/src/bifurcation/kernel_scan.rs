use alloc::vec::Vec;

use crate::discretization::DirichletOperator;
use crate::linalg::DenseMatrix;
use crate::math::{abs, dot, hypot, norm2};
use crate::spectral::{analyze_coupling, CouplingMatrix, DiscreteSpectrum, SpectrumKind};
use crate::{Error, Result};

/// Relative tolerance for matching an eigenvalue of `A` with one of `-Δ_h`.
const MATCH_TOL: f64 = 1e-8;

/// The projection `z_j = (⟨u, φ_j⟩, ⟨v, φ_j⟩)` of a kernel vector and its
/// eigenvector residual `‖Az_j − λ_j z_j‖ / (‖A‖_F + λ_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionCheck {
    pub index: usize,
    pub lambda: f64,
    pub projection: [f64; 2],
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelVectorReport {
    /// Stacked `(u, v)`, Euclidean unit length, component sum nonnegative.
    pub vector: Vec<f64>,
    pub singular_value: f64,
    pub projections: Vec<ProjectionCheck>,
    /// Index `j` carrying the largest projection.
    pub dominant: usize,
    /// `‖U − φ_j z_j‖` for the dominant `j`: the single-mode form `U = φ_j z`.
    pub single_mode_residual: f64,
    /// `‖U − Σ_j φ_j z_j‖` over the computed eigenpairs.
    pub expansion_residual: f64,
    pub nonnegative: bool,
    /// One component vanishes (to `1e-8`); kept apart from the positive-vector path.
    pub semitrivial: bool,
    /// Nonnegative, not semitrivial, dominant mode `λ₁`, projection positive.
    pub principal_positive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaEReport {
    pub coupling: CouplingMatrix,
    /// Pairs `(eigenvalue of A, index j)` with `λ_j` matching within `1e-8`.
    pub shared_eigenvalues: Vec<(f64, usize)>,
    pub predicted_dimension: usize,
    pub kernel_dimension: usize,
    /// Singular values, descending.
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    pub vectors: Vec<KernelVectorReport>,
}

impl LemmaEReport {
    pub fn max_projection_residual(&self) -> f64 {
        self.vectors.iter().flat_map(|v| v.projections.iter().map(|p| p.residual)).fold(0.0, f64::max)
    }

    pub fn dimension_matches(&self) -> bool {
        self.kernel_dimension == self.predicted_dimension
    }
}

/// Numerical kernel of `-Δ_h U = AU` by a singular-value scan of the block
/// matrix `[[L − aI, −bI], [−cI, L − dI]]`.
///
/// `relative_threshold` scales the largest singular value; `1e-8` by default.
pub fn linear_kernel_scan(
    coupling: &CouplingMatrix,
    laplacian: &DirichletOperator,
    ds: &DiscreteSpectrum,
    relative_threshold: f64,
) -> Result<LemmaEReport> {
    let n = laplacian.dim();
    if ds.len() < 3 {
        return Err(Error::InvalidArgument("the kernel scan needs at least 3 eigenpairs".into()));
    }
    if ds.vectors[0].len() != n {
        return Err(Error::GridMismatch { expected: n, found: ds.vectors[0].len() });
    }
    let l = laplacian.matrix().to_dense();
    let mut block = DenseMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            block[(i, j)] = l[(i, j)];
            block[(n + i, n + j)] = l[(i, j)];
        }
        block[(i, i)] -= coupling.a;
        block[(i, n + i)] = -coupling.b;
        block[(n + i, i)] = -coupling.c;
        block[(n + i, n + i)] -= coupling.d;
    }
    let (sigma, v) = block.svd_right();
    let threshold = relative_threshold * sigma[0];
    let kernel: Vec<usize> = (0..sigma.len()).filter(|&k| sigma[k] <= threshold).collect();

    let cs = analyze_coupling(coupling);
    let mut shared = Vec::new();
    let mut predicted = 0;
    if cs.kind != SpectrumKind::ComplexPair {
        let geometric_repeated = coupling.b == 0.0 && coupling.c == 0.0 && coupling.a == coupling.d;
        let thetas: Vec<(f64, usize)> = match cs.kind {
            SpectrumKind::RealRepeated => alloc::vec![(cs.lambda, if geometric_repeated { 2 } else { 1 })],
            _ => alloc::vec![(cs.lambda, 1), (cs.mu, 1)],
        };
        for (theta, geo) in thetas {
            for (j, lj) in ds.values.iter().enumerate() {
                if abs(theta - lj) <= MATCH_TOL * abs(*lj) {
                    shared.push((theta, j));
                    predicted += geo;
                }
            }
        }
    }

    let norm_a = coupling.frobenius_norm();
    let vectors = kernel
        .iter()
        .map(|&k| {
            let mut x: Vec<f64> = (0..2 * n).map(|i| v[(i, k)]).collect();
            if x.iter().sum::<f64>() < 0.0 {
                x.iter_mut().for_each(|e| *e = -*e);
            }
            describe(coupling, norm_a, ds, x, sigma[k])
        })
        .collect();

    Ok(LemmaEReport {
        coupling: *coupling,
        shared_eigenvalues: shared,
        predicted_dimension: predicted,
        kernel_dimension: kernel.len(),
        singular_values: sigma,
        threshold,
        vectors,
    })
}

fn describe(coupling: &CouplingMatrix, norm_a: f64, ds: &DiscreteSpectrum, x: Vec<f64>, sv: f64) -> KernelVectorReport {
    let n = x.len() / 2;
    let (u, w) = x.split_at(n);
    let projections: Vec<ProjectionCheck> = ds
        .values
        .iter()
        .zip(&ds.vectors)
        .enumerate()
        .map(|(j, (lj, phi))| {
            let z = [dot(u, phi), dot(w, phi)];
            let az = coupling.apply(z);
            let r = hypot(az[0] - lj * z[0], az[1] - lj * z[1]);
            ProjectionCheck { index: j, lambda: *lj, projection: z, residual: r / (norm_a + abs(*lj)) }
        })
        .collect();
    let size = |p: &ProjectionCheck| hypot(p.projection[0], p.projection[1]);
    let dominant = projections.iter().max_by(|a, b| size(a).total_cmp(&size(b))).map_or(0, |p| p.index);
    let remainder = |modes: &[usize]| {
        let mut r = x.clone();
        for &j in modes {
            let z = projections[j].projection;
            for (i, p) in ds.vectors[j].iter().enumerate() {
                r[i] -= z[0] * p;
                r[n + i] -= z[1] * p;
            }
        }
        norm2(&r)
    };
    let all: Vec<usize> = (0..projections.len()).collect();
    let peak = x.iter().fold(0.0f64, |m, e| m.max(abs(*e)));
    let nonnegative = x.iter().all(|e| *e >= -1e-8 * peak);
    let semitrivial = norm2(u) <= 1e-8 || norm2(w) <= 1e-8;
    let z1 = projections[0].projection;
    let principal_positive = nonnegative && !semitrivial && dominant == 0 && z1[0] > 0.0 && z1[1] > 0.0;
    KernelVectorReport {
        single_mode_residual: remainder(&[dominant]),
        expansion_residual: remainder(&all),
        vector: x,
        singular_value: sv,
        projections,
        dominant,
        nonnegative,
        semitrivial,
        principal_positive,
    }
}
