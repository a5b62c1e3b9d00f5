//! Spectra of the 2×2 coupling matrix and of the discrete operators
//! `-Δ_h` and `-Δ_h + diag(ψ)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::discretization::SymmetricOperator;
use crate::linalg::BandMatrix;
use crate::math::{abs, dot, norm2, sqrt};
use crate::{Error, Hypothesis, Result};

/// `A = (a b; c d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl CouplingMatrix {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if [a, b, c, d].iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("coupling matrix entries must be finite".into()));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn identity() -> Self {
        Self { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    pub fn diagonal(a: f64, d: f64) -> Self {
        Self { a, b: 0.0, c: 0.0, d }
    }

    pub fn apply(&self, z: [f64; 2]) -> [f64; 2] {
        [self.a * z[0] + self.b * z[1], self.c * z[0] + self.d * z[1]]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { a: s * self.a, b: s * self.b, c: s * self.c, d: s * self.d }
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn frobenius_norm(&self) -> f64 {
        sqrt(self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d)
    }

    pub fn is_cooperative(&self) -> bool {
        self.a > 0.0 && self.b > 0.0 && self.c > 0.0 && self.d > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    RealDistinct,
    RealRepeated,
    ComplexPair,
}

/// Classified spectrum of a [`CouplingMatrix`].
///
/// For a complex pair `lambda` and `mu` both hold the real part, `imag` the
/// positive imaginary part, and the eigenvectors are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSpectrum {
    pub kind: SpectrumKind,
    pub lambda: f64,
    pub mu: f64,
    pub imag: f64,
    /// Unit eigenvector for `lambda`, sign chosen so the component sum is positive.
    pub z: [f64; 2],
    /// Unit eigenvector for `mu`.
    pub w: [f64; 2],
    pub lambda_positive: bool,
    pub z_strictly_positive: bool,
    pub lambda_simple: bool,
    pub unique_positive_eigenvalue: bool,
}

impl CouplingSpectrum {
    /// `z` scaled so its largest component is one.
    pub fn z_sup_normalized(&self) -> [f64; 2] {
        let m = abs(self.z[0]).max(abs(self.z[1]));
        [self.z[0] / m, self.z[1] / m]
    }
}

const REPEATED_TOL: f64 = 1e-12;

fn unit_eigenvector(m: &CouplingMatrix, theta: f64, fallback: [f64; 2]) -> [f64; 2] {
    let v1 = [m.b, theta - m.a];
    let v2 = [theta - m.d, m.c];
    let n1 = norm2(&v1);
    let n2 = norm2(&v2);
    let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
    if n <= 1e-300 {
        return fallback;
    }
    let mut e = [v[0] / n, v[1] / n];
    let s = e[0] + e[1];
    if s < 0.0 || (s == 0.0 && e[0] < 0.0) {
        e = [-e[0], -e[1]];
    }
    e
}

/// Closed-form eigen-analysis of the coupling matrix.
pub fn analyze_coupling(m: &CouplingMatrix) -> CouplingSpectrum {
    let tr = m.trace();
    let det = m.determinant();
    let disc = (m.a - m.d) * (m.a - m.d) + 4.0 * m.b * m.c;
    let scale = m.frobenius_norm();
    if abs(disc) < REPEATED_TOL * scale * scale {
        let theta = 0.5 * tr;
        let z = unit_eigenvector(m, theta, [1.0, 0.0]);
        let w = if m.b == 0.0 && m.c == 0.0 { [0.0, 1.0] } else { z };
        let positive = theta > 0.0;
        return CouplingSpectrum {
            kind: SpectrumKind::RealRepeated,
            lambda: theta,
            mu: theta,
            imag: 0.0,
            z,
            w,
            lambda_positive: positive,
            z_strictly_positive: z[0] > 0.0 && z[1] > 0.0,
            lambda_simple: false,
            unique_positive_eigenvalue: positive,
        };
    }
    if disc < 0.0 {
        return CouplingSpectrum {
            kind: SpectrumKind::ComplexPair,
            lambda: 0.5 * tr,
            mu: 0.5 * tr,
            imag: 0.5 * sqrt(-disc),
            z: [0.0; 2],
            w: [0.0; 2],
            lambda_positive: false,
            z_strictly_positive: false,
            lambda_simple: false,
            unique_positive_eigenvalue: false,
        };
    }
    let root = sqrt(disc);
    // avoid cancellation in the smaller-magnitude root
    let (lambda, mu) = if tr >= 0.0 {
        let l = 0.5 * (tr + root);
        (l, if l != 0.0 { det / l } else { 0.5 * (tr - root) })
    } else {
        let u = 0.5 * (tr - root);
        (if u != 0.0 { det / u } else { 0.5 * (tr + root) }, u)
    };
    let z = unit_eigenvector(m, lambda, [1.0, 0.0]);
    let w = unit_eigenvector(m, mu, [0.0, 1.0]);
    CouplingSpectrum {
        kind: SpectrumKind::RealDistinct,
        lambda,
        mu,
        imag: 0.0,
        z,
        w,
        lambda_positive: lambda > 0.0,
        z_strictly_positive: z[0] > 0.0 && z[1] > 0.0,
        lambda_simple: true,
        unique_positive_eigenvalue: lambda > 0.0 && mu <= 0.0,
    }
}

/// Leading eigenpairs of a discrete symmetric positive definite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpectrum {
    /// Ascending.
    pub values: Vec<f64>,
    /// Euclidean-orthonormal; `vectors[0]` is nonnegative.
    pub vectors: Vec<Vec<f64>>,
    /// `‖Aφ_j − λ_jφ_j‖₂` for each pair.
    pub residuals: Vec<f64>,
    pub iterations: Vec<usize>,
}

impl DiscreteSpectrum {
    pub fn lambda1(&self) -> f64 {
        self.values[0]
    }

    pub fn phi1(&self) -> &[f64] {
        &self.vectors[0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Residual target relative to `‖A‖_∞`.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tolerance: 1e-12, max_iterations: 10_000 }
    }
}

/// First `k` eigenpairs by inverse iteration with Gram–Schmidt deflation.
pub fn discrete_spectrum<O: SymmetricOperator + ?Sized>(op: &O, k: usize) -> Result<DiscreteSpectrum> {
    discrete_spectrum_with(op, k, EigenOptions::default())
}

pub fn discrete_spectrum_with<O: SymmetricOperator + ?Sized>(
    op: &O,
    k: usize,
    opts: EigenOptions,
) -> Result<DiscreteSpectrum> {
    let a: &BandMatrix = op.band();
    let n = a.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(alloc::format!("requested {k} eigenpairs of a {n}×{n} operator")));
    }
    let chol = a.cholesky()?;
    let target = opts.tolerance * a.norm_inf();
    let mut out = DiscreteSpectrum { values: vec![], vectors: vec![], residuals: vec![], iterations: vec![] };
    let mut ax = vec![0.0; n];
    for index in 0..k {
        let mut x = start_vector(n, index);
        orthogonalize(&mut x, &out.vectors);
        normalize(&mut x);
        let mut converged = None;
        let mut residual = f64::INFINITY;
        let step = |x: &mut Vec<f64>, ax: &mut Vec<f64>, basis: &[Vec<f64>]| {
            chol.solve_in_place(x);
            // two passes of modified Gram-Schmidt keep deflation clean
            orthogonalize(x, basis);
            orthogonalize(x, basis);
            normalize(x);
            a.matvec(x, ax);
            let rho = dot(ax, x);
            let r = sqrt(ax.iter().zip(x.iter()).map(|(p, q)| (p - rho * q) * (p - rho * q)).sum());
            (rho, r)
        };
        for it in 1..=opts.max_iterations {
            let (rho, r) = step(&mut x, &mut ax, &out.vectors);
            residual = r;
            if residual <= target {
                converged = Some((rho, it));
                break;
            }
        }
        // polish past the target while the residual still drops quickly
        if let Some((mut rho, mut it)) = converged {
            for _ in 0..8 {
                let mut y = x.clone();
                let (r2, res2) = step(&mut y, &mut ax, &out.vectors);
                if res2 > 0.5 * residual {
                    break;
                }
                x = y;
                rho = r2;
                residual = res2;
                it += 1;
            }
            converged = Some((rho, it));
        }
        let (rho, it) =
            converged.ok_or(Error::EigenNotConverged { index, iterations: opts.max_iterations, residual })?;
        sign_normalize(&mut x);
        out.values.push(rho);
        out.vectors.push(x);
        out.residuals.push(residual);
        out.iterations.push(it);
    }
    // inverse iteration can hand back near-degenerate pairs out of order
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| out.values[i].partial_cmp(&out.values[j]).unwrap_or(core::cmp::Ordering::Equal));
    let sorted = DiscreteSpectrum {
        values: order.iter().map(|&i| out.values[i]).collect(),
        vectors: order.iter().map(|&i| out.vectors[i].clone()).collect(),
        residuals: order.iter().map(|&i| out.residuals[i]).collect(),
        iterations: order.iter().map(|&i| out.iterations[i]).collect(),
    };
    Ok(sorted)
}

fn start_vector(n: usize, index: usize) -> Vec<f64> {
    // deterministic, not orthogonal to any smooth mode in practice
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    (0..n)
        .map(|i| {
            let r = ((i * (index + 3) + 7 * index) as f64 * GOLDEN) % 1.0;
            if index == 0 {
                1.0 + 0.1 * r
            } else {
                r - 0.5
            }
        })
        .collect()
}

fn orthogonalize(x: &mut [f64], basis: &[Vec<f64>]) {
    for q in basis {
        let p = dot(x, q);
        x.iter_mut().zip(q).for_each(|(a, b)| *a -= p * b);
    }
}

fn normalize(x: &mut [f64]) {
    let n = norm2(x);
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

fn sign_normalize(x: &mut [f64]) {
    let s: f64 = x.iter().sum();
    let peak = crate::math::sup_norm(x);
    let flip = if abs(s) > 1e-8 * peak * x.len() as f64 {
        s < 0.0
    } else {
        x.iter().find(|v| abs(**v) > 1e-8 * peak).is_some_and(|v| *v < 0.0)
    };
    if flip {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    if x.iter().all(|v| *v >= -1e-14 * peak) {
        // principal vector: clean rounding-level negatives
        x.iter_mut().for_each(|v| *v = v.max(0.0));
    }
}

/// `⟨Av, v⟩ / ⟨v, v⟩`: discrete `∫|∇v|² + ψv²` over `∫v²` (the uniform cell
/// measure cancels).
pub fn rayleigh_quotient<O: SymmetricOperator + ?Sized>(op: &O, field: &[f64]) -> Result<f64> {
    let a = op.band();
    if field.len() != a.dim() {
        return Err(Error::GridMismatch { expected: a.dim(), found: field.len() });
    }
    let mass = dot(field, field);
    if mass == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(a.quadratic_form(field) / mass)
}

/// `t₁ = λ₁/λ` together with its simplicity verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BifurcationParameter {
    pub t1: f64,
    pub simple: bool,
    /// `λ₁/μ` when `μ > 0` carries a positive eigenvector: a second
    /// candidate bifurcation point, exposed for diagnostics only.
    pub s1: Option<f64>,
}

const RESONANCE_TOL: f64 = 1e-9;

pub fn bifurcation_parameter(cs: &CouplingSpectrum, ds: &DiscreteSpectrum) -> Result<BifurcationParameter> {
    if !cs.lambda_positive {
        return Err(Error::Hypothesis(Hypothesis::LambdaPositive));
    }
    if !cs.z_strictly_positive {
        return Err(Error::Hypothesis(Hypothesis::ZStrictlyPositive));
    }
    let lambda1 = ds.lambda1();
    let t1 = lambda1 / cs.lambda;
    let resonant = ds.values[1..].iter().any(|lj| abs(t1 * cs.mu - lj) <= RESONANCE_TOL * abs(*lj));
    let simple = cs.lambda_simple && !resonant;
    let s1 = (cs.kind == SpectrumKind::RealDistinct && cs.mu > 0.0 && cs.w[0] * cs.w[1] > 0.0).then(|| lambda1 / cs.mu);
    Ok(BifurcationParameter { t1, simple, s1 })
}
