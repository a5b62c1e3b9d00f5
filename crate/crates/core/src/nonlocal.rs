//! Kernels, crowding functions, and the nonlocal coefficients
//! `φ_(u,v)(x) = ∫ K(x,y) f(|u(y)|, |v(y)|) dy` sampled by Nyström quadrature.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::discretization::Grid;
use crate::linalg::DenseMatrix;
use crate::math::{abs, atan2, cos, hypot, powf, sin, sqrt};
use crate::state::StateField;
use crate::{Error, Result};

/// Which argument a crowding function is bounded below by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// `f(t,s) ≥ ε tᵞ`, the `u`-equation.
    First,
    /// `g(t,s) ≥ ε sᵞ`, the `v`-equation.
    Second,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CrowdingKind {
    /// `c₁ tᵞ + c₂ sᵞ`.
    PowerSum { c1: f64, c2: f64 },
    /// `tᵞ + s^(γ−m) tᵐ` with `0 < m < γ`.
    MixedPower { m: f64 },
    /// `rᵞ h(θ)` in polar form, `h` tabulated on a uniform grid over `[0, π/2]`
    /// and interpolated linearly.
    Tabulated { angular: Vec<f64> },
}

/// A nonnegative, `γ`-homogeneous crowding function.
#[derive(Debug, Clone, PartialEq)]
pub struct CrowdingFunction {
    kind: CrowdingKind,
    gamma: f64,
}

impl CrowdingFunction {
    pub fn power_sum(gamma: f64, c1: f64, c2: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if !(c1 >= 0.0 && c2 >= 0.0) || !(c1 + c2 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "power-sum coefficients ({c1}, {c2}) must be nonnegative and not both zero"
            )));
        }
        Ok(Self { kind: CrowdingKind::PowerSum { c1, c2 }, gamma })
    }

    pub fn mixed_power(gamma: f64, m: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if !(m > 0.0 && m < gamma) {
            return Err(Error::InvalidArgument(format!(
                "mixed-power exponent m = {m} must satisfy 0 < m < γ = {gamma}"
            )));
        }
        Ok(Self { kind: CrowdingKind::MixedPower { m }, gamma })
    }

    pub fn tabulated(gamma: f64, angular: Vec<f64>) -> Result<Self> {
        check_gamma(gamma)?;
        if angular.len() < 2 || angular.iter().any(|h| !(*h >= 0.0) || !h.is_finite()) {
            return Err(Error::InvalidArgument(
                "tabulated crowding needs at least two finite nonnegative angular samples".into(),
            ));
        }
        Ok(Self { kind: CrowdingKind::Tabulated { angular }, gamma })
    }

    pub fn kind(&self) -> &CrowdingKind {
        &self.kind
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `f(|t|, |s|)`.
    pub fn eval(&self, t: f64, s: f64) -> f64 {
        let (t, s) = (abs(t), abs(s));
        let g = self.gamma;
        match &self.kind {
            CrowdingKind::PowerSum { c1, c2 } => c1 * powf(t, g) + c2 * powf(s, g),
            CrowdingKind::MixedPower { m } => powf(t, g) + powf(s, g - m) * powf(t, *m),
            CrowdingKind::Tabulated { angular } => {
                let r = hypot(t, s);
                if r == 0.0 {
                    return 0.0;
                }
                let theta = atan2(s, t);
                let cells = (angular.len() - 1) as f64;
                let x = (theta / core::f64::consts::FRAC_PI_2 * cells).clamp(0.0, cells);
                let k = (x as usize).min(angular.len() - 2);
                let frac = x - k as f64;
                powf(r, g) * ((1.0 - frac) * angular[k] + frac * angular[k + 1])
            }
        }
    }

    /// Largest `ε` with `f(t,s) ≥ ε·(argument)ᵞ` for the given role, or `None`
    /// when no positive bound exists.
    pub fn lower_bound(&self, role: Role) -> Option<f64> {
        let eps = match (&self.kind, role) {
            (CrowdingKind::PowerSum { c1, .. }, Role::First) => *c1,
            (CrowdingKind::PowerSum { c2, .. }, Role::Second) => *c2,
            (CrowdingKind::MixedPower { .. }, Role::First) => 1.0,
            (CrowdingKind::MixedPower { .. }, Role::Second) => 0.0,
            (CrowdingKind::Tabulated { angular }, role) => {
                // on each cell h ≥ min of its endpoints while cosᵞ (sinᵞ) is
                // largest at the left (right) endpoint
                let cells = angular.len() - 1;
                let dtheta = core::f64::consts::FRAC_PI_2 / cells as f64;
                (0..cells)
                    .map(|k| {
                        let hmin = angular[k].min(angular[k + 1]);
                        let trig = match role {
                            Role::First => powf(cos(k as f64 * dtheta), self.gamma),
                            Role::Second => powf(sin((k + 1) as f64 * dtheta), self.gamma),
                        };
                        hmin / trig
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        };
        (eps > 0.0).then_some(eps)
    }

    /// `min` of both role bounds, as a single `ε`.
    pub fn epsilon(&self) -> Option<f64> {
        match (self.lower_bound(Role::First), self.lower_bound(Role::Second)) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// A constant `c` with `f(t,s) ≤ c` whenever `√(t² + s²) ≤ 1`.
    pub fn origin_bound(&self) -> f64 {
        match &self.kind {
            CrowdingKind::PowerSum { c1, c2 } => c1 + c2,
            CrowdingKind::MixedPower { .. } => 2.0,
            CrowdingKind::Tabulated { angular } => angular.iter().copied().fold(0.0, f64::max),
        }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("homogeneity degree γ = {gamma} must be positive")));
    }
    Ok(())
}

/// Kernel families that can be sampled on a grid.
#[derive(Debug, Clone)]
pub enum KernelSpec {
    Constant(f64),
    /// `ρ(x)ρ(y)` with `ρ(x) = Πₖ p(xₖ)` for the polynomial with the given
    /// coefficients (lowest degree first).
    Separable {
        profile: Vec<f64>,
    },
    /// `1{|x − y| ≤ r}`.
    Indicator {
        radius: f64,
    },
    /// Row-major node-pair samples.
    Tabulated {
        rows: Vec<Vec<f64>>,
    },
    /// Arbitrary function of `(x, y)`.
    Function(fn(&[f64], &[f64]) -> f64),
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Dense samples `M[i][j] = K(x_i, y_j)`.
pub fn sample_kernel(spec: &KernelSpec, grid: &Grid) -> Result<DenseMatrix> {
    let n = grid.len();
    let mut m = DenseMatrix::zeros(n, n);
    match spec {
        KernelSpec::Tabulated { rows } => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::GridMismatch { expected: n, found: rows.len() });
            }
            for (i, r) in rows.iter().enumerate() {
                for (j, v) in r.iter().enumerate() {
                    m[(i, j)] = *v;
                }
            }
        }
        KernelSpec::Separable { profile } => {
            let rho: Vec<f64> = grid.nodes().map(|p| p.iter().map(|x| poly(profile, *x)).product()).collect();
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = rho[i] * rho[j];
                }
            }
        }
        _ => {
            for i in 0..n {
                let x = grid.node(i);
                for j in 0..n {
                    let y = grid.node(j);
                    m[(i, j)] = match spec {
                        KernelSpec::Constant(k) => *k,
                        KernelSpec::Indicator { radius } => {
                            let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                            if sqrt(d2) <= *radius {
                                1.0
                            } else {
                                0.0
                            }
                        }
                        KernelSpec::Function(k) => k(x, y),
                        _ => unreachable!(),
                    };
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let v = m[(i, j)];
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::NegativeKernel { row: i, col: j, value: v });
            }
        }
    }
    Ok(m)
}

/// A sampled kernel paired with its crowding function.
#[derive(Debug, Clone)]
pub struct NonlocalTerm {
    kernel: DenseMatrix,
    weights: Vec<f64>,
    crowding: CrowdingFunction,
    kernel_sup: f64,
}

impl NonlocalTerm {
    pub fn new(kernel: DenseMatrix, weights: Vec<f64>, crowding: CrowdingFunction) -> Result<Self> {
        let n = weights.len();
        if kernel.rows() != n || kernel.cols() != n {
            return Err(Error::GridMismatch { expected: n, found: kernel.rows() });
        }
        if let Some((idx, v)) = kernel.as_slice().iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::NegativeKernel { row: idx / n, col: idx % n, value: *v });
        }
        let kernel_sup = kernel.max_abs();
        Ok(Self { kernel, weights, crowding, kernel_sup })
    }

    pub fn kernel(&self) -> &DenseMatrix {
        &self.kernel
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn crowding(&self) -> &CrowdingFunction {
        &self.crowding
    }

    pub fn gamma(&self) -> f64 {
        self.crowding.gamma()
    }

    /// Max sampled kernel entry.
    pub fn kernel_sup(&self) -> f64 {
        self.kernel_sup
    }

    pub fn nodes(&self) -> usize {
        self.weights.len()
    }

    /// Quadrature-weighted crowding values `f(|u_j|, |v_j|)·w_j`.
    pub(crate) fn weighted_crowding(&self, state: &StateField) -> Vec<f64> {
        state.u.iter().zip(&state.v).zip(&self.weights).map(|((u, v), w)| self.crowding.eval(*u, *v) * w).collect()
    }

    pub fn eval_phi(&self, state: &StateField) -> Result<Vec<f64>> {
        state.check_nodes(self.nodes())?;
        Ok(self.kernel.mul_vec(&self.weighted_crowding(state)))
    }

    /// Desk-scale check of the definiteness condition of the kernel class:
    /// `Σᵢⱼ M[i][j] |w_j|ᵞ w_i² ω_i ω_j > 0` for random and structured `w`.
    pub fn check_kernel_class<R: RngCore + ?Sized>(
        &self,
        trials: usize,
        grid: &Grid,
        rng: &mut R,
    ) -> KernelClassReport {
        let n = self.nodes();
        let gamma = self.gamma();
        let form = |w: &[f64]| -> f64 {
            let q: Vec<f64> = w.iter().zip(&self.weights).map(|(x, om)| powf(abs(*x), gamma) * om).collect();
            let mq = self.kernel.mul_vec(&q);
            mq.iter().zip(w).zip(&self.weights).map(|((a, x), om)| a * x * x * om).sum()
        };
        let mut report = KernelClassReport { evaluated: 0, min_value: f64::INFINITY, zero_witness: None };
        let record = |w: Vec<f64>, value: f64, report: &mut KernelClassReport| {
            report.evaluated += 1;
            report.min_value = report.min_value.min(value);
            if !(value > 0.0) && report.zero_witness.is_none() {
                report.zero_witness = Some(w);
            }
        };
        for _ in 0..trials {
            let w: Vec<f64> = (0..n).map(|_| 2.0 * unit_f64(rng) - 1.0).collect();
            if w.iter().all(|x| *x == 0.0) {
                continue;
            }
            let v = form(&w);
            record(w, v, &mut report);
        }
        // structured witnesses: constant, half-support indicators along the
        // first axis, single-node indicators
        let mid = grid.extents()[0] * 0.5;
        let ones = vec![1.0; n];
        let v = form(&ones);
        record(ones, v, &mut report);
        for left in [true, false] {
            let w: Vec<f64> = grid.nodes().map(|p| if (p[0] < mid) == left { 1.0 } else { 0.0 }).collect();
            if w.iter().any(|x| *x != 0.0) {
                let v = form(&w);
                record(w, v, &mut report);
            }
        }
        for i in 0..n {
            let om = self.weights[i];
            let mut w = vec![0.0; n];
            w[i] = 1.0;
            record(w, self.kernel[(i, i)] * om * om, &mut report);
        }
        report
    }
}

pub(crate) fn unit_f64<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelClassReport {
    pub evaluated: usize,
    pub min_value: f64,
    /// First nonzero field on which the double sum vanished.
    pub zero_witness: Option<Vec<f64>>,
}

impl KernelClassReport {
    pub fn passes(&self) -> bool {
        self.zero_witness.is_none()
    }
}

/// `φ` for `u` and `ψ` for `v`.
#[derive(Debug, Clone)]
pub struct NonlocalPair {
    pub f: NonlocalTerm,
    pub g: NonlocalTerm,
}

impl NonlocalPair {
    pub fn new(f: NonlocalTerm, g: NonlocalTerm) -> Result<Self> {
        if f.nodes() != g.nodes() {
            return Err(Error::GridMismatch { expected: f.nodes(), found: g.nodes() });
        }
        Ok(Self { f, g })
    }

    pub fn nodes(&self) -> usize {
        self.f.nodes()
    }

    /// Smallest of the two homogeneity degrees.
    pub fn gamma(&self) -> f64 {
        self.f.gamma().min(self.g.gamma())
    }

    /// `Φ_U = (u φ_(u,v), v ψ_(u,v))`.
    pub fn eval_big_phi(&self, state: &StateField) -> Result<StateField> {
        let phi = self.f.eval_phi(state)?;
        let psi = self.g.eval_phi(state)?;
        Ok(StateField {
            u: state.u.iter().zip(&phi).map(|(a, b)| a * b).collect(),
            v: state.v.iter().zip(&psi).map(|(a, b)| a * b).collect(),
        })
    }
}
