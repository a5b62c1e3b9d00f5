use super::BranchPoint;
use crate::math::{abs, sqrt};
use crate::operators::NonlocalSystem;
use crate::spectral::{analyze_coupling, CouplingMatrix};
use crate::{Error, Hypothesis, Result};

/// Relative slack allowed on the links that are equalities for `U ∥ φ₁z`.
const LINK_TOL: f64 = 1e-9;

/// The symmetrization chain evaluated on one positive solution.
///
/// With `w = σv`, `σ = √(b/c)` and `A₀ = (a b̂; b̂ d)`, `b̂ = b/σ`, testing
/// the equations against `(u, σ²v)` gives `D + N = t·Q`, where
/// `Q = ∫⟨A₀(u,w), (u,w)⟩ ≤ λ·m`, `N > 0` is the nonlocal energy and
/// `λ₁·m ≤ D`. Hence `t > D/(λm) ≥ λ₁/λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditReport {
    pub t: f64,
    pub sigma: f64,
    pub b_hat: f64,
    pub symmetrized: CouplingMatrix,
    /// Extreme eigenvalues `μ ≤ λ` of `A₀`.
    pub mu: f64,
    pub lambda: f64,
    pub lambda1: f64,
    /// Discrete `∫|∇u|² + |∇w|²`.
    pub dirichlet: f64,
    /// Discrete `∫|u|² + |w|²`.
    pub mass: f64,
    /// Discrete `∫φu² + ψw²`.
    pub nonlocal: f64,
    /// Discrete `∫⟨A₀(u,w), (u,w)⟩`.
    pub quadratic: f64,
    /// `|D + N − tQ| / (D + N)`.
    pub identity_residual: f64,
    /// `λm − Q`.
    pub form_slack: f64,
    /// `D − λ₁m`.
    pub poincare_slack: f64,
    /// `D / (λm)`.
    pub lower_bound: f64,
    /// `t − λ₁/λ`.
    pub certificate_margin: f64,
}

impl AuditReport {
    /// Every link holds: identity within `1e-9`, the two inequalities up to
    /// `1e-9` relative slack, `N > 0`, and `t > D/(λm) ≥ λ₁/λ`.
    pub fn certified(&self) -> bool {
        let scale = self.dirichlet + self.nonlocal;
        self.identity_residual <= LINK_TOL
            && self.form_slack >= -LINK_TOL * self.lambda * self.mass
            && self.poincare_slack >= -LINK_TOL * self.dirichlet
            && self.nonlocal > 0.0
            && self.t > self.lower_bound
            && self.lower_bound >= self.lambda1 / self.lambda * (1.0 - LINK_TOL)
            && self.certificate_margin > 0.0
            && scale.is_finite()
    }
}

pub fn nonexistence_audit(point: &BranchPoint, system: &NonlocalSystem, lambda1: f64) -> Result<AuditReport> {
    let m = system.coupling();
    if !(m.b * m.c > 0.0) {
        return Err(Error::Hypothesis(Hypothesis::SymmetrizableCoupling));
    }
    let s = &point.state;
    s.check_nodes(system.nodes())?;
    if !s.is_positive() {
        return Err(Error::InvalidArgument("the audit takes a positive solution".into()));
    }
    let sigma = sqrt(m.b / m.c);
    let b_hat = m.b / sigma;
    let a0 = CouplingMatrix::new(m.a, b_hat, b_hat, m.d)?;
    let cs = analyze_coupling(&a0);
    let w: alloc::vec::Vec<f64> = s.v.iter().map(|v| sigma * v).collect();

    let lap = system.laplacian();
    let h = lap.cell_measure();
    let dirichlet = lap.dirichlet_energy(&s.u) + lap.dirichlet_energy(&w);
    let phi = system.terms().f.eval_phi(s)?;
    let psi = system.terms().g.eval_phi(s)?;
    let mut mass = 0.0;
    let mut nonlocal = 0.0;
    let mut quadratic = 0.0;
    for i in 0..s.u.len() {
        let (u, wi) = (s.u[i], w[i]);
        mass += u * u + wi * wi;
        nonlocal += phi[i] * u * u + psi[i] * wi * wi;
        quadratic += m.a * u * u + 2.0 * b_hat * u * wi + m.d * wi * wi;
    }
    mass *= h;
    nonlocal *= h;
    quadratic *= h;
    let t = point.t;
    let lhs = dirichlet + nonlocal;
    Ok(AuditReport {
        t,
        sigma,
        b_hat,
        symmetrized: a0,
        mu: cs.mu,
        lambda: cs.lambda,
        lambda1,
        dirichlet,
        mass,
        nonlocal,
        quadratic,
        identity_residual: abs(lhs - t * quadratic) / lhs,
        form_slack: cs.lambda * mass - quadratic,
        poincare_slack: dirichlet - lambda1 * mass,
        lower_bound: dirichlet / (cs.lambda * mass),
        certificate_margin: t - lambda1 / cs.lambda,
    })
}
