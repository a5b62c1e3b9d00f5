//! Solution operators `S` and `G`, the fixed-point residual
//! `F(t, U) = U − tS(U) − G(U)`, and a damped Newton solver for its roots.
//!
//! `S(U) = U₁` solves `-Δ_h U₁ = AU` and `G(U) = U₁` solves
//! `-Δ_h U₁ + Φ_U = 0`, both componentwise with the shared Laplacian
//! factorization. A root of the residual is a discrete weak solution of
//! `-ΔU + Φ_U = tAU`.

use alloc::vec;
use alloc::vec::Vec;

use crate::discretization::{DirichletOperator, Grid};
use crate::linalg::{BandCholesky, DenseMatrix};
use crate::math::{sqrt, sup_norm};
use crate::nonlocal::NonlocalPair;
use crate::spectral::CouplingMatrix;
pub use crate::state::StateField;
use crate::{Error, Result};

/// `-Δ_h` with its Cholesky factor, computed once per grid.
#[derive(Debug, Clone)]
pub struct PoissonSolver {
    laplacian: DirichletOperator,
    factor: BandCholesky,
}

impl PoissonSolver {
    pub fn new(laplacian: DirichletOperator) -> Self {
        let factor = laplacian.factor();
        Self { laplacian, factor }
    }

    pub fn laplacian(&self) -> &DirichletOperator {
        &self.laplacian
    }

    pub fn nodes(&self) -> usize {
        self.laplacian.dim()
    }

    /// Solves `-Δ_h x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.factor.solve(rhs)
    }

    /// Like [`PoissonSolver::solve`], rejecting solves whose residual exceeds
    /// `1e-12` relative to `‖A‖‖x‖ + ‖b‖`.
    pub fn solve_checked(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let x = self.solve(rhs);
        let ax = self.laplacian.apply(&x);
        let r = sup_norm(&ax.iter().zip(rhs).map(|(p, q)| p - q).collect::<Vec<_>>());
        let scale = self.laplacian.matrix().norm_inf() * sup_norm(&x) + sup_norm(rhs);
        if r > 1e-12 * scale {
            return Err(Error::InvalidArgument(alloc::format!("Poisson solve residual {r:e} too large")));
        }
        Ok(x)
    }

    fn solve_pair(&self, u: &[f64], v: &[f64]) -> Result<StateField> {
        Ok(StateField { u: self.solve_checked(u)?, v: self.solve_checked(v)? })
    }

    /// `S(U)`: `-Δ_h u₁ = a·u + b·v`, `-Δ_h v₁ = c·u + d·v`.
    pub fn apply_s(&self, coupling: &CouplingMatrix, state: &StateField) -> Result<StateField> {
        state.check_nodes(self.nodes())?;
        let (ru, rv) = coupled(coupling, state, 1.0);
        self.solve_pair(&ru, &rv)
    }

    /// `G(U)`: `-Δ_h U₁ = −Φ_U`.
    pub fn apply_g(&self, terms: &NonlocalPair, state: &StateField) -> Result<StateField> {
        state.check_nodes(self.nodes())?;
        let big_phi = terms.eval_big_phi(state)?;
        let nu: Vec<f64> = big_phi.u.iter().map(|x| -x).collect();
        let nv: Vec<f64> = big_phi.v.iter().map(|x| -x).collect();
        self.solve_pair(&nu, &nv)
    }
}

fn coupled(m: &CouplingMatrix, s: &StateField, t: f64) -> (Vec<f64>, Vec<f64>) {
    let ru = s.u.iter().zip(&s.v).map(|(u, v)| t * (m.a * u + m.b * v)).collect();
    let rv = s.u.iter().zip(&s.v).map(|(u, v)| t * (m.c * u + m.d * v)).collect();
    (ru, rv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Zero,
    PositiveSolution,
    SignChanging,
    NegativeSolution,
    Diverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub converged: bool,
    pub state: StateField,
    /// `‖F(t, U)‖_∞` at the returned state.
    pub residual: f64,
    pub iterations: usize,
    pub classification: Classification,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Classified `Zero` when `‖U‖ ≤ zero_threshold·(1 + ‖U₀‖)`.
    pub zero_threshold: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 50, max_halvings: 20, zero_threshold: 1e-8 }
    }
}

/// The discrete problem `-Δ_h U + Φ_U = tAU` on one grid.
#[derive(Debug, Clone)]
pub struct NonlocalSystem {
    grid: Grid,
    poisson: PoissonSolver,
    coupling: CouplingMatrix,
    terms: NonlocalPair,
}

impl NonlocalSystem {
    pub fn new(
        grid: Grid,
        laplacian: DirichletOperator,
        coupling: CouplingMatrix,
        terms: NonlocalPair,
    ) -> Result<Self> {
        if laplacian.dim() != grid.len() || terms.nodes() != grid.len() {
            return Err(Error::GridMismatch { expected: grid.len(), found: laplacian.dim().max(terms.nodes()) });
        }
        Ok(Self { grid, poisson: PoissonSolver::new(laplacian), coupling, terms })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn poisson(&self) -> &PoissonSolver {
        &self.poisson
    }

    pub fn laplacian(&self) -> &DirichletOperator {
        self.poisson.laplacian()
    }

    pub fn coupling(&self) -> &CouplingMatrix {
        &self.coupling
    }

    pub fn terms(&self) -> &NonlocalPair {
        &self.terms
    }

    pub fn nodes(&self) -> usize {
        self.grid.len()
    }

    /// Same problem with `A` replaced.
    pub fn with_coupling(&self, coupling: CouplingMatrix) -> Self {
        Self { coupling, ..self.clone() }
    }

    pub fn apply_s(&self, state: &StateField) -> Result<StateField> {
        self.poisson.apply_s(&self.coupling, state)
    }

    pub fn apply_g(&self, state: &StateField) -> Result<StateField> {
        self.poisson.apply_g(&self.terms, state)
    }

    /// `U − tS(U) − G(U)`, assembled as `U − (-Δ_h)⁻¹(tAU − Φ_U)`.
    pub fn residual(&self, t: f64, state: &StateField) -> Result<StateField> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(alloc::format!("t = {t} must be nonnegative")));
        }
        state.check_nodes(self.nodes())?;
        Ok(self.residual_unchecked(t, state))
    }

    fn residual_unchecked(&self, t: f64, state: &StateField) -> StateField {
        let phi = self.terms.f.kernel().mul_vec(&self.terms.f.weighted_crowding(state));
        let psi = self.terms.g.kernel().mul_vec(&self.terms.g.weighted_crowding(state));
        let (mut ru, mut rv) = coupled(&self.coupling, state, t);
        for i in 0..ru.len() {
            ru[i] -= state.u[i] * phi[i];
            rv[i] -= state.v[i] * psi[i];
        }
        self.poisson.factor.solve_in_place(&mut ru);
        self.poisson.factor.solve_in_place(&mut rv);
        StateField {
            u: state.u.iter().zip(&ru).map(|(x, y)| x - y).collect(),
            v: state.v.iter().zip(&rv).map(|(x, y)| x - y).collect(),
        }
    }

    /// Forward-difference Jacobian of the residual with respect to `U`
    /// (stacked `(u, v)`), step `√ε_mach·(1 + ‖U‖)`.
    ///
    /// Only the crowding functions are differenced; the nonlocal coefficient
    /// of a perturbed node is updated by one kernel column.
    pub fn jacobian(&self, t: f64, state: &StateField) -> DenseMatrix {
        let n = self.nodes();
        let h = sqrt(f64::EPSILON) * (1.0 + state.sup_norm());
        let (tf, tg) = (&self.terms.f, &self.terms.g);
        let phi = tf.kernel().mul_vec(&tf.weighted_crowding(state));
        let psi = tg.kernel().mul_vec(&tg.weighted_crowding(state));
        let m = &self.coupling;
        let mut jac = DenseMatrix::zeros(2 * n, 2 * n);
        let mut du = vec![0.0; n];
        let mut dv = vec![0.0; n];
        for col in 0..2 * n {
            let j = col % n;
            let on_u = col < n;
            let (uj, vj) = (state.u[j], state.v[j]);
            let (pu, pv) = if on_u { (uj + h, vj) } else { (uj, vj + h) };
            let dqf = (tf.crowding().eval(pu, pv) - tf.crowding().eval(uj, vj)) * tf.weights()[j];
            let dqg = (tg.crowding().eval(pu, pv) - tg.crowding().eval(uj, vj)) * tg.weights()[j];
            // change of the right-hand side tAU − Φ_U, divided by h
            for i in 0..n {
                let dphi = tf.kernel()[(i, j)] * dqf / h;
                let dpsi = tg.kernel()[(i, j)] * dqg / h;
                du[i] = -state.u[i] * dphi;
                dv[i] = -state.v[i] * dpsi;
            }
            if on_u {
                du[j] += t * m.a - phi[j] - tf.kernel()[(j, j)] * dqf;
                dv[j] += t * m.c;
            } else {
                du[j] += t * m.b;
                dv[j] += t * m.d - psi[j] - tg.kernel()[(j, j)] * dqg;
            }
            self.poisson.factor.solve_in_place(&mut du);
            self.poisson.factor.solve_in_place(&mut dv);
            for i in 0..n {
                jac[(i, col)] = -du[i];
                jac[(n + i, col)] = -dv[i];
            }
            jac[(col, col)] += 1.0;
        }
        jac
    }

    /// `∂F/∂t = −S(U)`.
    pub fn residual_t_derivative(&self, state: &StateField) -> Vec<f64> {
        let (mut ru, mut rv) = coupled(&self.coupling, state, 1.0);
        self.poisson.factor.solve_in_place(&mut ru);
        self.poisson.factor.solve_in_place(&mut rv);
        ru.iter().chain(&rv).map(|x| -x).collect()
    }

    pub fn classify(&self, state: &StateField, start_norm: f64, opts: &NewtonOptions) -> Classification {
        if state.sup_norm() <= opts.zero_threshold * (1.0 + start_norm) {
            Classification::Zero
        } else if state.is_positive() {
            Classification::PositiveSolution
        } else if state.is_negative() {
            Classification::NegativeSolution
        } else {
            Classification::SignChanging
        }
    }

    pub fn newton_solve(&self, t: f64, start: &StateField, opts: &NewtonOptions) -> Result<SolveOutcome> {
        self.newton_solve_observed(t, start, opts, |_, _| {})
    }

    /// Damped Newton on `F(t, ·)`; `observe` sees every accepted iterate.
    pub fn newton_solve_observed(
        &self,
        t: f64,
        start: &StateField,
        opts: &NewtonOptions,
        mut observe: impl FnMut(usize, &StateField),
    ) -> Result<SolveOutcome> {
        let mut state = start.clone();
        let mut r = self.residual(t, &state)?;
        if start.u.iter().chain(&start.v).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite initial state".into()));
        }
        let start_norm = start.sup_norm();
        let mut rn = r.sup_norm_max();
        let mut iterations = 0;
        let diverged = |state: StateField, rn: f64, iterations: usize| SolveOutcome {
            converged: false,
            state,
            residual: rn,
            iterations,
            classification: Classification::Diverged,
        };
        while rn > opts.tolerance {
            if iterations == opts.max_iterations {
                return Ok(diverged(state, rn, iterations));
            }
            let jac = self.jacobian(t, &state);
            let Ok(lu) = jac.lu() else {
                return Ok(diverged(state, rn, iterations));
            };
            let step = lu.solve(&r.to_flat());
            let x = state.to_flat();
            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..=opts.max_halvings {
                let trial =
                    StateField::from_flat(&x.iter().zip(&step).map(|(xi, si)| xi - alpha * si).collect::<Vec<_>>());
                if trial.u.iter().chain(&trial.v).all(|v| v.is_finite()) {
                    let tr = self.residual_unchecked(t, &trial);
                    let trn = tr.sup_norm_max();
                    if trn < (1.0 - 1e-4 * alpha) * rn {
                        accepted = Some((trial, tr, trn));
                        break;
                    }
                }
                alpha *= 0.5;
            }
            let Some((trial, tr, trn)) = accepted else {
                return Ok(diverged(state, rn, iterations));
            };
            iterations += 1;
            state = trial;
            r = tr;
            rn = trn;
            observe(iterations, &state);
        }
        // One finishing step: near a weakly singular root the tolerance alone
        // leaves iterates far enough from it to be misclassified.
        if rn > 0.0 {
            if let Ok(lu) = self.jacobian(t, &state).lu() {
                let step = lu.solve(&r.to_flat());
                let x = state.to_flat();
                let trial = StateField::from_flat(&x.iter().zip(&step).map(|(xi, si)| xi - si).collect::<Vec<_>>());
                if trial.u.iter().chain(&trial.v).all(|v| v.is_finite()) {
                    let trn = self.residual_unchecked(t, &trial).sup_norm_max();
                    if trn <= rn {
                        state = trial;
                        rn = trn;
                    }
                }
            }
        }
        let classification = self.classify(&state, start_norm, opts);
        Ok(SolveOutcome { converged: true, state, residual: rn, iterations, classification })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{assemble_laplacian, build_grid, quadrature_weights, DomainSpec};
    use crate::nonlocal::{sample_kernel, CrowdingFunction, KernelSpec, NonlocalTerm};
    use crate::spectral::discrete_spectrum;

    fn system(n: usize, coupling: CouplingMatrix) -> NonlocalSystem {
        let grid = build_grid(DomainSpec { dimension: 1, extents: &[1.0], n }).unwrap();
        let lap = assemble_laplacian(&grid);
        let f = CrowdingFunction::power_sum(1.0, 1.0, 1.0).unwrap();
        let k = sample_kernel(&KernelSpec::Constant(1.0), &grid).unwrap();
        let term = NonlocalTerm::new(k, quadrature_weights(&grid), f).unwrap();
        let pair = NonlocalPair::new(term.clone(), term).unwrap();
        NonlocalSystem::new(grid, lap, coupling, pair).unwrap()
    }

    #[test]
    fn s_of_zero_is_zero() {
        let sys = system(15, CouplingMatrix::new(2.0, 1.0, 1.0, 2.0).unwrap());
        assert_eq!(sys.apply_s(&StateField::zeros(15)).unwrap(), StateField::zeros(15));
        assert_eq!(sys.apply_g(&StateField::zeros(15)).unwrap(), StateField::zeros(15));
    }

    #[test]
    fn s_inverts_eigenvector() {
        let sys = system(31, CouplingMatrix::identity());
        let ds = discrete_spectrum(sys.laplacian(), 1).unwrap();
        let phi = ds.phi1().to_vec();
        let out = sys.apply_s(&StateField::new(phi.clone(), vec![0.0; 31]).unwrap()).unwrap();
        for (a, b) in out.u.iter().zip(&phi) {
            assert!((a - b / ds.lambda1()).abs() < 1e-13);
        }
        assert!(out.v.iter().all(|x| *x == 0.0));

        let sys = sys.with_coupling(CouplingMatrix::new(2.0, 1.0, 1.0, 2.0).unwrap());
        let out = sys.apply_s(&StateField::new(phi.clone(), phi.clone()).unwrap()).unwrap();
        for ((a, b), p) in out.u.iter().zip(&out.v).zip(&phi) {
            assert!((a - 3.0 * p / ds.lambda1()).abs() < 1e-13);
            assert!((b - 3.0 * p / ds.lambda1()).abs() < 1e-13);
        }
    }

    #[test]
    fn residual_matches_operator_definition() {
        let sys = system(21, CouplingMatrix::new(2.0, 1.0, 1.0, 2.0).unwrap());
        let u: Vec<f64> = (0..21).map(|i| ((i as f64) * 0.3).sin()).collect();
        let v: Vec<f64> = (0..21).map(|i| ((i as f64) * 0.7).cos()).collect();
        let s = StateField::new(u, v).unwrap();
        let t = 1.7;
        let direct = s.sub(&sys.apply_s(&s).unwrap().scaled(t)).sub(&sys.apply_g(&s).unwrap());
        let r = sys.residual(t, &s).unwrap();
        assert!(r.sub(&direct).sup_norm() < 1e-13);
        // t = 0 reduces to U − G(U)
        let r0 = sys.residual(0.0, &s).unwrap();
        assert!(r0.sub(&s.sub(&sys.apply_g(&s).unwrap())).sup_norm() < 1e-13);
        assert!(sys.residual(-1.0, &s).is_err());
    }

    #[test]
    fn trivial_start_is_zero_in_zero_iterations() {
        let sys = system(15, CouplingMatrix::new(2.0, 1.0, 1.0, 2.0).unwrap());
        let out = sys.newton_solve(0.0, &StateField::zeros(15), &NewtonOptions::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.classification, Classification::Zero);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let sys = system(15, CouplingMatrix::identity());
        assert!(matches!(sys.apply_s(&StateField::zeros(14)), Err(Error::GridMismatch { .. })));
        assert!(matches!(sys.residual(1.0, &StateField::zeros(16)), Err(Error::GridMismatch { .. })));
    }
}
