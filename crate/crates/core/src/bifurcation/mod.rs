//! The positive branch emanating from `(t₁, 0)` and the checks built on it.
//!
//! [`BifurcationProblem`] bundles a [`NonlocalSystem`] with its spectral data
//! and refuses coupling matrices outside the covered hypotheses. The
//! submodules add continuation, threshold bisection, the linear kernel
//! oracle, the symmetrization audit and the branch diagnostics.

mod audit;
mod continuation;
mod diagnostics;
mod kernel_scan;
mod threshold;

use alloc::vec::Vec;

pub use audit::{nonexistence_audit, AuditReport};
pub use continuation::{continue_branch, Branch, BranchPoint, ContinuationOptions, Termination};
pub use diagnostics::{apriori_monitor, hopf_check, sign_check, AprioriReport, HopfReport, SignEntry, SignReport};
pub use kernel_scan::{linear_kernel_scan, KernelVectorReport, LemmaEReport, ProjectionCheck};
pub use threshold::{existence_threshold, Bracket, ThresholdOptions, ThresholdResult};

use crate::math::sup_norm;
use crate::operators::{Classification, NewtonOptions, NonlocalSystem, SolveOutcome};
use crate::spectral::{
    analyze_coupling, bifurcation_parameter, discrete_spectrum, BifurcationParameter, CouplingSpectrum,
    DiscreteSpectrum,
};
use crate::{Error, Hypothesis, Result, StateField};

/// Which existence setting the run exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Cooperative coupling, general kernels and crowding functions.
    Tp1,
    /// Equal kernels and crowding functions; `A` has exactly one positive
    /// eigenvalue.
    Tp2,
}

/// Checks the coupling hypotheses of `mode`, naming the first failure.
///
/// The order is `z_strictly_positive`, `lambda_positive`, `lambda_simple`,
/// then `cooperative` (TP1) or `unique_positive_eigenvalue` (TP2).
pub fn check_hypotheses(cs: &CouplingSpectrum, coupling: &crate::spectral::CouplingMatrix, mode: Mode) -> Result<()> {
    let failed = if !cs.z_strictly_positive {
        Some(Hypothesis::ZStrictlyPositive)
    } else if !cs.lambda_positive {
        Some(Hypothesis::LambdaPositive)
    } else if !cs.lambda_simple {
        Some(Hypothesis::LambdaSimple)
    } else {
        match mode {
            Mode::Tp1 if !coupling.is_cooperative() => Some(Hypothesis::Cooperative),
            Mode::Tp2 if !cs.unique_positive_eigenvalue => Some(Hypothesis::UniquePositiveEigenvalue),
            _ => None,
        }
    };
    failed.map_or(Ok(()), |h| Err(Error::Hypothesis(h)))
}

/// `ε·(αφ₁, βφ₁)` with `z = (α, β)` and `φ₁` both sup-normalized.
pub fn seed_tangent(cs: &CouplingSpectrum, ds: &DiscreteSpectrum, eps: f64) -> Result<StateField> {
    if !cs.z_strictly_positive {
        return Err(Error::Hypothesis(Hypothesis::ZStrictlyPositive));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!("seed amplitude {eps} must be positive")));
    }
    let [alpha, beta] = cs.z_sup_normalized();
    let phi = ds.phi1();
    let peak = sup_norm(phi);
    Ok(StateField {
        u: phi.iter().map(|p| eps * alpha * p / peak).collect(),
        v: phi.iter().map(|p| eps * beta * p / peak).collect(),
    })
}

/// Seed amplitudes of the multi-start family.
pub const SEED_AMPLITUDES: [f64; 3] = [1e-3, 1e-2, 1e-1];
/// Values of the constant starts of the multi-start family.
pub const CONSTANT_STARTS: [f64; 4] = [0.1, 1.0, 10.0, 100.0];

/// A discrete problem that passed the hypothesis gates, with its spectra.
#[derive(Debug, Clone)]
pub struct BifurcationProblem {
    system: NonlocalSystem,
    mode: Mode,
    coupling_spectrum: CouplingSpectrum,
    spectrum: DiscreteSpectrum,
    parameter: BifurcationParameter,
}

impl BifurcationProblem {
    /// Runs the gates and computes `eigenpairs` (at least 2) eigenpairs of `-Δ_h`.
    pub fn new(system: NonlocalSystem, mode: Mode, eigenpairs: usize) -> Result<Self> {
        let cs = analyze_coupling(system.coupling());
        check_hypotheses(&cs, system.coupling(), mode)?;
        if mode == Mode::Tp2 {
            let (f, g) = (&system.terms().f, &system.terms().g);
            if f.kernel() != g.kernel() || f.crowding() != g.crowding() {
                return Err(Error::InvalidArgument("TP2 requires K = Γ and f = g".into()));
            }
        }
        let k = eigenpairs.max(2).min(system.nodes());
        let spectrum = discrete_spectrum(system.laplacian(), k)?;
        let parameter = bifurcation_parameter(&cs, &spectrum)?;
        if !parameter.simple {
            return Err(Error::Hypothesis(Hypothesis::NonResonant));
        }
        Ok(Self { system, mode, coupling_spectrum: cs, spectrum, parameter })
    }

    pub fn system(&self) -> &NonlocalSystem {
        &self.system
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn coupling_spectrum(&self) -> &CouplingSpectrum {
        &self.coupling_spectrum
    }

    pub fn spectrum(&self) -> &DiscreteSpectrum {
        &self.spectrum
    }

    pub fn parameter(&self) -> &BifurcationParameter {
        &self.parameter
    }

    pub fn t1(&self) -> f64 {
        self.parameter.t1
    }

    pub fn seed(&self, eps: f64) -> Result<StateField> {
        seed_tangent(&self.coupling_spectrum, &self.spectrum, eps)
    }

    /// The graded family of positive starts: tangent seeds, then constants.
    pub fn starts(&self) -> Result<Vec<StateField>> {
        let mut out = Vec::new();
        for eps in SEED_AMPLITUDES {
            out.push(self.seed(eps)?);
        }
        let n = self.system.nodes();
        for c in CONSTANT_STARTS {
            out.push(StateField { u: alloc::vec![c; n], v: alloc::vec![c; n] });
        }
        Ok(out)
    }

    /// First multi-start outcome classified `PositiveSolution`, if any.
    pub fn positive_probe(&self, t: f64, opts: &NewtonOptions) -> Result<Option<SolveOutcome>> {
        for start in self.starts()? {
            let out = self.system.newton_solve(t, &start, opts)?;
            if out.classification == Classification::PositiveSolution {
                return Ok(Some(out));
            }
        }
        Ok(None)
    }

    /// Every converged, nonzero multi-start outcome at `t`, by increasing amplitude.
    pub fn nontrivial_solutions(&self, t: f64, opts: &NewtonOptions) -> Result<Vec<SolveOutcome>> {
        let mut found = Vec::new();
        for start in self.starts()? {
            let out = self.system.newton_solve(t, &start, opts)?;
            if out.converged && out.classification != Classification::Zero {
                found.push(out);
            }
        }
        found.sort_by(|a, b| a.state.sup_norm().total_cmp(&b.state.sup_norm()));
        Ok(found)
    }
}
