use alloc::vec::Vec;

use super::{BifurcationProblem, Branch, BranchPoint};
use crate::spectral::discrete_spectrum;
use crate::{Result, StateField};

/// Alignment floor for points inside the window.
const ALIGNMENT: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignEntry {
    pub index: usize,
    pub t: f64,
    /// `|t − t₁| + ‖U‖_∞`.
    pub distance: f64,
    /// `1` or `-1` when both components are strictly of that sign, else `0`.
    pub sign: i8,
    /// `|cos|` against the reference direction.
    pub alignment: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignReport {
    pub window: f64,
    /// Only points inside the window; the start datum is skipped.
    pub entries: Vec<SignEntry>,
}

impl SignReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }
}

/// Checks that branch points near `(t₁, 0)` are strictly one-signed and
/// aligned with `reference` (normally the tangent seed `(αφ₁, βφ₁)`).
pub fn sign_check(branch: &Branch, reference: &StateField, t1: f64, window: f64) -> SignReport {
    let entries = branch
        .points
        .iter()
        .enumerate()
        .skip(1)
        .filter_map(|(index, p)| {
            let distance = (p.t - t1).abs() + p.amplitude;
            if distance >= window {
                return None;
            }
            let sign = if p.state.is_positive() {
                1
            } else if p.state.is_negative() {
                -1
            } else {
                0
            };
            let alignment = p.state.cosine(reference).abs();
            Some(SignEntry { index, t: p.t, distance, sign, alignment, passed: sign != 0 && alignment >= ALIGNMENT })
        })
        .collect();
    SignReport { window, entries }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AprioriReport {
    pub lambda: f64,
    /// Points with `t ≤ Λ`, start datum included.
    pub points: usize,
    /// `max ‖U‖_∞`.
    pub r_sup: f64,
    /// `max ‖U‖_H`.
    pub r_h: f64,
    pub cap: f64,
    pub finite: bool,
    pub within_cap: bool,
}

/// Largest observed norms over branch points with `t ≤ Λ`.
pub fn apriori_monitor(branch: &Branch, lambda: f64, cap: f64) -> AprioriReport {
    let selected: Vec<&BranchPoint> = branch.points.iter().filter(|p| p.t <= lambda).collect();
    let r_sup = selected.iter().map(|p| p.amplitude).fold(0.0, f64::max);
    let r_h = selected.iter().map(|p| p.h_norm).fold(0.0, f64::max);
    let finite = r_sup.is_finite() && r_h.is_finite();
    AprioriReport { lambda, points: selected.len(), r_sup, r_h, cap, finite, within_cap: finite && r_sup <= cap }
}

/// Principal eigenpair of `-Δ_h + diag(φ_U)` at a branch point, compared
/// with the solution itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfReport {
    pub t: f64,
    /// Principal eigenvalue `ν` of `L_h`.
    pub nu: f64,
    /// `tλ`; equal to `ν` when `U = χ₁z`.
    pub t_lambda: f64,
    /// `|cos|` between `U` and `(αχ₁, βχ₁)`.
    pub alignment: f64,
    pub eigenvector_positive: bool,
    pub solution_positive: bool,
    /// Both components positive at the boundary-adjacent nodes, i.e. the
    /// discrete outward normal derivative is negative.
    pub boundary_layer_positive: bool,
}

impl HopfReport {
    pub fn passed(&self) -> bool {
        self.eigenvector_positive && self.solution_positive && self.boundary_layer_positive
    }
}

pub fn hopf_check(problem: &BifurcationProblem, point: &BranchPoint) -> Result<HopfReport> {
    let system = problem.system();
    let phi = system.terms().f.eval_phi(&point.state)?;
    let op = system.laplacian().with_potential(&phi)?;
    let ds = discrete_spectrum(&op, 1)?;
    let chi = ds.phi1();
    let [alpha, beta] = problem.coupling_spectrum().z;
    let reference =
        StateField { u: chi.iter().map(|c| alpha * c).collect(), v: chi.iter().map(|c| beta * c).collect() };
    let grid = system.grid();
    let boundary_layer_positive = (0..grid.len())
        .filter(|&i| grid.multi_index(i).iter().take(grid.dimension()).any(|&k| k == 0 || k + 1 == grid.n()))
        .all(|i| point.state.u[i] > 0.0 && point.state.v[i] > 0.0);
    Ok(HopfReport {
        t: point.t,
        nu: ds.lambda1(),
        t_lambda: point.t * problem.coupling_spectrum().lambda,
        alignment: point.state.cosine(&reference).abs(),
        eigenvector_positive: chi.iter().all(|c| *c > 0.0),
        solution_positive: point.state.is_positive(),
        boundary_layer_positive,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::problem;
    use super::super::{continue_branch, ContinuationOptions, Mode};
    use super::*;
    use crate::spectral::CouplingMatrix;

    #[test]
    fn window_and_mirror() {
        let p = problem(31, CouplingMatrix::new(2.0, 1.0, 1.0, 2.0).unwrap(), Mode::Tp1).unwrap();
        let b = continue_branch(&p, &ContinuationOptions::to(2.0 * p.t1())).unwrap();
        let seed = p.seed(1.0).unwrap();
        let r = sign_check(&b, &seed, p.t1(), 0.5);
        assert!(!r.entries.is_empty());
        assert!(r.all_passed());
        assert!(r.entries.iter().all(|e| e.t < 2.0 * p.t1()));
        let m = sign_check(&b.mirrored(), &seed, p.t1(), 0.5);
        assert!(m.all_passed() && m.entries.iter().all(|e| e.sign == -1));

        let empty = apriori_monitor(&b, 0.5 * p.t1(), 1.0);
        assert_eq!((empty.points, empty.r_sup, empty.r_h), (0, 0.0, 0.0));
        let full = apriori_monitor(&b, 2.0 * p.t1(), 100.0);
        assert!(full.finite && full.within_cap && full.r_sup > 0.0);
    }

    #[test]
    fn hopf_on_tp2_branch() {
        let p = problem(31, CouplingMatrix::new(1.0, 2.0, 3.0, 2.0).unwrap(), Mode::Tp2).unwrap();
        let b = continue_branch(&p, &ContinuationOptions::to(2.0 * p.t1())).unwrap();
        for q in &b.points[1..] {
            let h = hopf_check(&p, q).unwrap();
            assert!(h.passed());
            // constant kernel: φ is constant, so U = χ₁z exactly
            assert!((h.nu - h.t_lambda).abs() < 1e-8 * h.t_lambda);
            assert!(h.alignment > 1.0 - 1e-10);
        }
    }
}
