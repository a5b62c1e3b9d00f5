use alloc::vec::Vec;

use super::BifurcationProblem;
use crate::linalg::DenseMatrix;
use crate::math::sqrt;
use crate::operators::{Classification, NewtonOptions};
use crate::{Error, Result, StateField};

/// One accepted point `(t, U)` of the positive branch.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    pub t: f64,
    pub state: StateField,
    /// `‖u‖_∞ + ‖v‖_∞`.
    pub amplitude: f64,
    pub h_norm: f64,
    pub u_positive: bool,
    pub v_positive: bool,
    pub residual: f64,
    pub newton_iterations: usize,
}

impl BranchPoint {
    fn new(problem: &BifurcationProblem, t: f64, state: StateField, residual: f64, newton_iterations: usize) -> Self {
        Self {
            t,
            amplitude: state.sup_norm(),
            h_norm: state.h_norm(problem.system().laplacian()),
            u_positive: state.u_positive(),
            v_positive: state.v_positive(),
            state,
            residual,
            newton_iterations,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.u_positive && self.v_positive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ReachedTMax,
    StepFailure,
    PositivityLost,
    AmplitudeCap,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Self::ReachedTMax => "reached_t_max",
            Self::StepFailure => "step_failure",
            Self::PositivityLost => "positivity_lost",
            Self::AmplitudeCap => "amplitude_cap",
        }
    }
}

/// A continuation run. `points[0]` is the start datum `(t₁, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    pub termination: Termination,
    /// Amplitude of the seed the first Newton solve started from.
    pub seed_amplitude: f64,
}

impl Branch {
    pub fn start(&self) -> &BranchPoint {
        &self.points[0]
    }

    /// The image `(t, −U)` under the odd symmetry of the problem.
    pub fn mirrored(&self) -> Branch {
        let mut out = self.clone();
        for p in &mut out.points {
            p.state = p.state.scaled(-1.0);
            p.u_positive = p.state.u_positive();
            p.v_positive = p.state.v_positive();
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationOptions {
    pub t_max: f64,
    /// First point is solved at `t₁(1 + initial_offset)`.
    pub initial_offset: f64,
    /// Arclength steps, measured in the weighted norm
    /// `(Δt/t₁)² + ‖ΔU‖²/(2N)`.
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub amplitude_cap: f64,
    pub max_points: usize,
    /// Corrector iteration cap per step.
    pub corrector_iterations: usize,
    pub newton: NewtonOptions,
}

impl ContinuationOptions {
    pub fn to(t_max: f64) -> Self {
        Self {
            t_max,
            initial_offset: 1e-2,
            initial_step: 0.05,
            min_step: 1e-6,
            max_step: 0.5,
            amplitude_cap: f64::INFINITY,
            max_points: 400,
            corrector_iterations: 12,
            newton: NewtonOptions::default(),
        }
    }
}

struct Metric {
    t_scale: f64,
    u_scale: f64,
}

impl Metric {
    fn dot(&self, x: &[f64], y: &[f64]) -> f64 {
        let k = x.len() - 1;
        x[k] * y[k] / (self.t_scale * self.t_scale)
            + x[..k].iter().zip(&y[..k]).map(|(a, b)| a * b).sum::<f64>() / self.u_scale
    }

    fn norm(&self, x: &[f64]) -> f64 {
        sqrt(self.dot(x, x))
    }
}

fn stack(t: f64, s: &StateField) -> Vec<f64> {
    let mut x = s.to_flat();
    x.push(t);
    x
}

/// Pseudo-arclength continuation of the positive branch from `(t₁, 0)`.
pub fn continue_branch(problem: &BifurcationProblem, opts: &ContinuationOptions) -> Result<Branch> {
    if !(opts.min_step > 0.0 && opts.min_step <= opts.initial_step && opts.initial_step <= opts.max_step) {
        return Err(Error::InvalidArgument("need 0 < min_step ≤ initial_step ≤ max_step".into()));
    }
    let system = problem.system();
    let t1 = problem.t1();
    let n = system.nodes();
    let start = BranchPoint::new(problem, t1, StateField::zeros(n), 0.0, 0);
    let mut branch = Branch { points: alloc::vec![start], termination: Termination::ReachedTMax, seed_amplitude: 0.0 };
    if !(opts.amplitude_cap > 0.0) {
        branch.termination = Termination::AmplitudeCap;
        return Ok(branch);
    }
    if opts.t_max <= t1 {
        return Ok(branch);
    }

    let t_first = (t1 * (1.0 + opts.initial_offset)).min(opts.t_max);
    let mut first = None;
    for start in problem.starts()? {
        let out = system.newton_solve(t_first, &start, &opts.newton)?;
        if out.classification == Classification::PositiveSolution {
            branch.seed_amplitude = start.sup_norm();
            first = Some(out);
            break;
        }
    }
    let first = first.ok_or_else(|| {
        Error::ContinuationStart(alloc::format!("no positive solution at t = {t_first} from the seed family"))
    })?;
    let p = BranchPoint::new(problem, t_first, first.state, first.residual, first.iterations);
    if p.amplitude > opts.amplitude_cap {
        branch.termination = Termination::AmplitudeCap;
        return Ok(branch);
    }
    branch.points.push(p);
    if t_first >= opts.t_max {
        return Ok(branch);
    }

    let metric = Metric { t_scale: t1, u_scale: (2 * n) as f64 };
    let mut ds = opts.initial_step;
    loop {
        if branch.points.len() >= opts.max_points {
            branch.termination = Termination::StepFailure;
            return Ok(branch);
        }
        let k = branch.points.len();
        let prev = stack(branch.points[k - 2].t, &branch.points[k - 2].state);
        let cur = stack(branch.points[k - 1].t, &branch.points[k - 1].state);
        let mut tangent: Vec<f64> = cur.iter().zip(&prev).map(|(a, b)| a - b).collect();
        let len = metric.norm(&tangent);
        tangent.iter_mut().for_each(|x| *x /= len);

        let step = loop {
            match corrector(problem, &metric, &cur, &tangent, ds, opts) {
                Some(found) => break Some(found),
                None => {
                    ds *= 0.5;
                    if ds < opts.min_step {
                        break None;
                    }
                }
            }
        };
        let Some((x, residual, iterations)) = step else {
            branch.termination = Termination::StepFailure;
            return Ok(branch);
        };
        let t = x[2 * n];
        let state = StateField::from_flat(&x[..2 * n]);

        if t >= opts.t_max {
            // land exactly on t_max by a natural-parameter solve from the
            // linear interpolant
            let t_cur = cur[2 * n];
            let theta = (opts.t_max - t_cur) / (t - t_cur);
            let guess: Vec<f64> = cur[..2 * n].iter().zip(&x[..2 * n]).map(|(a, b)| a + theta * (b - a)).collect();
            let out = system.newton_solve(opts.t_max, &StateField::from_flat(&guess), &opts.newton)?;
            if out.classification != Classification::PositiveSolution {
                branch.termination = if out.converged { Termination::PositivityLost } else { Termination::StepFailure };
                return Ok(branch);
            }
            let p = BranchPoint::new(problem, opts.t_max, out.state, out.residual, out.iterations);
            if p.amplitude > opts.amplitude_cap {
                branch.termination = Termination::AmplitudeCap;
            } else {
                branch.points.push(p);
            }
            return Ok(branch);
        }
        if !state.is_positive() {
            branch.termination = Termination::PositivityLost;
            return Ok(branch);
        }
        let p = BranchPoint::new(problem, t, state, residual, iterations);
        if p.amplitude > opts.amplitude_cap {
            branch.termination = Termination::AmplitudeCap;
            return Ok(branch);
        }
        branch.points.push(p);
        if iterations <= 2 {
            ds = (2.0 * ds).min(opts.max_step);
        } else if iterations >= 5 {
            ds = (0.5 * ds).max(opts.min_step);
        }
    }
}

/// Newton on the residual augmented with `⟨X − X_k, τ⟩ = ds`, from the
/// predictor `X_k + ds·τ`.
fn corrector(
    problem: &BifurcationProblem,
    metric: &Metric,
    cur: &[f64],
    tangent: &[f64],
    ds: f64,
    opts: &ContinuationOptions,
) -> Option<(Vec<f64>, f64, usize)> {
    let system = problem.system();
    let dim = cur.len();
    let n2 = dim - 1;
    let mut x: Vec<f64> = cur.iter().zip(tangent).map(|(c, d)| c + ds * d).collect();
    // constraint gradient in the Euclidean coordinates
    let mut grad: Vec<f64> = tangent[..n2].iter().map(|d| d / metric.u_scale).collect();
    grad.push(tangent[n2] / (metric.t_scale * metric.t_scale));
    for it in 0..=opts.corrector_iterations {
        let t = x[n2];
        if !(t > 0.0) || x.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let state = StateField::from_flat(&x[..n2]);
        let r = system.residual(t, &state).ok()?;
        let rn = r.sup_norm_max();
        let diff: Vec<f64> = x.iter().zip(cur).map(|(a, b)| a - b).collect();
        let g = metric.dot(&diff, tangent) - ds;
        if rn <= opts.newton.tolerance && g.abs() <= 1e-10 * ds.max(1.0) {
            return Some((x, rn, it));
        }
        if it == opts.corrector_iterations {
            return None;
        }
        let jac = system.jacobian(t, &state);
        let rt = system.residual_t_derivative(&state);
        let mut aug = DenseMatrix::zeros(dim, dim);
        for i in 0..n2 {
            aug.row_mut(i)[..n2].copy_from_slice(jac.row(i));
            aug[(i, n2)] = rt[i];
        }
        aug.row_mut(n2).copy_from_slice(&grad);
        let lu = aug.lu().ok()?;
        let mut rhs = r.to_flat();
        rhs.push(g);
        let dx = lu.solve(&rhs);
        x.iter_mut().zip(&dx).for_each(|(a, b)| *a -= b);
    }
    None
}
