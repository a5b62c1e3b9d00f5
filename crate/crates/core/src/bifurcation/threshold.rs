use alloc::vec::Vec;

use super::{BifurcationProblem, Mode};
use crate::operators::NewtonOptions;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdOptions {
    pub t_lo: f64,
    pub t_hi: f64,
    /// Stop once `t_hi − t_lo ≤ bisect_tol·t_hi`.
    pub bisect_tol: f64,
    pub newton: NewtonOptions,
}

impl ThresholdOptions {
    /// Bracket `[t₁/2, 2t₁]`.
    pub fn around(t1: f64, bisect_tol: f64) -> Self {
        Self { t_lo: 0.5 * t1, t_hi: 2.0 * t1, bisect_tol, newton: NewtonOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub t_star: f64,
    pub bracket: Bracket,
    /// Every predicate evaluation `(t, positive solution found)` in order.
    pub evaluations: Vec<(f64, bool)>,
    /// TP2 only: a positive solution was found at the initial `t_lo`.
    /// Recorded, not treated as an inconsistency.
    pub below_threshold_positive: bool,
}

/// Bisection for the smallest `t` at which the multi-start family reaches a
/// positive solution.
pub fn existence_threshold(problem: &BifurcationProblem, opts: &ThresholdOptions) -> Result<ThresholdResult> {
    if !(opts.t_lo >= 0.0 && opts.t_lo < opts.t_hi && opts.bisect_tol > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "bad bracket [{}, {}] or tolerance {}",
            opts.t_lo,
            opts.t_hi,
            opts.bisect_tol
        )));
    }
    let mut evaluations = Vec::new();
    let mut predicate = |t: f64| -> Result<bool> {
        let found = problem.positive_probe(t, &opts.newton)?.is_some();
        evaluations.push((t, found));
        Ok(found)
    };
    let lo_found = predicate(opts.t_lo)?;
    let hi_found = predicate(opts.t_hi)?;
    let tp1_violation = lo_found && problem.mode() == Mode::Tp1;
    if tp1_violation || !hi_found {
        return Err(Error::InconsistentBracket { t_lo: opts.t_lo, lo_found, t_hi: opts.t_hi, hi_found });
    }
    let (mut lo, mut hi) = (opts.t_lo, opts.t_hi);
    while hi - lo > opts.bisect_tol * hi {
        let mid = 0.5 * (lo + hi);
        if predicate(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdResult {
        t_star: 0.5 * (lo + hi),
        bracket: Bracket { lo, hi },
        evaluations,
        below_threshold_positive: lo_found,
    })
}
