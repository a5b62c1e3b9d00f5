//! The five canned experiments and their artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use coopbif_core::bifurcation::{
    apriori_monitor, continue_branch, existence_threshold, hopf_check, linear_kernel_scan, nonexistence_audit,
    sign_check, AuditReport, BifurcationProblem, Branch, ContinuationOptions, ThresholdOptions,
};
use coopbif_core::discretization::Grid;
use coopbif_core::operators::{Classification, SolveOutcome};
use coopbif_core::spectral::{analyze_coupling, bifurcation_parameter, discrete_spectrum, SpectrumKind};
use coopbif_core::{Hypothesis, StateField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{from_numerics, from_setup, RunError};
use crate::manifest::{Artifact, RunManifest, SpectralSummary, Verdict, MANIFEST_FILE};
use crate::output::{emit_bifurcation_svg, emit_branch_csv, write_csv, write_json};

/// Environment variable that relocates relative output directories.
pub const OUTPUT_ROOT_ENV: &str = "COOPBIF_OUTPUT_ROOT";

struct Run<'a> {
    config: &'a ExperimentConfig,
    dir: PathBuf,
    artifacts: Vec<String>,
    verdicts: Vec<Verdict>,
}

impl Run<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        self.artifacts.push(name.to_string());
        self.dir.join(name)
    }

    fn verdict(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.verdicts.push(Verdict::new(name, passed, detail));
    }

    fn problem(&self) -> Result<BifurcationProblem, RunError> {
        let system = self.config.build_system()?;
        BifurcationProblem::new(system, self.config.mode.into(), self.config.knobs.eigenpairs).map_err(from_setup)
    }
}

/// Runs the configured experiment, writes its artifacts and finally the
/// manifest into the output directory.
///
/// Relative `output_dir` values are placed under `output_root` when given.
pub fn run_experiment(config: &ExperimentConfig, output_root: Option<&Path>) -> Result<RunManifest, RunError> {
    config.validate()?;
    let experiment = config.experiment()?;
    let started = Instant::now();
    let system = config.build_system()?;
    let dir = config.resolve_output(output_root);
    std::fs::create_dir_all(&dir).map_err(RunError::io(&dir))?;
    let stale = dir.join(MANIFEST_FILE);
    if stale.exists() {
        std::fs::remove_file(&stale).map_err(RunError::io(&stale))?;
    }
    let spectral = spectral_summary(config, &system)?;

    let mut run = Run { config, dir, artifacts: Vec::new(), verdicts: Vec::new() };
    match experiment {
        Experiment::Solve => solve(&mut run)?,
        Experiment::Branch => branch(&mut run)?,
        Experiment::Threshold => threshold(&mut run)?,
        Experiment::LemmaE => lemma_e(&mut run, &system)?,
        Experiment::Audit => audit(&mut run)?,
    }

    let artifacts = run.artifacts.iter().map(|a| Artifact::hash(&run.dir, a)).collect::<Result<Vec<_>, _>>()?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: experiment.name().to_string(),
        config: serde_json::to_value(config).expect("config serializes"),
        spectral,
        artifacts,
        verdicts: run.verdicts,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    manifest.write_atomic(&run.dir)?;
    Ok(manifest)
}

fn spectral_summary(
    config: &ExperimentConfig,
    system: &coopbif_core::operators::NonlocalSystem,
) -> Result<SpectralSummary, RunError> {
    let cs = analyze_coupling(system.coupling());
    let ds = discrete_spectrum(system.laplacian(), config.knobs.eigenpairs).map_err(from_numerics)?;
    let parameter = bifurcation_parameter(&cs, &ds).ok();
    Ok(SpectralSummary {
        kind: match cs.kind {
            SpectrumKind::RealDistinct => "real_distinct",
            SpectrumKind::RealRepeated => "real_repeated",
            SpectrumKind::ComplexPair => "complex_pair",
        }
        .to_string(),
        lambda: cs.lambda,
        mu: cs.mu,
        z: cs.z,
        w: cs.w,
        eigenvalues: ds.values.clone(),
        t1: parameter.map(|p| p.t1),
        s1: parameter.and_then(|p| p.s1),
    })
}

#[derive(Serialize)]
struct OutcomeRecord {
    start: String,
    converged: bool,
    classification: &'static str,
    residual: f64,
    iterations: usize,
    amplitude: f64,
}

fn classification_name(c: Classification) -> &'static str {
    match c {
        Classification::Zero => "zero",
        Classification::PositiveSolution => "positive",
        Classification::SignChanging => "sign_changing",
        Classification::NegativeSolution => "negative",
        Classification::Diverged => "diverged",
    }
}

fn record(start: String, o: &SolveOutcome) -> OutcomeRecord {
    OutcomeRecord {
        start,
        converged: o.converged,
        classification: classification_name(o.classification),
        residual: o.residual,
        iterations: o.iterations,
        amplitude: o.state.sup_norm(),
    }
}

fn random_positive_starts(config: &ExperimentConfig, nodes: usize, count: usize, salt: u64) -> Vec<StateField> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ salt);
    let scale = config.knobs.random_start_scale;
    (0..count)
        .map(|_| {
            let mut f = || (0..nodes).map(|_| scale * (1.0 - rng.random::<f64>())).collect::<Vec<f64>>();
            let u = f();
            StateField { u, v: f() }
        })
        .collect()
}

fn kernel_class_verdict(run: &mut Run, problem: &BifurcationProblem) {
    let mut rng = ChaCha8Rng::seed_from_u64(run.config.seed);
    let system = problem.system();
    let trials = run.config.knobs.kernel_trials;
    let k = system.terms().f.check_kernel_class(trials, system.grid(), &mut rng);
    let g = system.terms().g.check_kernel_class(trials, system.grid(), &mut rng);
    run.verdict(
        "kernels pass the class-K definiteness check",
        k.passes() && g.passes(),
        format!("min form values: K {:e}, Γ {:e} over {} trials each", k.min_value, g.min_value, k.evaluated),
    );
}

fn node_rows(grid: &Grid, state: &StateField) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = if grid.dimension() == 1 { vec!["x", "u", "v"] } else { vec!["x", "y", "u", "v"] };
    let rows = (0..grid.len())
        .map(|i| {
            let mut r: Vec<String> = grid.node(i).iter().map(|c| c.to_string()).collect();
            r.push(state.u[i].to_string());
            r.push(state.v[i].to_string());
            r
        })
        .collect();
    (header, rows)
}

fn solve(run: &mut Run) -> Result<(), RunError> {
    let problem = run.problem()?;
    let knobs = &run.config.knobs;
    let t1 = problem.t1();
    let t = knobs
        .t
        .as_ref()
        .ok_or_else(|| RunError::Config("solve needs a value of t (--t or knobs.t)".into()))?
        .resolve(t1)?;
    if !(t >= 0.0) {
        return Err(RunError::Config(format!("t = {t} must be nonnegative")));
    }
    let newton = knobs.newton();
    let mut starts: Vec<(String, StateField)> = Vec::new();
    for (k, s) in problem.starts().map_err(from_numerics)?.into_iter().enumerate() {
        starts.push((format!("family[{k}]"), s));
    }
    for (k, s) in random_positive_starts(run.config, problem.system().nodes(), knobs.random_starts, 0x5eed)
        .into_iter()
        .enumerate()
    {
        starts.push((format!("random[{k}]"), s));
    }
    let mut outcomes = Vec::new();
    for (name, s) in &starts {
        let o = problem.system().newton_solve(t, s, &newton).map_err(from_numerics)?;
        outcomes.push((name.clone(), o));
    }
    let by_amp = |a: &&(String, SolveOutcome), b: &&(String, SolveOutcome)| {
        a.1.state.sup_norm().total_cmp(&b.1.state.sup_norm())
    };
    let pick = |c: Classification| outcomes.iter().filter(|(_, o)| o.classification == c).min_by(by_amp);
    let selected = pick(Classification::PositiveSolution)
        .or_else(|| {
            outcomes.iter().filter(|(_, o)| o.converged && o.classification != Classification::Zero).min_by(by_amp)
        })
        .or_else(|| pick(Classification::Zero))
        .ok_or_else(|| RunError::Numerical(format!("no start converged at t = {t}")))?
        .clone();

    let seed = problem.seed(1.0).map_err(from_numerics)?;
    let (header, rows) = node_rows(problem.system().grid(), &selected.1.state);
    let p = run.path("solution.csv");
    write_csv(&p, &header, &rows)?;

    let any_positive = pick(Classification::PositiveSolution).is_some();
    #[derive(Serialize)]
    struct SolveReport {
        t: f64,
        t1: f64,
        selected: OutcomeRecord,
        cosine_to_seed: f64,
        outcomes: Vec<OutcomeRecord>,
    }
    let report = SolveReport {
        t,
        t1,
        selected: record(selected.0.clone(), &selected.1),
        cosine_to_seed: selected.1.state.cosine(&seed),
        outcomes: outcomes.iter().map(|(n, o)| record(n.clone(), o)).collect(),
    };
    let p = run.path("solve.json");
    write_json(&p, &report)?;

    run.verdict("selected start converged", selected.1.converged, format!("residual {:e}", selected.1.residual));
    match run.config.mode {
        crate::config::ModeConfig::Tp1 => run.verdict(
            "positive solution found iff t > t₁",
            any_positive == (t > t1),
            format!("t/t₁ = {}, positive found: {any_positive}", t / t1),
        ),
        crate::config::ModeConfig::Tp2 if t > t1 => {
            run.verdict("positive solution found for t > t₁", any_positive, format!("t/t₁ = {}", t / t1))
        }
        crate::config::ModeConfig::Tp2 => {}
    }
    kernel_class_verdict(run, &problem);
    Ok(())
}

fn continuation_options(run: &Run, t1: f64) -> Result<ContinuationOptions, RunError> {
    let k = &run.config.knobs;
    Ok(ContinuationOptions {
        t_max: k.t_max.resolve(t1)?,
        initial_offset: k.initial_offset,
        initial_step: k.initial_step,
        min_step: k.min_step,
        max_step: k.max_step,
        amplitude_cap: k.amplitude_cap.unwrap_or(f64::INFINITY),
        max_points: k.max_points,
        corrector_iterations: 12,
        newton: k.newton(),
    })
}

/// `max |u/v − α/β| / (α/β)` over the first nontrivial point.
fn seed_ratio_error(branch: &Branch, z: [f64; 2]) -> Option<f64> {
    let p = branch.points.get(1)?;
    let expected = z[0] / z[1];
    Some(p.state.u.iter().zip(&p.state.v).map(|(u, v)| ((u / v) - expected).abs() / expected).fold(0.0, f64::max))
}

#[derive(Serialize)]
struct AuditRecord {
    t: f64,
    sigma: f64,
    dirichlet: f64,
    mass: f64,
    nonlocal: f64,
    quadratic: f64,
    identity_residual: f64,
    form_slack: f64,
    poincare_slack: f64,
    lower_bound: f64,
    certificate_margin: f64,
    certified: bool,
}

impl From<&AuditReport> for AuditRecord {
    fn from(r: &AuditReport) -> Self {
        Self {
            t: r.t,
            sigma: r.sigma,
            dirichlet: r.dirichlet,
            mass: r.mass,
            nonlocal: r.nonlocal,
            quadratic: r.quadratic,
            identity_residual: r.identity_residual,
            form_slack: r.form_slack,
            poincare_slack: r.poincare_slack,
            lower_bound: r.lower_bound,
            certificate_margin: r.certificate_margin,
            certified: r.certified(),
        }
    }
}

fn branch(run: &mut Run) -> Result<(), RunError> {
    let problem = run.problem()?;
    let t1 = problem.t1();
    let opts = continuation_options(run, t1)?;
    let b = continue_branch(&problem, &opts).map_err(from_numerics)?;

    let p = run.path("branch.csv");
    emit_branch_csv(&b, &p)?;
    let p = run.path("branch.svg");
    emit_bifurcation_svg(&b, t1, &p)?;

    let seed = problem.seed(1.0).map_err(from_numerics)?;
    let sign = sign_check(&b, &seed, t1, run.config.knobs.sign_window);
    let apriori = apriori_monitor(&b, opts.t_max, run.config.knobs.apriori_cap);
    let z = problem.coupling_spectrum().z;
    let ratio = seed_ratio_error(&b, z);
    let hopf = if run.config.mode == crate::config::ModeConfig::Tp2 {
        b.points[1..].iter().map(|q| hopf_check(&problem, q)).collect::<Result<Vec<_>, _>>().map_err(from_numerics)?
    } else {
        Vec::new()
    };

    #[derive(Serialize)]
    struct SignRecord {
        index: usize,
        t: f64,
        distance: f64,
        sign: i8,
        alignment: f64,
        passed: bool,
    }
    #[derive(Serialize)]
    struct HopfRecord {
        t: f64,
        nu: f64,
        t_lambda: f64,
        alignment: f64,
        passed: bool,
    }
    #[derive(Serialize)]
    struct BranchReport {
        t1: f64,
        t_max: f64,
        termination: &'static str,
        points: usize,
        seed_amplitude: f64,
        sign_window: f64,
        sign_check: Vec<SignRecord>,
        apriori_r_sup: f64,
        apriori_r_h: f64,
        seed_ratio_error: Option<f64>,
        hopf: Vec<HopfRecord>,
    }
    let report = BranchReport {
        t1,
        t_max: opts.t_max,
        termination: b.termination.name(),
        points: b.points.len(),
        seed_amplitude: b.seed_amplitude,
        sign_window: sign.window,
        sign_check: sign
            .entries
            .iter()
            .map(|e| SignRecord {
                index: e.index,
                t: e.t,
                distance: e.distance,
                sign: e.sign,
                alignment: e.alignment,
                passed: e.passed,
            })
            .collect(),
        apriori_r_sup: apriori.r_sup,
        apriori_r_h: apriori.r_h,
        seed_ratio_error: ratio,
        hopf: hopf
            .iter()
            .map(|h| HopfRecord { t: h.t, nu: h.nu, t_lambda: h.t_lambda, alignment: h.alignment, passed: h.passed() })
            .collect(),
    };
    let p = run.path("branch.json");
    write_json(&p, &report)?;

    run.verdict(
        "branch reached t_max",
        b.termination == coopbif_core::bifurcation::Termination::ReachedTMax,
        format!("termination {} after {} points", b.termination.name(), b.points.len()),
    );
    run.verdict(
        "every branch point positive",
        b.points[1..].iter().all(|q| q.is_positive()),
        format!("{} nontrivial points", b.points.len() - 1),
    );
    run.verdict(
        "defined sign and alignment near (t₁, 0)",
        sign.all_passed(),
        format!("{} points inside window {}", sign.entries.len(), sign.window),
    );
    run.verdict(
        "a priori bound finite",
        apriori.finite && apriori.within_cap,
        format!("R_sup = {}, R_H = {}", apriori.r_sup, apriori.r_h),
    );
    if let Some(e) = ratio {
        run.verdict(
            "small-amplitude u/v matches α/β within 2%",
            e <= 0.02,
            format!("max relative deviation {e:e}, α/β = {}", z[0] / z[1]),
        );
    }
    if !hopf.is_empty() {
        run.verdict(
            "principal eigenvector of -Δ_h + φ positive along branch",
            hopf.iter().all(|h| h.passed()),
            format!("min alignment {}", hopf.iter().map(|h| h.alignment).fold(1.0, f64::min)),
        );
    }
    kernel_class_verdict(run, &problem);
    Ok(())
}

fn threshold(run: &mut Run) -> Result<(), RunError> {
    let problem = run.problem()?;
    let knobs = run.config.knobs.clone();
    let t1 = problem.t1();
    let opts = ThresholdOptions {
        t_lo: knobs.t_lo.resolve(t1)?,
        t_hi: knobs.t_hi.resolve(t1)?,
        bisect_tol: knobs.bisect_tol,
        newton: knobs.newton(),
    };
    let r = existence_threshold(&problem, &opts).map_err(from_numerics)?;

    let rows: Vec<Vec<String>> =
        r.evaluations.iter().map(|(t, found)| vec![t.to_string(), u8::from(*found).to_string()]).collect();
    let p = run.path("bisection.csv");
    write_csv(&p, &["t", "positive_found"], &rows)?;

    // nonexistence side: random positive starts below t₁
    let t_below = knobs.below_factor * t1;
    let mut below = Vec::new();
    for (k, s) in random_positive_starts(run.config, problem.system().nodes(), knobs.random_starts, 0xb10c)
        .into_iter()
        .enumerate()
    {
        let o = problem.system().newton_solve(t_below, &s, &opts.newton).map_err(from_numerics)?;
        below.push(record(format!("random[{k}]"), &o));
    }
    let all_zero = below.iter().all(|o| o.classification == "zero");

    // audit every positive solution the bisection reached
    let m = problem.system().coupling();
    let mut audits = Vec::new();
    if m.b * m.c > 0.0 {
        let lambda1 = problem.spectrum().lambda1();
        let mut ts: Vec<f64> = r.evaluations.iter().filter(|(_, f)| *f).map(|(t, _)| *t).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        for t in ts {
            if let Some(o) = problem.positive_probe(t, &opts.newton).map_err(from_numerics)? {
                let point = coopbif_core::bifurcation::BranchPoint {
                    t,
                    amplitude: o.state.sup_norm(),
                    h_norm: o.state.h_norm(problem.system().laplacian()),
                    u_positive: true,
                    v_positive: true,
                    state: o.state,
                    residual: o.residual,
                    newton_iterations: o.iterations,
                };
                let a = nonexistence_audit(&point, problem.system(), lambda1).map_err(from_numerics)?;
                audits.push(AuditRecord::from(&a));
            }
        }
    }

    let rel = (r.t_star - t1).abs() / t1;
    #[derive(Serialize)]
    struct ThresholdReport {
        t1: f64,
        t_star: f64,
        bracket: [f64; 2],
        relative_error: f64,
        evaluations: usize,
        below_threshold_positive: bool,
        t_below: f64,
        below_outcomes: Vec<OutcomeRecord>,
        audits: Vec<AuditRecord>,
    }
    let report = ThresholdReport {
        t1,
        t_star: r.t_star,
        bracket: [r.bracket.lo, r.bracket.hi],
        relative_error: rel,
        evaluations: r.evaluations.len(),
        below_threshold_positive: r.below_threshold_positive,
        t_below,
        below_outcomes: below,
        audits,
    };
    let p = run.path("threshold.json");
    write_json(&p, &report)?;

    let pct = knobs.threshold_tolerance * 100.0;
    run.verdict(
        format!("t_star ≈ t₁ within {pct}%"),
        rel <= knobs.threshold_tolerance,
        format!("t_star = {}, t₁ = {t1}, relative error {rel:e}", r.t_star),
    );
    let below_name = format!("{} random starts at {}·t₁ collapse to zero", knobs.random_starts, knobs.below_factor);
    match run.config.mode {
        crate::config::ModeConfig::Tp1 => run.verdict(below_name, all_zero, String::new()),
        crate::config::ModeConfig::Tp2 => {
            run.verdict(below_name, true, format!("informational in TP2 mode; all zero: {all_zero}"))
        }
    }
    if m.b * m.c > 0.0 {
        let ok = !report.audits.is_empty() && report.audits.iter().all(|a| a.certified);
        run.verdict(
            "audit certifies t > λ₁/λ on every positive solution",
            ok,
            format!("{} solutions audited", report.audits.len()),
        );
    }
    kernel_class_verdict(run, &problem);
    Ok(())
}

fn lemma_e(run: &mut Run, system: &coopbif_core::operators::NonlocalSystem) -> Result<(), RunError> {
    let knobs = &run.config.knobs;
    let ds = discrete_spectrum(system.laplacian(), knobs.eigenpairs).map_err(from_numerics)?;
    let r = linear_kernel_scan(system.coupling(), system.laplacian(), &ds, knobs.kernel_threshold)
        .map_err(from_numerics)?;

    #[derive(Serialize)]
    struct Projection {
        index: usize,
        lambda: f64,
        projection: [f64; 2],
        residual: f64,
    }
    #[derive(Serialize)]
    struct KernelVector {
        singular_value: f64,
        dominant_mode: usize,
        single_mode_residual: f64,
        expansion_residual: f64,
        nonnegative: bool,
        semitrivial: bool,
        principal_positive: bool,
        projections: Vec<Projection>,
        vector: Vec<f64>,
    }
    #[derive(Serialize)]
    struct LemmaReport {
        coupling: [f64; 4],
        shared_eigenvalues: Vec<(f64, usize)>,
        predicted_dimension: usize,
        kernel_dimension: usize,
        threshold: f64,
        smallest_singular_values: Vec<f64>,
        vectors: Vec<KernelVector>,
    }
    let m = r.coupling;
    let tail = r.singular_values.len().saturating_sub(6);
    let report = LemmaReport {
        coupling: [m.a, m.b, m.c, m.d],
        shared_eigenvalues: r.shared_eigenvalues.clone(),
        predicted_dimension: r.predicted_dimension,
        kernel_dimension: r.kernel_dimension,
        threshold: r.threshold,
        smallest_singular_values: r.singular_values[tail..].to_vec(),
        vectors: r
            .vectors
            .iter()
            .map(|v| KernelVector {
                singular_value: v.singular_value,
                dominant_mode: v.dominant,
                single_mode_residual: v.single_mode_residual,
                expansion_residual: v.expansion_residual,
                nonnegative: v.nonnegative,
                semitrivial: v.semitrivial,
                principal_positive: v.principal_positive,
                projections: v
                    .projections
                    .iter()
                    .map(|p| Projection {
                        index: p.index,
                        lambda: p.lambda,
                        projection: p.projection,
                        residual: p.residual,
                    })
                    .collect(),
                vector: v.vector.clone(),
            })
            .collect(),
    };
    let p = run.path("lemma_e.json");
    write_json(&p, &report)?;

    run.verdict(
        "kernel dimension equals |σ(A) ∩ σ(-Δ_h)| with multiplicity",
        r.dimension_matches(),
        format!("kernel {}, predicted {}", r.kernel_dimension, r.predicted_dimension),
    );
    run.verdict(
        "projection identity Az_j = λ_j z_j within 1e-8",
        r.max_projection_residual() <= 1e-8,
        format!("max residual {:e}", r.max_projection_residual()),
    );
    let single = r.vectors.iter().map(|v| v.single_mode_residual).fold(0.0, f64::max);
    run.verdict("kernel vectors have the single-mode form φ_j z", single <= 1e-6, format!("max remainder {single:e}"));
    Ok(())
}

fn audit(run: &mut Run) -> Result<(), RunError> {
    let system = run.config.build_system()?;
    let m = system.coupling();
    if !(m.b * m.c > 0.0) {
        return Err(RunError::Refused(Hypothesis::SymmetrizableCoupling));
    }
    let problem = run.problem()?;
    let t1 = problem.t1();
    let opts = continuation_options(run, t1)?;
    let b = continue_branch(&problem, &opts).map_err(from_numerics)?;
    let lambda1 = problem.spectrum().lambda1();
    let reports = b.points[1..]
        .iter()
        .filter(|q| q.is_positive())
        .map(|q| nonexistence_audit(q, problem.system(), lambda1))
        .collect::<Result<Vec<_>, _>>()
        .map_err(from_numerics)?;

    let header = [
        "t",
        "sigma",
        "dirichlet",
        "mass",
        "nonlocal",
        "quadratic",
        "identity_residual",
        "form_slack",
        "poincare_slack",
        "lower_bound",
        "certificate_margin",
        "certified",
    ];
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.t.to_string(),
                r.sigma.to_string(),
                r.dirichlet.to_string(),
                r.mass.to_string(),
                r.nonlocal.to_string(),
                r.quadratic.to_string(),
                r.identity_residual.to_string(),
                r.form_slack.to_string(),
                r.poincare_slack.to_string(),
                r.lower_bound.to_string(),
                r.certificate_margin.to_string(),
                u8::from(r.certified()).to_string(),
            ]
        })
        .collect();
    let p = run.path("audit.csv");
    write_csv(&p, &header, &rows)?;

    #[derive(Serialize)]
    struct AuditSummary {
        t1: f64,
        sigma: f64,
        b_hat: f64,
        symmetrized: [f64; 4],
        mu: f64,
        lambda: f64,
        lambda1: f64,
        termination: &'static str,
        points: Vec<AuditRecord>,
    }
    let first = reports.first();
    let summary = AuditSummary {
        t1,
        sigma: first.map_or(f64::NAN, |r| r.sigma),
        b_hat: first.map_or(f64::NAN, |r| r.b_hat),
        symmetrized: first.map_or([f64::NAN; 4], |r| {
            let a = r.symmetrized;
            [a.a, a.b, a.c, a.d]
        }),
        mu: first.map_or(f64::NAN, |r| r.mu),
        lambda: first.map_or(f64::NAN, |r| r.lambda),
        lambda1,
        termination: b.termination.name(),
        points: reports.iter().map(AuditRecord::from).collect(),
    };
    let p = run.path("audit.json");
    write_json(&p, &summary)?;

    run.verdict(
        "certificate t > λ₁/λ at every positive point",
        !reports.is_empty() && reports.iter().all(|r| r.certified()),
        format!(
            "{} points, min margin {:e}",
            reports.len(),
            reports.iter().map(|r| r.certificate_margin).fold(f64::INFINITY, f64::min)
        ),
    );
    Ok(())
}
