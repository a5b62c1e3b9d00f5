//! Acceptance criteria; run with `cargo test -p coopbif --test acceptance`.
//!
//! Prints one PASS/FAIL line per criterion and exits nonzero if any fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use coopbif::config::{Experiment, ExperimentConfig, TValue};
use coopbif::output::read_branch_csv;
use coopbif::run_experiment;
use coopbif_core::bifurcation::{continue_branch, nonexistence_audit, BifurcationProblem, ContinuationOptions};
use coopbif_core::discretization::assemble_laplacian;
use coopbif_core::spectral::{discrete_spectrum, rayleigh_quotient};
use coopbif_core::StateField;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion = (u8, fn(&Ctx) -> Outcome);

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn config(name: &str, experiment: Experiment) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    let mut c = ExperimentConfig::load(&path).unwrap();
    c.experiment = Some(experiment);
    c
}

struct Ctx {
    root: tempfile::TempDir,
}

impl Ctx {
    fn run(&self, sub: &str, cfg: &ExperimentConfig) -> Result<(PathBuf, coopbif::RunManifest), String> {
        let root = self.root.path().join(sub);
        let m = run_experiment(cfg, Some(&root)).map_err(|e| e.to_string())?;
        Ok((cfg.resolve_output(Some(&root)), m))
    }
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Independent oracle: dense symmetric eigensolve of the 1D finite-difference
/// Laplacian on (0, 1) with `n` interior nodes. Returns `λ₁` and a positive
/// `φ₁`.
fn laplacian_oracle(n: usize) -> (f64, Vec<f64>) {
    let h = 1.0 / (n + 1) as f64;
    let m = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => 2.0 / (h * h),
        1 => -1.0 / (h * h),
        _ => 0.0,
    });
    let eig = m.symmetric_eigen();
    let k = eig.eigenvalues.imin();
    let mut phi: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    if phi.iter().sum::<f64>() < 0.0 {
        phi.iter_mut().for_each(|x| *x = -*x);
    }
    (eig.eigenvalues[k], phi)
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// `(u, v)` columns of `solution.csv`, flattened as `(u, v)`.
fn solution(dir: &Path) -> (Vec<f64>, Vec<f64>) {
    let mut r = csv::Reader::from_path(dir.join("solution.csv")).unwrap();
    let (mut u, mut v) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec.unwrap();
        let k = rec.len();
        u.push(rec[k - 2].parse().unwrap());
        v.push(rec[k - 1].parse().unwrap());
    }
    (u, v)
}

fn threshold_at(ctx: &Ctx, name: &str, n: usize) -> Result<(f64, f64, Value), String> {
    let (lambda1, _) = laplacian_oracle(n);
    let predicted = lambda1 / 3.0;
    let (dir, _) = ctx.run(&format!("threshold-{n}"), &config(name, Experiment::Threshold))?;
    let report = json(&dir.join("threshold.json"));
    Ok((report["t_star"].as_f64().unwrap(), predicted, report))
}

fn direction_at(ctx: &Ctx, name: &str, n: usize) -> Result<(f64, bool), String> {
    let mut cfg = config(name, Experiment::Solve);
    cfg.knobs.t = Some(TValue::Text("1.01t1".into()));
    let (dir, _) = ctx.run(&format!("solve-{n}"), &cfg)?;
    let sel = &json(&dir.join("solve.json"))["selected"];
    check(sel["classification"] == "positive", format!("n = {n}: selected solution is {}", sel["classification"]))?;
    let (u, v) = solution(&dir);
    let (_, phi) = laplacian_oracle(n);
    let stacked: Vec<f64> = u.iter().chain(&v).copied().collect();
    let reference: Vec<f64> = phi.iter().chain(&phi).copied().collect();
    let positive = u.iter().chain(&v).all(|&x| x > 0.0);
    Ok((cosine(&stacked, &reference), positive))
}

fn criterion_1(ctx: &Ctx) -> Outcome {
    let start = Instant::now();
    let (t_star, predicted, _) = threshold_at(ctx, "tp1.json", 127)?;
    let secs = start.elapsed().as_secs_f64();
    let rel = (t_star - predicted).abs() / predicted;
    check(rel <= 0.01, format!("t_star = {t_star}, λ₁_h/3 = {predicted}, relative error {rel:e}"))?;
    check(secs < 60.0, format!("took {secs:.1} s"))?;
    Ok(format!("t_star = {t_star:.6}, λ₁_h/3 = {predicted:.6}, rel err {rel:.2e}, {secs:.1} s"))
}

fn criterion_2(ctx: &Ctx) -> Outcome {
    let (_, _, report) = threshold_at(ctx, "tp1.json", 127)?;
    let below = report["below_outcomes"].as_array().unwrap();
    check(below.len() == 20, format!("{} starts", below.len()))?;
    let nonzero = below.iter().filter(|o| o["classification"] != "zero").count();
    check(nonzero == 0, format!("{nonzero} of 20 starts at 0.9·t₁ did not collapse to zero"))?;

    let (lambda1, _) = laplacian_oracle(127);
    let mut audited = 0;
    let mut min_margin = f64::INFINITY;
    let cfg = config("tp1.json", Experiment::Audit);
    let problem = BifurcationProblem::new(cfg.build_system().map_err(|e| e.to_string())?, cfg.mode.into(), 3)
        .map_err(|e| e.to_string())?;
    for a in report["audits"].as_array().unwrap() {
        check(a["certified"] == true, format!("audit at t = {} not certified", a["t"]))?;
        audited += 1;
    }
    let t1 = problem.t1();
    let branch = continue_branch(&problem, &ContinuationOptions::to(2.0 * t1)).map_err(|e| e.to_string())?;
    for p in &branch.points[1..] {
        let a = nonexistence_audit(p, problem.system(), lambda1).map_err(|e| e.to_string())?;
        let slack = p.t - lambda1 / a.lambda;
        check(a.certified() && slack > 0.0, format!("audit at t = {} fails, slack {slack:e}", p.t))?;
        min_margin = min_margin.min(slack);
        audited += 1;
    }
    Ok(format!("20/20 zero at 0.9·t₁; {audited} positive solutions certified, min slack {min_margin:.3e}"))
}

fn criterion_3(ctx: &Ctx) -> Outcome {
    let (cos, positive) = direction_at(ctx, "tp1.json", 127)?;
    check(cos >= 0.99, format!("cosine {cos}"))?;
    check(positive, "solution not strictly positive")?;
    Ok(format!("cosine {cos:.12}, strictly positive"))
}

fn criterion_4(ctx: &Ctx) -> Outcome {
    let cfg = config("tp2.json", Experiment::Branch);
    let (dir, m) = ctx.run("tp2", &cfg)?;
    let t1 = m.spectral.t1.ok_or("no t₁")?;
    let rows = read_branch_csv(&dir.join("branch.csv")).map_err(|e| e.to_string())?;
    let last = rows.last().unwrap().t;
    check(rows.len() > 2 && (last - 2.0 * t1).abs() <= 1e-12 * t1, format!("branch ends at t = {last}"))?;
    check(rows[1..].iter().all(|r| r.t > t1 && r.min_u > 0.0 && r.min_v > 0.0), "non-positive point")?;

    // z from the characteristic polynomial of A = (1 2; 3 2)
    let (a, b, c, d): (f64, f64, f64, f64) = (1.0, 2.0, 3.0, 2.0);
    let (tr, det) = (a + d, a * d - b * c);
    let lambda = 0.5 * (tr + (tr * tr - 4.0 * det).sqrt());
    let expected = b / (lambda - a);
    let problem = BifurcationProblem::new(cfg.build_system().map_err(|e| e.to_string())?, cfg.mode.into(), 3)
        .map_err(|e| e.to_string())?;
    let branch = continue_branch(&problem, &ContinuationOptions::to(2.0 * t1)).map_err(|e| e.to_string())?;
    let p = &branch.points[1];
    let dev = p.state.u.iter().zip(&p.state.v).map(|(u, v)| (u / v - expected).abs() / expected).fold(0.0, f64::max);
    check(dev <= 0.02, format!("u/v deviates from {expected} by {dev:e}"))?;
    Ok(format!("{} points on (t₁, 2t₁], all positive; u/v = {expected:.6} within {dev:.1e}", rows.len() - 1))
}

fn criterion_5(ctx: &Ctx) -> Outcome {
    let mut dims = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, want) in [("lemma_e_zero.json", 0), ("lemma_e_one.json", 1), ("lemma_e_two.json", 2)] {
        let (dir, _) = ctx.run("lemma-e", &config(name, Experiment::LemmaE))?;
        let r = json(&dir.join("lemma_e.json"));
        let dim = r["kernel_dimension"].as_u64().unwrap();
        check(dim == want, format!("{name}: kernel dimension {dim}, expected {want}"))?;
        dims.push(dim);
        for v in r["vectors"].as_array().unwrap() {
            for p in v["projections"].as_array().unwrap() {
                worst = worst.max(p["residual"].as_f64().unwrap());
            }
        }
    }
    check(worst <= 1e-8, format!("projection residual {worst:e}"))?;
    Ok(format!("dimensions {dims:?}, max projection residual {worst:.1e}"))
}

fn random_field(rng: &mut ChaCha8Rng, n: usize, signed: bool) -> StateField {
    let mut f = || {
        (0..n)
            .map(|_| if signed { rng.random_range(-1.0..1.0) } else { rng.random_range(0.0..1.0) })
            .collect::<Vec<f64>>()
    };
    let u = f();
    StateField { u, v: f() }
}

fn criterion_6(_: &Ctx) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cfg = config("tp1.json", Experiment::Solve);
    let system = cfg.build_system().map_err(|e| e.to_string())?;
    let n = system.nodes();
    let term = &system.terms().f;
    let rel = |a: &[f64], b: &[f64]| {
        let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
    };

    let mut homog: f64 = 0.0;
    for _ in 0..50 {
        let u = random_field(&mut rng, n, true);
        let base = term.eval_phi(&u).map_err(|e| e.to_string())?;
        for p in [0.5f64, 2.0, 10.0] {
            let scaled: Vec<f64> = base.iter().map(|x| x * p.powf(term.gamma())).collect();
            homog = homog.max(rel(&term.eval_phi(&u.scaled(p)).map_err(|e| e.to_string())?, &scaled));
        }
    }
    check(homog <= 1e-12, format!("homogeneity error {homog:e}"))?;

    let measure = system.grid().domain_measure();
    for _ in 0..50 {
        let u = random_field(&mut rng, n, true).scaled(rng.random_range(0.1..10.0));
        let phi = term.eval_phi(&u).map_err(|e| e.to_string())?;
        let fmax = u.u.iter().zip(&u.v).map(|(a, b)| a.abs() + b.abs()).fold(0.0, f64::max);
        let bound = term.kernel_sup() * measure * fmax;
        let worst = phi.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        check(worst <= bound * (1.0 + 1e-12), format!("sup bound violated: {worst} > {bound}"))?;
    }

    let mut lin: f64 = 0.0;
    for _ in 0..20 {
        let (x, y) = (random_field(&mut rng, n, true), random_field(&mut rng, n, true));
        let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let lhs = system.apply_s(&x.scaled(a).add(&y.scaled(b))).map_err(|e| e.to_string())?;
        let sx = system.apply_s(&x).map_err(|e| e.to_string())?;
        let sy = system.apply_s(&y).map_err(|e| e.to_string())?;
        lin = lin.max(rel(&lhs.to_flat(), &sx.scaled(a).add(&sy.scaled(b)).to_flat()));
    }
    check(lin <= 1e-11, format!("S linearity error {lin:e}"))?;

    let u = random_field(&mut rng, n, false);
    let ratio = |eps: f64| -> Result<f64, String> {
        let g = system.apply_g(&u.scaled(eps)).map_err(|e| e.to_string())?;
        Ok(g.sup_norm_max() / (eps * u.sup_norm_max()))
    };
    let rs = [ratio(1e-1)?, ratio(1e-2)?, ratio(1e-3)?];
    let orders: Vec<f64> = rs.windows(2).map(|w| (w[0] / w[1]).log10()).collect();
    let gamma = term.gamma();
    check(orders.iter().all(|&o| o >= gamma - 1e-9), format!("G orders {orders:?} < γ = {gamma}"))?;

    let mut odd: f64 = 0.0;
    for _ in 0..20 {
        let u = random_field(&mut rng, n, true);
        let t = rng.random_range(0.0..10.0);
        let r = system.residual(t, &u).map_err(|e| e.to_string())?;
        let rm = system.residual(t, &u.scaled(-1.0)).map_err(|e| e.to_string())?;
        odd = odd.max(rel(&rm.scaled(-1.0).to_flat(), &r.to_flat()));
    }
    check(odd <= 1e-12, format!("odd symmetry error {odd:e}"))?;

    // Rayleigh characterization of λ₁ for -Δ_h + ψ, ψ a nonlocal coefficient
    let lap = assemble_laplacian(system.grid());
    let psi = term.eval_phi(&random_field(&mut rng, n, false).scaled(20.0)).map_err(|e| e.to_string())?;
    let op = lap.with_potential(&psi).map_err(|e| e.to_string())?;
    let spectrum = discrete_spectrum(&op, 1).map_err(|e| e.to_string())?;
    let lambda1 = spectrum.lambda1();
    let phi1 = spectrum.phi1().to_vec();
    let scale = phi1.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut min_q = f64::INFINITY;
    for k in 0..1000 {
        // half the fields are perturbations of the minimizer
        let delta = if k % 2 == 0 { 10f64.powf(rng.random_range(-4.0..0.0)) * scale } else { f64::INFINITY };
        let f: Vec<f64> = if delta.is_finite() {
            phi1.iter().map(|x| x + delta * rng.random_range(-1.0..1.0)).collect()
        } else {
            (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
        };
        min_q = min_q.min(rayleigh_quotient(&op, &f).map_err(|e| e.to_string())?);
    }
    check(min_q >= lambda1 - 1e-10, format!("Rayleigh quotient {min_q} below λ₁ = {lambda1}"))?;

    // symmetric-form bounds on A₀ of a non-symmetric cooperative matrix
    let tp2 = config("tp2.json", Experiment::Branch);
    let problem = BifurcationProblem::new(tp2.build_system().map_err(|e| e.to_string())?, tp2.mode.into(), 3)
        .map_err(|e| e.to_string())?;
    let branch = continue_branch(&problem, &ContinuationOptions::to(1.2 * problem.t1())).map_err(|e| e.to_string())?;
    let audit = nonexistence_audit(&branch.points[1], problem.system(), problem.spectrum().lambda1())
        .map_err(|e| e.to_string())?;
    let a0 = audit.symmetrized;
    check((a0.b - a0.c).abs() <= 1e-15, "A₀ not symmetric")?;
    for _ in 0..1000 {
        let z = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let q = a0.a * z[0] * z[0] + (a0.b + a0.c) * z[0] * z[1] + a0.d * z[1] * z[1];
        let zz = z[0] * z[0] + z[1] * z[1];
        let tol = 1e-12 * zz * audit.lambda.abs();
        check(
            audit.mu * zz <= q + tol && q <= audit.lambda * zz + tol,
            format!("⟨A₀z,z⟩ = {q} outside bounds for z = {z:?}"),
        )?;
    }

    Ok(format!(
        "homogeneity {homog:.1e}, S linearity {lin:.1e}, G orders {:.3}/{:.3}, odd {odd:.1e}, min Rayleigh − λ₁ = {:.2e}",
        orders[0],
        orders[1],
        min_q - lambda1
    ))
}

fn criterion_7(ctx: &Ctx) -> Outcome {
    let (fine, _, _) = threshold_at(ctx, "tp1.json", 127)?;
    let (coarse, _, _) = threshold_at(ctx, "tp1_coarse.json", 63)?;
    let rel = (fine - coarse).abs() / fine;
    check(rel <= 0.03, format!("thresholds {fine} (n=127) and {coarse} (n=63) differ by {rel:e}"))?;
    let (cos, positive) = direction_at(ctx, "tp1_coarse.json", 63)?;
    check(cos >= 0.98 && positive, format!("n = 63 cosine {cos}, positive {positive}"))?;
    Ok(format!("threshold rel diff {rel:.2e}, n = 63 cosine {cos:.12}"))
}

fn criterion_8(ctx: &Ctx) -> Outcome {
    let mut compared = 0;
    for exp in [Experiment::Threshold, Experiment::Branch] {
        let cfg = config("tp1.json", exp);
        let (a, _) = ctx.run("det-a", &cfg)?;
        let (b, _) = ctx.run("det-b", &cfg)?;
        for entry in std::fs::read_dir(&a).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "csv") {
                let name = path.file_name().unwrap();
                let (x, y) = (std::fs::read(&path).unwrap(), std::fs::read(b.join(name)).unwrap());
                check(x == y, format!("{} differs between runs", name.to_string_lossy()))?;
                compared += 1;
            }
        }
    }
    check(compared >= 2, "no CSV artifacts compared")?;
    Ok(format!("{compared} CSV artifacts byte-identical"))
}

fn main() -> ExitCode {
    let ctx = Ctx { root: tempfile::tempdir().unwrap() };
    let criteria: [Criterion; 8] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
    ];
    let mut failed = 0;
    for (k, f) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| f(&ctx)))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {k}: PASS ({secs:.1} s) {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {k}: FAIL ({secs:.1} s) {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
