//! CSV tables and the hand-rolled SVG branch diagram.

use std::fmt::Write as _;
use std::path::Path;

use coopbif_core::bifurcation::Branch;

use crate::error::RunError;

pub const BRANCH_HEADER: [&str; 7] = ["t", "amp_sup", "amp_h1", "min_u", "min_v", "residual", "newton_iters"];

/// One parsed row of `branch.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchRow {
    pub t: f64,
    pub amp_sup: f64,
    pub amp_h1: f64,
    pub min_u: f64,
    pub min_v: f64,
    pub residual: f64,
    pub newton_iters: usize,
}

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> RunError + '_ {
    move |e| RunError::Io { path: path.to_path_buf(), source: std::io::Error::other(e) }
}

/// Writes `rows` under `header`; floats use the shortest representation
/// that reads back to the same value.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error(path))?;
    w.write_record(header).map_err(csv_error(path))?;
    for r in rows {
        w.write_record(r).map_err(csv_error(path))?;
    }
    w.flush().map_err(RunError::io(path))
}

pub fn emit_branch_csv(branch: &Branch, path: &Path) -> Result<(), RunError> {
    let rows: Vec<Vec<String>> = branch
        .points
        .iter()
        .map(|p| {
            vec![
                p.t.to_string(),
                p.amplitude.to_string(),
                p.h_norm.to_string(),
                p.state.min_u().to_string(),
                p.state.min_v().to_string(),
                p.residual.to_string(),
                p.newton_iterations.to_string(),
            ]
        })
        .collect();
    write_csv(path, &BRANCH_HEADER, &rows)
}

pub fn read_branch_csv(path: &Path) -> Result<Vec<BranchRow>, RunError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error(path))?;
    let header: Vec<String> = r.headers().map_err(csv_error(path))?.iter().map(String::from).collect();
    if header != BRANCH_HEADER {
        return Err(RunError::Config(format!("{}: unexpected header {header:?}", path.display())));
    }
    let bad = |e: String| RunError::Config(format!("{}: {e}", path.display()));
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error(path))?;
        let f = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(e.to_string()));
        out.push(BranchRow {
            t: f(0)?,
            amp_sup: f(1)?,
            amp_h1: f(2)?,
            min_u: f(3)?,
            min_v: f(4)?,
            residual: f(5)?,
            newton_iters: rec[6].parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
        });
    }
    Ok(out)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;

fn nice_range(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let pad = 0.5 * lo.abs().max(1.0);
        (lo - pad, hi + pad)
    }
}

/// Amplitude-versus-`t` diagram with a dashed marker at `t₁`.
pub fn render_branch_svg(branch: &Branch, t1: f64) -> String {
    let ts = branch.points.iter().map(|p| p.t).chain([t1]);
    let (t_lo, t_hi) = nice_range(ts.clone().fold(f64::INFINITY, f64::min), ts.fold(f64::NEG_INFINITY, f64::max));
    let amp_max = branch.points.iter().map(|p| p.amplitude).fold(0.0, f64::max);
    let (a_lo, a_hi) = (0.0, if amp_max > 0.0 { 1.05 * amp_max } else { 1.0 });
    let x = |t: f64| LEFT + (t - t_lo) / (t_hi - t_lo) * (WIDTH - LEFT - RIGHT);
    let y = |a: f64| HEIGHT - BOTTOM - (a - a_lo) / (a_hi - a_lo) * (HEIGHT - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(s, r#"<g id="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>"#);
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g id="ticks" text-anchor="middle">"#);
    for k in 0..=4 {
        let t = t_lo + (t_hi - t_lo) * k as f64 / 4.0;
        let a = a_lo + (a_hi - a_lo) * k as f64 / 4.0;
        let (xt, ya) = (x(t), y(a));
        let _ = writeln!(s, r#"<line x1="{xt:.2}" y1="{y0}" x2="{xt:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(s, r#"<text x="{xt:.2}" y="{:.2}">{t:.3}</text>"#, y0 + 19.0);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{ya:.2}" x2="{x0}" y2="{ya:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{a:.3}</text>"#, x0 - 8.0, ya + 4.0);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text id="x-label" x="{:.2}" y="{:.2}" text-anchor="middle">t</text>"#,
        0.5 * (x0 + x1),
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text id="y-label" x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">amplitude ‖u‖∞ + ‖v‖∞</text>"#,
        0.5 * (y0 + y1),
        0.5 * (y0 + y1)
    );
    let xt1 = x(t1);
    let _ = writeln!(
        s,
        r#"<line id="t1-marker" x1="{xt1:.2}" y1="{y0}" x2="{xt1:.2}" y2="{y1}" stroke="firebrick" stroke-dasharray="6 4"/>"#
    );
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" fill="firebrick">t₁ = {t1:.5}</text>"#, xt1 + 4.0, y1 + 12.0);
    let points: Vec<String> = branch.points.iter().map(|p| format!("{:.2},{:.2}", x(p.t), y(p.amplitude))).collect();
    let _ = writeln!(
        s,
        r#"<polyline id="branch" fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#,
        points.join(" ")
    );
    let _ = writeln!(s, r#"<g id="points" fill="steelblue">"#);
    for p in &branch.points {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5"/>"#, x(p.t), y(p.amplitude));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}

pub fn emit_bifurcation_svg(branch: &Branch, t1: f64, path: &Path) -> Result<(), RunError> {
    std::fs::write(path, render_branch_svg(branch, t1)).map_err(RunError::io(path))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(RunError::io(path))
}
