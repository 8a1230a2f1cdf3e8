//! CSV series, SVG snapshots and shape files.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::curve::{summarize, HalfPlane, PlanarCurve};
use crate::diagnostics::DiagRecord;
use crate::elastica::EnergyRow;
use crate::error::{Error, Result};

pub const SERIES_HEADER: &str = "step,t,dt,L,B,TC,lambda,min_y,max_y,halfplane,velocity_norm";

/// `{:.16e}` prints 17 significant digits, enough to round-trip any f64.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per accepted step; the initial record (step 0) is skipped.
pub fn series_csv(records: &[DiagRecord]) -> String {
    let mut out = String::with_capacity(200 * records.len());
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for r in records.iter().filter(|r| r.step > 0) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.step,
            num(r.t),
            num(r.dt),
            num(r.length),
            num(r.bending_energy),
            num(r.total_curvature),
            num(r.lambda),
            num(r.min_interior_y),
            num(r.max_interior_y),
            r.halfplane.as_str(),
            num(r.velocity_norm)
        );
    }
    out
}

pub fn emit_series(records: &[DiagRecord], path: &Path) -> Result<()> {
    std::fs::write(path, series_csv(records))?;
    Ok(())
}

/// A parsed series row: the numeric columns in header order, with the
/// half-plane label in its own field.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub step: usize,
    pub values: [f64; 8],
    pub halfplane: HalfPlane,
    pub velocity_norm: f64,
}

pub fn parse_series(text: &str) -> Result<Vec<SeriesRow>> {
    let bad = |line: usize, m: &str| Error::InvalidArgument(format!("series line {line}: {m}"));
    let mut lines = text.lines();
    if lines.next() != Some(SERIES_HEADER) {
        return Err(bad(1, "unexpected header"));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 11 {
                return Err(bad(i + 2, "expected 11 columns"));
            }
            let f = |j: usize| {
                cols[j]
                    .parse::<f64>()
                    .map_err(|e| bad(i + 2, &e.to_string()))
            };
            let mut values = [0.0; 8];
            for (j, v) in values.iter_mut().enumerate() {
                *v = f(j + 1)?;
            }
            Ok(SeriesRow {
                step: cols[0].parse().map_err(|_| bad(i + 2, "bad step"))?,
                values,
                halfplane: cols[9].parse().map_err(|_| bad(i + 2, "bad half-plane"))?,
                velocity_norm: f(10)?,
            })
        })
        .collect()
}

/// Standalone SVG of `curve` with the axis, endpoint markers and a title.
/// `rescale_y` stretches only the displayed y-coordinates.
pub fn snapshot_svg(curve: &PlanarCurve, t: f64, rescale_y: Option<f64>) -> String {
    let sy = rescale_y.unwrap_or(1.0);
    let s = summarize(curve);
    let pts: Vec<(f64, f64)> = curve.vertices().iter().map(|p| (p.x, p.y * sy)).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, 0.0f64);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let pad = 0.08 * span;
    let (width, height) = (x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
    let px = 800.0 / width;
    let title_h = 40.0;
    let (w, h) = (800.0, height * px + title_h);
    let map = |x: f64, y: f64| ((x - x0 + pad) * px, title_h + (y1 + pad - y) * px);

    let mut d = String::new();
    for (i, &(x, y)) in pts.iter().enumerate() {
        let (u, v) = map(x, y);
        let _ = write!(d, "{}{u:.3} {v:.3}", if i == 0 { "M" } else { " L" });
    }
    let (ax0, ay) = map(x0 - pad, 0.0);
    let (ax1, _) = map(x1 + pad, 0.0);
    let scale_note = match rescale_y {
        Some(k) => format!(", y scaled by {k}"),
        None => String::new(),
    };
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.3} {h:.3}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="10" y="25" font-family="monospace" font-size="14">t = {t:.6e}, L = {:.6}, B = {:.6}, TC = {:.6}{scale_note}</text>"#,
        s.length, s.bending_energy, s.total_curvature
    );
    let _ = writeln!(
        out,
        r##"<line x1="{ax0:.3}" y1="{ay:.3}" x2="{ax1:.3}" y2="{ay:.3}" stroke="#999" stroke-width="1"/>"##
    );
    let _ = writeln!(
        out,
        r##"<path d="{d}" fill="none" stroke="#1f4e9c" stroke-width="1.5"/>"##
    );
    for &(x, y) in [pts[0], pts[pts.len() - 1]].iter() {
        let (u, v) = map(x, y);
        let _ = writeln!(
            out,
            r##"<circle cx="{u:.3}" cy="{v:.3}" r="4" fill="#c0392b"/>"##
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn emit_snapshot(
    curve: &PlanarCurve,
    t: f64,
    path: &Path,
    rescale_y: Option<f64>,
) -> Result<()> {
    std::fs::write(path, snapshot_svg(curve, t, rescale_y))?;
    Ok(())
}

/// File name of the snapshot at time `t`.
pub fn snapshot_name(t: f64) -> String {
    format!("snap_t{t}.svg")
}

pub fn write_shape_csv(curve: &PlanarCurve, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "x,y")?;
    for p in curve.vertices() {
        writeln!(f, "{},{}", num(p.x), num(p.y))?;
    }
    f.flush()?;
    Ok(())
}

pub fn energy_table_csv(rows: &[EnergyRow], varpi: f64) -> String {
    let mut out = String::from("r,b_arc,b_loop,four_b_arc,varpi,two_varpi,arc_below_loop,loop_below_2varpi,fourfold_arc_above_loop\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            num(r.r),
            num(r.b_arc),
            num(r.b_loop),
            num(r.four_b_arc),
            num(varpi),
            num(r.two_varpi),
            r.arc_below_loop,
            r.loop_below_2varpi,
            r.fourfold_arc_above_loop
        );
    }
    out
}
