//! Initial curves: the two Fourier families and the well-prepared loop.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::curve::{
    compute_fields, end_curvature, halfplane_status, resample_uniform, summarize, HalfPlane,
    PlanarCurve, Vec2,
};
use crate::elastica::{ElasticaShape, ShapeKind, Side};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FourierFamily {
    /// `(a sin pi x + b sin 2 pi x + c sin 3 pi x + x, d sin pi x)`
    Asymmetric,
    /// `(x - sin(2 pi x)/(2 pi) + a(-2 sin 2 pi x + sin 4 pi x), b sin pi x + c sin 3 pi x + d sin 5 pi x)`
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierSpec {
    pub family: FourierFamily,
    /// Ignored for the asymmetric family, where `a = 2b - 3c + 1/pi`.
    #[serde(default)]
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub vertex_count: usize,
}

impl FourierSpec {
    pub fn asymmetric(b: f64, c: f64, d: f64, vertex_count: usize) -> Self {
        Self {
            family: FourierFamily::Asymmetric,
            a: 2.0 * b - 3.0 * c + 1.0 / PI,
            b,
            c,
            d,
            vertex_count,
        }
    }

    pub fn symmetric(a: f64, b: f64, c: f64, d: f64, vertex_count: usize) -> Self {
        Self {
            family: FourierFamily::Symmetric,
            a,
            b,
            c,
            d,
            vertex_count,
        }
    }

    /// Long asymmetric datum (`L ~ 2.729`).
    pub fn example_3_1(vertex_count: usize) -> Self {
        Self::asymmetric(1.0 / PI, 0.4 / PI, 1.0, vertex_count)
    }

    /// Short asymmetric datum (`L ~ 1.117`).
    pub fn example_3_2(vertex_count: usize) -> Self {
        Self::asymmetric(0.6 / PI, 0.2 / PI, 0.1, vertex_count)
    }

    /// Symmetric datum (`L ~ 2.725`).
    pub fn example_3_3(vertex_count: usize) -> Self {
        Self::symmetric(0.15, 0.3, 0.2, 0.05, vertex_count)
    }

    /// The first coefficient after applying the family's closure.
    pub fn effective_a(&self) -> f64 {
        match self.family {
            FourierFamily::Asymmetric => 2.0 * self.b - 3.0 * self.c + 1.0 / PI,
            FourierFamily::Symmetric => self.a,
        }
    }

    pub fn point(&self, x: f64) -> Vec2 {
        let s = |k: f64| (k * PI * x).sin();
        let a = self.effective_a();
        match self.family {
            FourierFamily::Asymmetric => Vec2::new(
                a * s(1.0) + self.b * s(2.0) + self.c * s(3.0) + x,
                self.d * s(1.0),
            ),
            FourierFamily::Symmetric => Vec2::new(
                x - s(2.0) / (2.0 * PI) + a * (-2.0 * s(2.0) + s(4.0)),
                self.b * s(1.0) + self.c * s(3.0) + self.d * s(5.0),
            ),
        }
    }
}

/// Samples the closed form at `N + 1` equally spaced parameters. The
/// endpoints are exactly `(0, 0)` and `(1, 0)`.
pub fn fourier_initial(spec: &FourierSpec) -> Result<PlanarCurve> {
    let n = spec.vertex_count;
    let mut pts: Vec<Vec2> = (0..=n).map(|i| spec.point(i as f64 / n as f64)).collect();
    pts[0] = Vec2::ZERO;
    pts[n] = Vec2::new(1.0, 0.0);
    PlanarCurve::new(pts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatibilityReport {
    pub endpoints_ok: bool,
    pub start_error: f64,
    pub end_error: f64,
    pub end_curvature: f64,
    pub end_curvature_tol: f64,
    pub end_curvature_ok: bool,
    pub min_segment: f64,
    pub immersed: bool,
}

impl CompatibilityReport {
    pub fn all_ok(&self) -> bool {
        self.endpoints_ok && self.end_curvature_ok && self.immersed
    }
}

/// Checks the pinned-end and zero-curvature conditions. The default
/// curvature tolerance is `1e-3 * max |k|`.
pub fn validate_compatibility(
    curve: &PlanarCurve,
    ell: f64,
    tol: Option<f64>,
) -> CompatibilityReport {
    let start_error = curve.start().norm();
    let end_error = (curve.end() - Vec2::new(ell, 0.0)).norm();
    let (k0, k1) = end_curvature(curve);
    let kmax = compute_fields(curve)
        .signed_curvature
        .iter()
        .fold(0.0f64, |m, k| m.max(k.abs()));
    let end_curvature_tol = tol.unwrap_or(1e-3 * kmax);
    let end_curvature = k0.abs().max(k1.abs());
    let min_segment = curve
        .segment_lengths()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    CompatibilityReport {
        endpoints_ok: start_error <= 1e-12 && end_error <= 1e-12,
        start_error,
        end_error,
        end_curvature,
        end_curvature_tol,
        end_curvature_ok: end_curvature <= end_curvature_tol,
        min_segment,
        immersed: min_segment > 0.0,
    }
}

/// C^2 cut-off: one on `[-1, 1]`, zero outside `(-2, 2)`.
fn cutoff(x: f64) -> f64 {
    let t = x.abs() - 1.0;
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

/// Flags of the well-prepared loop datum, plus the parameters that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WellPreparedReport {
    pub ratio: f64,
    pub trim_index: u32,
    /// Flat half-width at the endpoints.
    pub delta_end: f64,
    /// Flat half-width at the crossing.
    pub delta_cross: f64,
    pub sigma: f64,
    pub end_curvature: f64,
    pub end_curvature_ok: bool,
    pub start_angle: f64,
    pub end_angle: f64,
    pub strictly_upper_ok: bool,
    pub bending_energy: f64,
    pub loop_energy: f64,
    pub energy_ok: bool,
    pub total_curvature: f64,
    pub total_curvature_ok: bool,
    pub length: f64,
}

impl WellPreparedReport {
    pub fn all_ok(&self) -> bool {
        self.end_curvature_ok && self.strictly_upper_ok && self.energy_ok && self.total_curvature_ok
    }
}

const DENSE: usize = 16_000;
const TRIM_INDICES: [u32; 8] = [16, 24, 32, 48, 64, 96, 128, 256];
/// `(end, crossing)` flat widths as fractions of the smallest gap, tried in order.
const DELTA_FRACTIONS: [(f64, f64); 9] = [
    (0.4, 0.05),
    (0.4, 0.02),
    (0.4, 0.01),
    (0.3, 0.05),
    (0.3, 0.02),
    (0.3, 0.01),
    (0.2, 0.05),
    (0.2, 0.02),
    (0.2, 0.01),
];

/// Trimmed loop with cut-offs at the ends and the crossing, loop part
/// unscaled. Points are in the final frame; `a` and `b` index the crossing.
struct Flattened {
    pts: Vec<Vec2>,
    a: usize,
    b: usize,
    delta_end: f64,
    delta_cross: f64,
}

fn trimmed_loop(shape: &ElasticaShape, j: u32) -> Result<(Vec<f64>, Vec<Vec2>, Vec<Vec2>)> {
    let len = shape.total_length;
    let chord = shape.chord;
    let end_s = len * (1.0 - 1.0 / j as f64);
    // profile point at arclength s from the origin of the odd extension
    let at = |s: f64, pieces: usize| {
        *shape
            .profile_positions(
                &(0..=pieces)
                    .map(|i| s * i as f64 / pieces as f64)
                    .collect::<Vec<_>>(),
            )
            .last()
            .unwrap()
    };
    let end = at(end_s, DENSE);
    let start_at = |c: f64| at(-c, 256);
    let gap = |c: f64| (end - start_at(c)).norm() - chord;
    let (mut lo, mut hi) = (0.0, len / j as f64);
    if !(gap(lo) < 0.0 && gap(hi) > 0.0) {
        return Err(Error::ConstructionFailure {
            reason: format!("no chord-fitting trim for j = {j}"),
            deficit: f64::NAN,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * len {
            break;
        }
    }
    let c = 0.5 * (lo + hi);
    let s: Vec<f64> = (0..=DENSE)
        .map(|i| -c + (end_s + c) * i as f64 / DENSE as f64)
        .collect();
    let raw = shape.profile_positions(&s);
    let chord_vec = raw[DENSE] - raw[0];
    let angle = -chord_vec.y.atan2(chord_vec.x);
    let mut pts: Vec<Vec2> = raw.iter().map(|&p| (p - raw[0]).rotate(angle)).collect();
    pts[0] = Vec2::ZERO;
    pts[DENSE] = Vec2::new(chord, 0.0);
    let tangents: Vec<Vec2> = s
        .iter()
        .map(|&si| shape.profile_tangent(si).rotate(angle))
        .collect();
    let param: Vec<f64> = s.iter().map(|&si| si + c).collect();
    Ok((param, pts, tangents))
}

type Crossing = (usize, f64, usize, f64, Vec2);

/// The single transversal crossing of a dense polyline as
/// `(segment a, t_a, segment b, t_b, point)`, or `None` unless exactly one.
fn crossing(pts: &[Vec2]) -> Option<Crossing> {
    const CHUNK: usize = 64;
    let n = pts.len() - 1;
    let boxes: Vec<(Vec2, Vec2)> = (0..n)
        .step_by(CHUNK)
        .map(|i0| {
            pts[i0..=(i0 + CHUNK).min(n)]
                .iter()
                .fold((pts[i0], pts[i0]), |(lo, hi), p| {
                    (
                        Vec2::new(lo.x.min(p.x), lo.y.min(p.y)),
                        Vec2::new(hi.x.max(p.x), hi.y.max(p.y)),
                    )
                })
        })
        .collect();
    let overlap = |a: &(Vec2, Vec2), b: &(Vec2, Vec2)| {
        a.0.x <= b.1.x && b.0.x <= a.1.x && a.0.y <= b.1.y && b.0.y <= a.1.y
    };
    let mut found = None;
    for (ci, bi) in boxes.iter().enumerate() {
        for (cj, bj) in boxes.iter().enumerate().skip(ci) {
            if !overlap(bi, bj) {
                continue;
            }
            for i in ci * CHUNK..((ci + 1) * CHUNK).min(n) {
                let (p, r) = (pts[i], pts[i + 1] - pts[i]);
                for k in (cj * CHUNK).max(i + 2)..((cj + 1) * CHUNK).min(n) {
                    let (q, s) = (pts[k], pts[k + 1] - pts[k]);
                    let den = r.cross(s);
                    if den == 0.0 {
                        continue;
                    }
                    let t = (q - p).cross(s) / den;
                    let u = (q - p).cross(r) / den;
                    if (0.0..1.0).contains(&t) && (0.0..1.0).contains(&u) {
                        if found.is_some() {
                            return None;
                        }
                        found = Some((i, t, k, u, p + t * r));
                    }
                }
            }
        }
    }
    found
}

/// Blends towards tangent lines near the four special points. `fractions`
/// scale the smallest gap between them; their sum stays below one half so
/// the supports are disjoint.
fn flatten(
    param: &[f64],
    pts: &[Vec2],
    tangents: &[Vec2],
    at: Crossing,
    fractions: (f64, f64),
) -> Flattened {
    let (ia, ta, ib, tb, cross) = at;
    let xa = param[ia] + ta * (param[ia + 1] - param[ia]);
    let xb = param[ib] + tb * (param[ib + 1] - param[ib]);
    let total = *param.last().unwrap();
    let gap = xa.min(xb - xa).min(total - xb);
    let (delta_end, delta_cross) = (fractions.0 * gap, fractions.1 * gap);
    let ta_vec = tangents[ia] + ta * (tangents[ia + 1] - tangents[ia]);
    let tb_vec = tangents[ib] + tb * (tangents[ib + 1] - tangents[ib]);
    let anchors = [
        (0.0, pts[0], tangents[0], delta_end),
        (xa, cross, (1.0 / ta_vec.norm()) * ta_vec, delta_cross),
        (xb, cross, (1.0 / tb_vec.norm()) * tb_vec, delta_cross),
        (
            total,
            *pts.last().unwrap(),
            *tangents.last().unwrap(),
            delta_end,
        ),
    ];
    let blend = |x: f64, p: Vec2| {
        let mut out = p;
        for &(x0, anchor, t, delta) in &anchors {
            let eta = cutoff((x - x0) / delta);
            if eta > 0.0 {
                let line = anchor + (x - x0) * t;
                out = (1.0 - eta) * out + eta * line;
            }
        }
        out
    };
    let mut out = Vec::with_capacity(pts.len() + 2);
    let mut a = 0;
    let mut b = 0;
    for i in 0..pts.len() {
        out.push(blend(param[i], pts[i]));
        if i == ia {
            a = out.len();
            out.push(cross);
        }
        if i == ib {
            b = out.len();
            out.push(cross);
        }
    }
    let last = out.len() - 1;
    out[last] = *pts.last().unwrap();
    Flattened {
        pts: out,
        a,
        b,
        delta_end,
        delta_cross,
    }
}

fn scale_loop(f: &Flattened, sigma: f64) -> Vec<Vec2> {
    let anchor = f.pts[f.a];
    f.pts
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if i > f.a && i < f.b {
                anchor + sigma * (p - anchor)
            } else {
                p
            }
        })
        .collect()
}

fn assess(
    curve: &PlanarCurve,
    loop_energy: f64,
    j: u32,
    flat: &Flattened,
    sigma: f64,
    ratio: f64,
) -> WellPreparedReport {
    let s = summarize(curve);
    let f = compute_fields(curve);
    let (k0, k1) = end_curvature(curve);
    let start_angle = f.theta[0];
    let end_angle = *f.theta.last().unwrap();
    let end_curvature = k0.abs().max(k1.abs());
    WellPreparedReport {
        ratio,
        trim_index: j,
        delta_end: flat.delta_end,
        delta_cross: flat.delta_cross,
        sigma,
        end_curvature,
        end_curvature_ok: end_curvature <= 1e-6,
        start_angle,
        end_angle,
        strictly_upper_ok: halfplane_status(curve) == HalfPlane::StrictlyUpper
            && start_angle > 0.0
            && start_angle < FRAC_PI_2
            && end_angle > 1.5 * PI
            && end_angle < 2.0 * PI,
        bending_energy: s.bending_energy,
        loop_energy,
        energy_ok: s.bending_energy < loop_energy,
        total_curvature: s.total_curvature,
        total_curvature_ok: s.total_curvature > 0.0,
        length: s.length,
    }
}

/// The upper loop at chord `r` and unit length, trimmed along its odd
/// extension, flattened near the ends and the crossing, and with the loop
/// part enlarged until the length is one again. Returned with `segments`
/// equal arclength segments and the flags it satisfies.
pub fn well_prepared_loop(r: f64, segments: usize) -> Result<(PlanarCurve, WellPreparedReport)> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "ratio must lie in (0, 1), got {r}"
        )));
    }
    let shape = ElasticaShape::new(ShapeKind::Loop, Side::Upper, 1, r, 1.0)?;
    let loop_energy = shape.bending_energy_closed_form;
    let mut best_deficit = f64::INFINITY;
    let mut last_reason = String::from("no admissible trim");
    for &j in &TRIM_INDICES {
        let Ok((param, pts, tangents)) = trimmed_loop(&shape, j) else {
            continue;
        };
        let Some(at) = crossing(&pts) else {
            last_reason = format!("trimmed loop for j = {j} lost its single crossing");
            continue;
        };
        for &frac in &DELTA_FRACTIONS {
            let flat = flatten(&param, &pts, &tangents, at, frac);
            let sample = |sigma: f64| -> Result<PlanarCurve> {
                resample_uniform(&PlanarCurve::new(scale_loop(&flat, sigma))?, segments)
            };
            let len = |sigma: f64| sample(sigma).map(|c| c.length()).unwrap_or(f64::NAN);
            let (mut lo, mut hi) = (1.0, 2.0);
            if !(len(lo) < 1.0) {
                last_reason = format!("flattened curve already longer than one for j = {j}");
                continue;
            }
            while len(hi) < 1.0 && hi < 1e3 {
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if len(mid) < 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-15 * hi {
                    break;
                }
            }
            let sigma = if (len(lo) - 1.0).abs() < (len(hi) - 1.0).abs() {
                lo
            } else {
                hi
            };
            let curve = sample(sigma)?;
            if (curve.length() - 1.0).abs() > 1e-8 {
                last_reason = format!("length {} missed the target", curve.length());
                continue;
            }
            let report = assess(&curve, loop_energy, j, &flat, sigma, r);
            if report.all_ok() {
                return Ok((curve, report));
            }
            best_deficit = best_deficit.min(report.bending_energy - loop_energy);
            last_reason = format!("flags failed for j = {j}, delta fractions {frac:?}: {report:?}");
        }
    }
    Err(Error::ConstructionFailure {
        reason: last_reason,
        deficit: best_deficit,
    })
}
