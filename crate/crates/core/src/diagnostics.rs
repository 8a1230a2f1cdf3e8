//! Per-step records, migration timeline, total-curvature monitoring and
//! limit classification.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::curve::{halfplane_status, resample_uniform, summarize, HalfPlane, PlanarCurve, Vec2};
use crate::elastica::{build_shape, ShapeKind, Side};
use crate::flow::{FlowState, Termination, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub length: f64,
    pub bending_energy: f64,
    pub total_curvature: f64,
    pub lambda: f64,
    pub min_interior_y: f64,
    pub max_interior_y: f64,
    pub halfplane: HalfPlane,
    pub velocity_norm: f64,
    /// Fraction of the length lying strictly above the axis.
    pub upper_fraction: f64,
}

fn upper_fraction(curve: &PlanarCurve) -> f64 {
    let mut above = 0.0;
    for w in curve.vertices().windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = (b - a).norm();
        above += if a.y > 0.0 && b.y > 0.0 {
            len
        } else if a.y <= 0.0 && b.y <= 0.0 {
            0.0
        } else {
            let up = a.y.max(b.y);
            len * up / (a.y - b.y).abs()
        };
    }
    above / curve.length()
}

pub fn record(state: &FlowState) -> DiagRecord {
    let s = summarize(&state.curve);
    DiagRecord {
        step: state.step_index,
        t: state.time,
        dt: state.last_dt,
        length: s.length,
        bending_energy: s.bending_energy,
        total_curvature: s.total_curvature,
        lambda: state.lambda_current,
        min_interior_y: s.min_interior_y,
        max_interior_y: s.max_interior_y,
        halfplane: halfplane_status(&state.curve),
        velocity_norm: state.velocity_norm,
        upper_fraction: upper_fraction(&state.curve),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TcCrossing {
    pub t: f64,
    pub bending_energy: f64,
    pub length: f64,
}

/// An episode in which part of the curve that had gone below the axis
/// comes back above it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Protrusion {
    pub t_start: f64,
    pub t_peak: f64,
    /// Rise of the above-axis length fraction over its running minimum.
    pub peak_rise: f64,
}

/// Rise of the above-axis fraction that counts as a protrusion.
pub const PROTRUSION_RISE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MigrationReport {
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub migrated: bool,
    pub tc_zero_crossings: Vec<TcCrossing>,
    pub protrusions: Vec<Protrusion>,
    pub final_halfplane: HalfPlane,
    pub limit: LimitClassification,
}

pub fn tc_crossings(records: &[DiagRecord]) -> Vec<TcCrossing> {
    records
        .windows(2)
        .filter_map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let (ta, tb) = (a.total_curvature, b.total_curvature);
            if (ta > 0.0 && tb <= 0.0) || (ta < 0.0 && tb >= 0.0) {
                let f = ta / (ta - tb);
                Some(TcCrossing {
                    t: a.t + f * (b.t - a.t),
                    bending_energy: a.bending_energy + f * (b.bending_energy - a.bending_energy),
                    length: a.length + f * (b.length - a.length),
                })
            } else {
                None
            }
        })
        .collect()
}

fn protrusions(records: &[DiagRecord]) -> Vec<Protrusion> {
    let mut out = Vec::new();
    let Some(first_below) = records.iter().position(|r| r.min_interior_y < 0.0) else {
        return out;
    };
    let mut running_min = records[first_below].upper_fraction;
    let mut open: Option<Protrusion> = None;
    for r in &records[first_below..] {
        let rise = r.upper_fraction - running_min;
        match open.as_mut() {
            None if rise >= PROTRUSION_RISE => {
                open = Some(Protrusion {
                    t_start: r.t,
                    t_peak: r.t,
                    peak_rise: rise,
                });
            }
            Some(p) if rise > p.peak_rise => {
                p.t_peak = r.t;
                p.peak_rise = rise;
            }
            Some(p) if rise < 0.5 * p.peak_rise => {
                out.push(*p);
                open = None;
                running_min = r.upper_fraction;
            }
            _ => {}
        }
        if open.is_none() {
            running_min = running_min.min(r.upper_fraction);
        }
    }
    out.extend(open);
    out
}

pub fn detect_migration(trajectory: &Trajectory) -> MigrationReport {
    let records = &trajectory.records;
    let last = records
        .last()
        .expect("trajectory has at least its initial record");
    let t0 = if records[0].halfplane == HalfPlane::StrictlyUpper {
        let run = records
            .iter()
            .take_while(|r| r.halfplane == HalfPlane::StrictlyUpper)
            .count();
        Some(records[run - 1].t)
    } else {
        None
    };
    let t1 = if last.halfplane == HalfPlane::StrictlyLower {
        let run = records
            .iter()
            .rev()
            .take_while(|r| r.halfplane == HalfPlane::StrictlyLower)
            .count();
        Some(records[records.len() - run].t)
    } else {
        None
    };
    let migrated = matches!((t0, t1), (Some(a), Some(b)) if a < b);
    let curve = &trajectory.final_state.curve;
    let mut limit = classify_limit(curve, curve.chord(), curve.length(), DEFAULT_MATCH_FRACTION);
    limit.tentative = trajectory.termination != Termination::Stationary;
    MigrationReport {
        t0,
        t1,
        migrated,
        tc_zero_crossings: tc_crossings(records),
        protrusions: protrusions(records),
        final_halfplane: last.halfplane,
        limit,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingCheck {
    pub t: f64,
    /// Scale-free energy `B L` at the crossing.
    pub normalized_energy: f64,
    pub above_three_varpi: bool,
}

/// Comparison of total-curvature sign changes against the energy levels
/// `2 varpi` and `3 varpi`. Energies are compared in the scale-free form
/// `B L`, which is the bending energy of the rescaled unit-length curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorReport {
    pub varpi: f64,
    pub ratio: f64,
    pub initial_normalized_energy: f64,
    pub started_below_two_varpi: bool,
    pub crossings: Vec<CrossingCheck>,
    /// True when a run that started below `2 varpi` changed the sign of TC.
    pub low_energy_crossing: bool,
    pub warnings: Vec<String>,
}

pub fn mountain_pass_monitor(trajectory: &Trajectory, varpi: f64) -> MonitorReport {
    let records = &trajectory.records;
    let first = &records[0];
    let chord = trajectory.initial.chord();
    let initial_normalized_energy = first.bending_energy * first.length;
    let started_below_two_varpi = initial_normalized_energy < 2.0 * varpi;
    let crossings: Vec<CrossingCheck> = tc_crossings(records)
        .into_iter()
        .map(|c| {
            let normalized_energy = c.bending_energy * c.length;
            CrossingCheck {
                t: c.t,
                normalized_energy,
                above_three_varpi: normalized_energy >= 3.0 * varpi,
            }
        })
        .collect();
    let ratio = chord / first.length;
    let mut warnings = Vec::new();
    for c in &crossings {
        if !c.above_three_varpi && ratio <= 0.1 {
            warnings.push(format!(
                "total curvature changed sign at t = {:e} with B L = {} below 3 varpi = {}",
                c.t,
                c.normalized_energy,
                3.0 * varpi
            ));
        }
    }
    MonitorReport {
        varpi,
        ratio,
        initial_normalized_energy,
        started_below_two_varpi,
        low_energy_crossing: started_below_two_varpi && !crossings.is_empty(),
        crossings,
        warnings,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimitKind {
    #[serde(rename = "arc+")]
    ArcUpper,
    #[serde(rename = "arc-")]
    ArcLower,
    #[serde(rename = "loop+")]
    LoopUpper,
    #[serde(rename = "loop-")]
    LoopLower,
    #[serde(rename = "segment")]
    Segment,
    #[serde(rename = "unresolved")]
    Unresolved,
}

impl LimitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LimitKind::ArcUpper => "arc+",
            LimitKind::ArcLower => "arc-",
            LimitKind::LoopUpper => "loop+",
            LimitKind::LoopLower => "loop-",
            LimitKind::Segment => "segment",
            LimitKind::Unresolved => "unresolved",
        }
    }

    pub fn reflected(self) -> Self {
        match self {
            LimitKind::ArcUpper => LimitKind::ArcLower,
            LimitKind::ArcLower => LimitKind::ArcUpper,
            LimitKind::LoopUpper => LimitKind::LoopLower,
            LimitKind::LoopLower => LimitKind::LoopUpper,
            other => other,
        }
    }

    fn of(kind: ShapeKind, side: Side) -> Self {
        match (kind, side) {
            (ShapeKind::Arc, Side::Upper) => LimitKind::ArcUpper,
            (ShapeKind::Arc, Side::Lower) => LimitKind::ArcLower,
            (ShapeKind::Loop, Side::Upper) => LimitKind::LoopUpper,
            (ShapeKind::Loop, Side::Lower) => LimitKind::LoopLower,
        }
    }
}

impl fmt::Display for LimitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitClassification {
    pub kind: LimitKind,
    /// Sup-norm distance to the nearest candidate after uniform resampling.
    pub distance: f64,
    /// Fold of the matched elastica; zero for the segment and unresolved.
    pub matched_fold: u32,
    /// Nearest candidate, reported even when it is not a match.
    pub nearest: LimitKind,
    /// Set when the run had not reached stationarity.
    pub tentative: bool,
}

/// Match threshold as a fraction of the length.
pub const DEFAULT_MATCH_FRACTION: f64 = 0.02;
const COMPARE_SEGMENTS: usize = 400;
const CANDIDATE_SAMPLES: usize = 2000;

fn sup_distance(a: &PlanarCurve, b: &PlanarCurve) -> Option<f64> {
    let ra = resample_uniform(a, COMPARE_SEGMENTS).ok()?;
    let rb = resample_uniform(b, COMPARE_SEGMENTS).ok()?;
    Some(
        ra.vertices()
            .iter()
            .zip(rb.vertices())
            .map(|(&p, &q)| (p - q).norm())
            .fold(0.0, f64::max),
    )
}

/// Nearest of the arcs and loops (folds one and two, both sides) at the
/// ratio `ell / length`, and the straight segment.
pub fn classify_limit(
    final_curve: &PlanarCurve,
    ell: f64,
    length: f64,
    match_fraction: f64,
) -> LimitClassification {
    let mut best = (LimitKind::Unresolved, f64::INFINITY, 0u32);
    let segment = PlanarCurve::new(
        (0..=COMPARE_SEGMENTS)
            .map(|i| Vec2::new(ell * i as f64 / COMPARE_SEGMENTS as f64, 0.0))
            .collect(),
    );
    if let Some(d) = segment.ok().and_then(|s| sup_distance(final_curve, &s)) {
        best = (LimitKind::Segment, d, 0);
    }
    if length > ell * (1.0 + 1e-9) {
        for fold in 1..=2 {
            for kind in [ShapeKind::Arc, ShapeKind::Loop] {
                for side in [Side::Upper, Side::Lower] {
                    let Ok((_, candidate)) =
                        build_shape(kind, side, fold, ell, length, CANDIDATE_SAMPLES)
                    else {
                        continue;
                    };
                    if let Some(d) = sup_distance(final_curve, &candidate) {
                        if d < best.1 {
                            best = (LimitKind::of(kind, side), d, fold);
                        }
                    }
                }
            }
        }
    }
    let matched = best.1 <= match_fraction * length;
    LimitClassification {
        kind: if matched {
            best.0
        } else {
            LimitKind::Unresolved
        },
        distance: best.1,
        matched_fold: if matched { best.2 } else { 0 },
        nearest: best.0,
        tentative: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{FlowMode, FlowParams};

    fn arc(side: Side) -> PlanarCurve {
        build_shape(ShapeKind::Arc, side, 1, 1.0, 1.5, 400)
            .unwrap()
            .1
    }

    fn synthetic(curves: &[PlanarCurve]) -> Trajectory {
        let params = FlowParams::default();
        let mode = FlowMode::LengthPreserving;
        let records: Vec<DiagRecord> = curves
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut s = FlowState::new(c.clone(), mode, &params);
                s.time = i as f64 * 0.1;
                s.step_index = i;
                record(&s)
            })
            .collect();
        let mut final_state = FlowState::new(curves.last().unwrap().clone(), mode, &params);
        final_state.time = (curves.len() - 1) as f64 * 0.1;
        Trajectory {
            mode,
            records,
            snapshots: Vec::new(),
            initial: curves[0].clone(),
            final_state,
            termination: Termination::Stationary,
            resamplings: Vec::new(),
            violations: Vec::new(),
            rejected_attempts: 0,
            lambda_pairs: Vec::new(),
        }
    }

    fn blend(a: &PlanarCurve, b: &PlanarCurve, w: f64) -> PlanarCurve {
        PlanarCurve::new(
            a.vertices()
                .iter()
                .zip(b.vertices())
                .map(|(&p, &q)| (1.0 - w) * p + w * q)
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn record_matches_summary() {
        let c = arc(Side::Upper);
        let r = record(&FlowState::new(
            c.clone(),
            FlowMode::LengthPreserving,
            &FlowParams::default(),
        ));
        let s = summarize(&c);
        assert_eq!(r.bending_energy, s.bending_energy);
        assert_eq!(r.length, s.length);
        assert_eq!(r.total_curvature, s.total_curvature);
        assert_eq!(r.halfplane, HalfPlane::StrictlyUpper);
        assert!((r.upper_fraction - 1.0).abs() < 1e-12);
    }

    #[test]
    fn upper_to_lower_interpolation_crosses_tc_zero() {
        let (up, down) = (arc(Side::Upper), arc(Side::Lower));
        let curves: Vec<PlanarCurve> = (0..=10)
            .map(|i| blend(&up, &down, i as f64 / 10.0))
            .collect();
        let t = synthetic(&curves);
        let m = detect_migration(&t);
        assert!(m.migrated);
        assert_eq!(m.tc_zero_crossings.len(), 1);
        assert!((m.tc_zero_crossings[0].t - 0.5).abs() < 0.05);
        assert_eq!(m.limit.kind, LimitKind::ArcLower);
        let mon = mountain_pass_monitor(&t, 28.1);
        assert_eq!(mon.crossings.len(), 1);
        assert!(mon.crossings[0].normalized_energy.is_finite());
    }

    #[test]
    fn stationary_upper_arc_does_not_migrate() {
        let c = arc(Side::Upper);
        let t = synthetic(&[c.clone(), c.clone(), c]);
        let m = detect_migration(&t);
        assert!(!m.migrated);
        assert_eq!(m.t0, Some(0.2));
        assert_eq!(m.t1, None);
        assert!(m.tc_zero_crossings.is_empty());
    }

    #[test]
    fn built_shapes_classify_as_themselves() {
        for (kind, side, expect) in [
            (ShapeKind::Loop, Side::Upper, LimitKind::LoopUpper),
            (ShapeKind::Arc, Side::Lower, LimitKind::ArcLower),
        ] {
            let (_, c) = build_shape(kind, side, 1, 0.3, 1.0, 800).unwrap();
            let l = classify_limit(&c, 0.3, c.length(), DEFAULT_MATCH_FRACTION);
            assert_eq!(l.kind, expect);
            assert_eq!(l.matched_fold, 1);
            assert!(l.distance < 1e-4, "{}", l.distance);
        }
    }

    #[test]
    fn flat_curve_is_a_segment() {
        let c = PlanarCurve::new(
            (0..=50)
                .map(|i| Vec2::new(i as f64 / 50.0, 1e-4 * (i as f64 * 0.2).sin()))
                .collect(),
        )
        .unwrap();
        assert_eq!(
            classify_limit(&c, 1.0, c.length(), DEFAULT_MATCH_FRACTION).kind,
            LimitKind::Segment
        );
    }

    #[test]
    fn protrusion_is_logged_once() {
        let (up, down) = (arc(Side::Upper), arc(Side::Lower));
        let w = [0.0, 0.3, 0.45, 0.6, 0.7, 0.55, 0.45, 0.7, 1.0, 1.0];
        let curves: Vec<PlanarCurve> = w.iter().map(|&x| blend(&up, &down, x)).collect();
        let m = detect_migration(&synthetic(&curves));
        assert_eq!(m.protrusions.len(), 1, "{:?}", m.protrusions);
        assert!(m.migrated);
    }
}
