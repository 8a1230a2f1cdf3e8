//! Experiment driver: runs a configuration, checks it against its
//! expectations and writes `series.csv`, `summary.json` and snapshots.

pub mod config;
pub mod output;
pub mod presets;

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::curve::{summarize, HalfPlane};
use crate::diagnostics::{detect_migration, LimitKind, MigrationReport, Protrusion, TcCrossing};
use crate::elastica::{
    build_shape, energy_table, varpi_star, ElasticaShape, EnergyRow, ShapeKind, Side,
};
use crate::error::{Error, Result};
use crate::flow::{
    run_flow, FlowMode, FlowParams, InvariantViolation, ResampleEvent, Termination, Trajectory,
};

use config::ExperimentConfig;
use presets::{EventTime, Expectation, EVENT_TOLERANCE};

/// Exit status when the run finished but a structural invariant failed.
pub const EXIT_INVARIANT: i32 = 10;
/// Exit status for command-line usage errors.
pub const EXIT_USAGE: i32 = 2;

/// Distinct exit status per error kind.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidArgument(_) => EXIT_USAGE,
        Error::Io(_) | Error::Json(_) => 3,
        Error::Stiffness { .. } => 4,
        Error::Constraint(_) => 5,
        Error::DegenerateGeometry { .. }
        | Error::DegenerateCurve { .. }
        | Error::TooFewVertices { .. } => 6,
        Error::MultiplierUndefined { .. } => 7,
        Error::Incompatible(_) => 8,
        Error::ConstructionFailure { .. } => 9,
        Error::InvalidModulus(_) | Error::ParameterizationValidation(_) | Error::Validation(_) => {
            11
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveValues {
    pub length: f64,
    pub bending_energy: f64,
    pub total_curvature: f64,
    pub chord: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitSummary {
    pub kind: LimitKind,
    pub distance: f64,
    pub matched_fold: u32,
    pub tentative: bool,
}

/// Event time compared with its expected value within a relative window.
/// Never fails a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoftCheck {
    pub event: EventTime,
    pub expected: f64,
    pub observed: Option<f64>,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeCheck {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub id: String,
    pub mode: FlowMode,
    pub params: FlowParams,
    pub t_end: f64,
    pub termination: Termination,
    pub final_time: f64,
    pub accepted_steps: usize,
    pub rejected_attempts: usize,
    pub initial: CurveValues,
    #[serde(rename = "final")]
    pub final_values: CurveValues,
    pub migrated: bool,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub final_halfplane: HalfPlane,
    pub tc_crossings: Vec<TcCrossing>,
    pub protrusions: Vec<Protrusion>,
    pub limit: LimitSummary,
    pub invariant_violations: Vec<InvariantViolation>,
    pub resamplings: Vec<ResampleEvent>,
    pub soft_checks: Vec<SoftCheck>,
    pub outcome_checks: Vec<OutcomeCheck>,
}

impl Summary {
    pub fn exit_status(&self) -> i32 {
        if self.invariant_violations.is_empty() {
            0
        } else {
            EXIT_INVARIANT
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trajectory: Trajectory,
    pub migration: MigrationReport,
    pub summary: Summary,
}

fn values(c: &crate::curve::PlanarCurve) -> CurveValues {
    let s = summarize(c);
    CurveValues {
        length: s.length,
        bending_energy: s.bending_energy,
        total_curvature: s.total_curvature,
        chord: s.chord,
    }
}

/// Compares a migration report with an expectation.
pub fn check_expectation(
    m: &MigrationReport,
    e: &Expectation,
) -> (Vec<SoftCheck>, Vec<OutcomeCheck>) {
    let mut outcome = vec![OutcomeCheck {
        name: "migrated".into(),
        expected: e.migrated.to_string(),
        observed: m.migrated.to_string(),
        ok: m.migrated == e.migrated,
    }];
    if let Some(kind) = e.limit {
        outcome.push(OutcomeCheck {
            name: "limit".into(),
            expected: kind.to_string(),
            observed: m.limit.kind.to_string(),
            ok: m.limit.kind == kind,
        });
    }
    if e.protrusion {
        outcome.push(OutcomeCheck {
            name: "protrusion".into(),
            expected: "at least one".into(),
            observed: m.protrusions.len().to_string(),
            ok: !m.protrusions.is_empty(),
        });
    }
    let soft = e
        .event
        .iter()
        .map(|ev| {
            let observed = match ev.event {
                EventTime::T0 => m.t0,
                EventTime::T1 => m.t1,
            };
            SoftCheck {
                event: ev.event,
                expected: ev.time,
                observed,
                within_tolerance: observed
                    .is_some_and(|t| (t - ev.time).abs() <= EVENT_TOLERANCE * ev.time),
            }
        })
        .collect();
    (soft, outcome)
}

/// Runs a configuration. Relative polyline paths resolve against `base`.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    base: &Path,
    expectation: Option<&Expectation>,
) -> Result<RunOutput> {
    let problems = cfg.problems();
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let initial = cfg.initial.build(cfg.params.vertex_count, base)?;
    let trajectory = run_flow(
        initial,
        cfg.mode,
        &cfg.params,
        cfg.t_end,
        &cfg.snapshot_times,
        |_, _| {},
    )?;
    let migration = detect_migration(&trajectory);
    let (soft_checks, outcome_checks) = match expectation {
        Some(e) => check_expectation(&migration, e),
        None => (Vec::new(), Vec::new()),
    };
    let summary = Summary {
        id: cfg.id.clone(),
        mode: cfg.mode,
        params: cfg.params.clone(),
        t_end: cfg.t_end,
        termination: trajectory.termination,
        final_time: trajectory.final_state.time,
        accepted_steps: trajectory.accepted_steps(),
        rejected_attempts: trajectory.rejected_attempts,
        initial: values(&trajectory.initial),
        final_values: values(&trajectory.final_state.curve),
        migrated: migration.migrated,
        t0: migration.t0,
        t1: migration.t1,
        final_halfplane: migration.final_halfplane,
        tc_crossings: migration.tc_zero_crossings.clone(),
        protrusions: migration.protrusions.clone(),
        limit: LimitSummary {
            kind: migration.limit.kind,
            distance: migration.limit.distance,
            matched_fold: migration.limit.matched_fold,
            tentative: migration.limit.tentative,
        },
        invariant_violations: trajectory.violations.clone(),
        resamplings: trajectory.resamplings.clone(),
        soft_checks,
        outcome_checks,
    };
    Ok(RunOutput {
        trajectory,
        migration,
        summary,
    })
}

/// Writes `series.csv`, `summary.json` and one SVG per snapshot, plus one
/// for the final state.
pub fn write_artifacts(dir: &Path, cfg: &ExperimentConfig, out: &RunOutput) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    output::emit_series(&out.trajectory.records, &dir.join("series.csv"))?;
    std::fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&out.summary)?,
    )?;
    for s in &out.trajectory.snapshots {
        output::emit_snapshot(
            &s.curve,
            s.time,
            &dir.join(output::snapshot_name(s.time)),
            cfg.rescale_y,
        )?;
    }
    let fin = &out.trajectory.final_state;
    if !out.trajectory.snapshots.iter().any(|s| s.time == fin.time) {
        output::emit_snapshot(
            &fin.curve,
            fin.time,
            &dir.join(output::snapshot_name(fin.time)),
            cfg.rescale_y,
        )?;
    }
    Ok(())
}

/// Runs a configuration file and writes its artifacts under `out` (or the
/// configured directory when `out` is `None`).
pub fn run_config_file(
    path: &Path,
    out: Option<&Path>,
    vertices: Option<usize>,
) -> Result<(PathBuf, RunOutput)> {
    let mut cfg = config::load_config(path)?;
    if let Some(n) = vertices {
        cfg.params.vertex_count = n;
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.output_dir.clone());
    let result = run_experiment(&cfg, base, None)?;
    write_artifacts(&dir, &cfg, &result)?;
    Ok((dir, result))
}

/// Runs a shipped preset and writes its artifacts to `out_root/<id>`.
pub fn reproduce(
    id: &str,
    out_root: &Path,
    vertices: Option<usize>,
) -> Result<(PathBuf, RunOutput)> {
    let p = presets::preset(id).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "unknown example {id:?}; expected one of {}",
            presets::PRESET_IDS.join(", ")
        ))
    })?;
    let mut cfg = p.config;
    if let Some(n) = vertices {
        cfg.params.vertex_count = n;
    }
    let dir = out_root.join(id);
    let result = run_experiment(&cfg, Path::new("."), Some(&p.expectation))?;
    write_artifacts(&dir, &cfg, &result)?;
    Ok((dir, result))
}

/// Runs several presets on separate threads; results keep the input order.
pub fn reproduce_many(
    ids: &[String],
    out_root: &Path,
    vertices: Option<usize>,
) -> Vec<Result<(PathBuf, RunOutput)>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = ids
            .iter()
            .map(|id| s.spawn(move || reproduce(id, out_root, vertices)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalOutput {
    pub shape: ElasticaShape,
    pub halfplane: HalfPlane,
    pub length: f64,
    pub bending_energy: f64,
    pub total_curvature: f64,
}

/// Builds a unit-length critical shape with chord `ratio` and writes
/// `shape.csv` and `shape.json` into `dir`.
pub fn critical(
    ratio: f64,
    kind: ShapeKind,
    fold: u32,
    side: Side,
    samples: usize,
    dir: &Path,
) -> Result<CriticalOutput> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let (shape, curve) = build_shape(kind, side, fold, ratio, 1.0, samples)?;
    let s = summarize(&curve);
    let out = CriticalOutput {
        shape,
        halfplane: crate::curve::halfplane_status(&curve),
        length: s.length,
        bending_energy: s.bending_energy,
        total_curvature: s.total_curvature,
    };
    std::fs::create_dir_all(dir)?;
    output::write_shape_csv(&curve, &dir.join("shape.csv"))?;
    std::fs::write(dir.join("shape.json"), serde_json::to_string_pretty(&out)?)?;
    Ok(out)
}

/// Energies of unit-length arcs and loops at `steps` ratios from `rmin` to
/// `rmax` inclusive, written to `dir/energy_table.csv`.
pub fn write_energy_table(
    rmin: f64,
    rmax: f64,
    steps: usize,
    dir: &Path,
) -> Result<Vec<EnergyRow>> {
    if !(rmin > 0.0 && rmax < 1.0 && rmin <= rmax && steps >= 1) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < rmin <= rmax < 1 and steps >= 1, got {rmin}, {rmax}, {steps}"
        )));
    }
    let rs: Vec<f64> = if steps == 1 {
        vec![rmin]
    } else {
        (0..steps)
            .map(|i| rmin + (rmax - rmin) * i as f64 / (steps - 1) as f64)
            .collect()
    };
    let varpi = varpi_star()?.value();
    let rows = energy_table(&rs, varpi)?;
    std::fs::create_dir_all(dir)?;
    std::fs::write(
        dir.join("energy_table.csv"),
        output::energy_table_csv(&rows, varpi),
    )?;
    Ok(rows)
}
