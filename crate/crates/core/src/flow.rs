//! Semi-implicit elastic flow with pinned ends and zero end curvature.
//!
//! Each attempt solves `(M + dt S + dt mu K) dx = -dt (grad B + lambda grad L)`
//! where `M` holds the dual lengths, `S` is the Hessian of the quadratic
//! surrogate `sum w_i |x_{i-1} - 2 x_i + x_{i+1}|^2` and `K` the segment
//! Laplacian, all with weights frozen at the current curve. `mu` is the
//! tension of the previous step clipped at zero. Because the right-hand side
//! is affine in `lambda`, two solves with one factorization give
//! `dx(lambda) = dx_free + lambda dx_resp`.

use serde::{Deserialize, Serialize};

use crate::banded::Pentadiagonal;
use crate::curve::{
    bending_gradient, compute_fields, length_gradient, resample_uniform, summarize, PlanarCurve,
    Vec2,
};
use crate::diagnostics::{record, DiagRecord};
use crate::elastica::curvature_stencils;
use crate::error::{Error, Result};
use crate::initial::validate_compatibility;

/// Relative slack of the per-step energy acceptance test.
pub const ENERGY_SLACK: f64 = 1e-12;
/// Relative slack tolerated on the energy across a resampling.
pub const RESAMPLE_ENERGY_SLACK: f64 = 1e-8;
/// Whole-run relative length drift allowed in length-preserving mode.
pub const LENGTH_DRIFT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FlowMode {
    LengthPreserving,
    Penalized { lambda: f64 },
}

impl FlowMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FlowMode::Penalized { lambda } if !(lambda.is_finite() && lambda >= 0.0) => {
                Err(Error::InvalidArgument(format!(
                    "penalization lambda must be finite and >= 0, got {lambda}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            FlowMode::LengthPreserving => "length_preserving",
            FlowMode::Penalized { .. } => "penalized",
        }
    }

    /// Functional monitored by the acceptance rule.
    fn lyapunov(&self, bending: f64, length: f64) -> f64 {
        match *self {
            FlowMode::LengthPreserving => bending,
            FlowMode::Penalized { lambda } => bending + lambda * length,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowParams {
    pub dt_initial: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub newton_tol: f64,
    pub max_step_rejections: usize,
    pub resample_trigger: f64,
    pub velocity_stop_tol: f64,
    pub vertex_count: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            dt_initial: 1e-7,
            dt_min: 1e-16,
            dt_max: 1e-4,
            newton_tol: 1e-13,
            max_step_rejections: 60,
            resample_trigger: 1e3,
            velocity_stop_tol: 1e-6,
            vertex_count: 400,
        }
    }
}

impl FlowParams {
    /// Field-level problems, empty when the parameters are usable.
    pub fn problems(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.dt_min) {
            out.push(("dt_min", format!("must be positive, got {}", self.dt_min)));
        }
        if !positive(self.dt_initial) || self.dt_initial < self.dt_min {
            out.push((
                "dt_initial",
                format!("must satisfy dt_min <= dt_initial, got {}", self.dt_initial),
            ));
        }
        if !positive(self.dt_max) || self.dt_max < self.dt_initial {
            out.push((
                "dt_max",
                format!("must satisfy dt_initial <= dt_max, got {}", self.dt_max),
            ));
        }
        if !(self.newton_tol > 0.0 && self.newton_tol <= 1e-10) {
            out.push((
                "newton_tol",
                format!("must lie in (0, 1e-10], got {}", self.newton_tol),
            ));
        }
        if !(self.resample_trigger > 1.0) {
            out.push((
                "resample_trigger",
                format!("must exceed 1, got {}", self.resample_trigger),
            ));
        }
        if !(self.velocity_stop_tol >= 0.0) {
            out.push((
                "velocity_stop_tol",
                format!("must be >= 0, got {}", self.velocity_stop_tol),
            ));
        }
        if self.vertex_count < crate::curve::MIN_VERTICES - 1 {
            out.push((
                "vertex_count",
                format!(
                    "must be at least {}, got {}",
                    crate::curve::MIN_VERTICES - 1,
                    self.vertex_count
                ),
            ));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.problems().first() {
            None => Ok(()),
            Some((field, msg)) => Err(Error::InvalidArgument(format!("{field}: {msg}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub curve: PlanarCurve,
    pub time: f64,
    /// Step size the next attempt starts from.
    pub dt_current: f64,
    pub lambda_current: f64,
    pub energy_current: f64,
    pub initial_length: f64,
    pub step_index: usize,
    /// Size of the last accepted step (zero before the first one).
    pub last_dt: f64,
    /// Max vertex displacement of the last accepted step over its size.
    pub velocity_norm: f64,
}

impl FlowState {
    pub fn new(curve: PlanarCurve, mode: FlowMode, params: &FlowParams) -> Self {
        let s = summarize(&curve);
        let lambda_current = match mode {
            FlowMode::Penalized { lambda } => lambda,
            FlowMode::LengthPreserving => compute_lambda_nonlocal(&curve).unwrap_or(0.0),
        };
        Self {
            curve,
            time: 0.0,
            dt_current: params.dt_initial,
            lambda_current,
            energy_current: s.bending_energy,
            initial_length: s.length,
            step_index: 0,
            last_dt: 0.0,
            velocity_norm: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepReport {
    pub dt_used: f64,
    pub rejections: usize,
    pub lambda: f64,
    pub energy_before: f64,
    pub energy_after: f64,
    pub lyapunov_before: f64,
    pub lyapunov_after: f64,
    pub length_after: f64,
    pub max_displacement: f64,
    pub velocity_norm: f64,
    pub newton_iterations: usize,
}

/// The nonlocal multiplier `int <2 k'' + k^3, k> ds / int k^2 ds`, evaluated
/// with the interior curvature stencils.
pub fn compute_lambda_nonlocal(curve: &PlanarCurve) -> Result<f64> {
    let st = curvature_stencils(curve)?;
    let (num, den) = st.iter().fold((0.0, 0.0), |(n, d), &(k, kss, w)| {
        (n + (2.0 * kss + k * k * k) * k * w, d + k * k * w)
    });
    if !(den > 1e-14) {
        return Err(Error::MultiplierUndefined { energy: den });
    }
    Ok(num / den)
}

/// Assembles `M + dt S + dt mu K` over the interior vertices `1..N-1`,
/// where `K` is the segment Laplacian approximating the length Hessian.
fn system_matrix(curve: &PlanarCurve, dt: f64, mu: f64) -> Pentadiagonal {
    let f = compute_fields(curve);
    let h = &f.segment_lengths;
    let n = curve.segments();
    let m = n - 1;
    let mut a = Pentadiagonal::zeros(m);
    for i in 1..n {
        a.add(i - 1, i - 1, f.dual_lengths[i - 1]);
    }
    let coeff = [1.0, -2.0, 1.0];
    for j in 1..n {
        let w = 2.0 * dt / (f.dual_lengths[j - 1] * h[j - 1] * h[j]);
        for (p, cp) in coeff.iter().enumerate() {
            let vp = j + p - 1;
            if vp == 0 || vp == n {
                continue;
            }
            for (q, cq) in coeff.iter().enumerate().skip(p) {
                let vq = j + q - 1;
                if vq == 0 || vq == n {
                    continue;
                }
                // off-diagonal pairs are added once and mirrored by storage
                a.add(vp - 1, vq - 1, w * cp * cq);
            }
        }
    }
    if mu > 0.0 {
        for (j, &hj) in h.iter().enumerate() {
            let w = dt * mu / hj;
            if j >= 1 {
                a.add(j - 1, j - 1, w);
            }
            if j + 1 < n {
                a.add(j, j, w);
            }
            if j >= 1 && j + 1 < n {
                a.add(j - 1, j, -w);
            }
        }
    }
    a
}

fn solve_pair(a: &Pentadiagonal, rhs: &[Vec2]) -> Result<Vec<Vec2>> {
    let fac = a.factor()?;
    let mut bx: Vec<f64> = rhs.iter().map(|v| v.x).collect();
    let mut by: Vec<f64> = rhs.iter().map(|v| v.y).collect();
    fac.solve_in_place(&mut bx);
    fac.solve_in_place(&mut by);
    Ok(bx
        .into_iter()
        .zip(by)
        .map(|(x, y)| Vec2::new(x, y))
        .collect())
}

fn displaced(base: &[Vec2], free: &[Vec2], resp: &[Vec2], lambda: f64) -> Vec<Vec2> {
    let mut out = base.to_vec();
    for i in 0..free.len() {
        out[i + 1] += free[i] + lambda * resp[i];
    }
    out
}

fn polyline_length(v: &[Vec2]) -> f64 {
    v.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// Derivative of the polyline length along the interior displacement `d`.
fn length_derivative(v: &[Vec2], d: &[Vec2]) -> f64 {
    let n = v.len() - 1;
    let at = |i: usize| {
        if i == 0 || i == n {
            Vec2::ZERO
        } else {
            d[i - 1]
        }
    };
    (0..n)
        .map(|j| {
            let e = v[j + 1] - v[j];
            let l = e.norm();
            if l > 0.0 {
                e.dot(at(j + 1) - at(j)) / l
            } else {
                0.0
            }
        })
        .sum()
}

/// Root of `length(x(lambda)) = target`, safeguarded Newton with bisection.
fn constraint_root(
    base: &[Vec2],
    free: &[Vec2],
    resp: &[Vec2],
    target: f64,
    tol: f64,
    guess: f64,
) -> Result<(f64, usize)> {
    let g = |lam: f64| polyline_length(&displaced(base, free, resp, lam)) - target;
    let mut neg: Option<f64> = None;
    let mut pos: Option<f64> = None;
    let mut lam = guess;
    for it in 1..=100 {
        let v = displaced(base, free, resp, lam);
        let gv = polyline_length(&v) - target;
        if gv.abs() <= tol * target {
            return Ok((lam, it));
        }
        if gv < 0.0 {
            neg = Some(lam);
        } else {
            pos = Some(lam);
        }
        let dg = length_derivative(&v, resp);
        let newton = if dg != 0.0 { lam - gv / dg } else { f64::NAN };
        lam = match (neg, pos) {
            (Some(a), Some(b)) => {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                if newton.is_finite() && newton > lo && newton < hi {
                    newton
                } else {
                    0.5 * (lo + hi)
                }
            }
            _ if newton.is_finite() => newton,
            _ => break,
        };
        if let (Some(a), Some(b)) = (neg, pos) {
            if (a - b).abs() <= 1e-15 * a.abs().max(b.abs()) {
                let best = if g(a).abs() < g(b).abs() { a } else { b };
                return Ok((best, it));
            }
        }
    }
    Err(Error::Constraint(format!(
        "no root of the length residual near lambda = {guess:e} (bracket {neg:?} .. {pos:?})"
    )))
}

/// Moves the interior vertices along the length gradient until the length
/// equals `target`. Used after resampling in length-preserving mode.
fn restore_length(curve: &PlanarCurve, target: f64, tol: f64) -> Result<PlanarCurve> {
    let base = curve.vertices();
    let n = curve.segments();
    let dir: Vec<Vec2> = length_gradient(curve)[1..n].to_vec();
    let zero = vec![Vec2::ZERO; n - 1];
    let (mu, _) = constraint_root(base, &zero, &dir, target, tol, 0.0)?;
    PlanarCurve::new(displaced(base, &zero, &dir, mu))
}

/// One accepted step. Equivalent to [`advance_step_capped`] without a cap.
pub fn advance_step(
    state: &FlowState,
    mode: FlowMode,
    params: &FlowParams,
) -> Result<(FlowState, StepReport)> {
    advance_step_capped(state, mode, params, f64::INFINITY)
}

/// One accepted step of size at most `min(dt_current, cap)`.
pub fn advance_step_capped(
    state: &FlowState,
    mode: FlowMode,
    params: &FlowParams,
    cap: f64,
) -> Result<(FlowState, StepReport)> {
    let curve = &state.curve;
    let base = curve.vertices();
    let n = curve.segments();
    let before = summarize(curve);
    let lyap_before = mode.lyapunov(before.bending_energy, before.length);
    if let FlowMode::LengthPreserving = mode {
        compute_lambda_nonlocal(curve)?;
    }
    let gb = bending_gradient(curve);
    let gl = length_gradient(curve);
    // Positive tension is treated implicitly; a negative one stays explicit.
    let stiff = match mode {
        FlowMode::Penalized { lambda } => lambda,
        FlowMode::LengthPreserving => state.lambda_current,
    }
    .max(0.0);
    let clipped = cap < state.dt_current;
    let mut dt = state.dt_current.min(cap);
    let mut rejections = 0;
    loop {
        if dt < params.dt_min && !clipped || rejections > params.max_step_rejections {
            return Err(Error::Stiffness {
                state: Box::new(state.clone()),
            });
        }
        let a = system_matrix(curve, dt, stiff);
        let rhs_free: Vec<Vec2> = gb[1..n].iter().map(|&g| -dt * g).collect();
        let rhs_resp: Vec<Vec2> = gl[1..n].iter().map(|&g| -dt * g).collect();
        let free = solve_pair(&a, &rhs_free)?;
        let resp = solve_pair(&a, &rhs_resp)?;
        let (lambda, newton_iterations) = match mode {
            FlowMode::Penalized { lambda } => (lambda, 0),
            FlowMode::LengthPreserving => {
                let zero = displaced(base, &free, &resp, 0.0);
                let slope = length_derivative(&zero, &resp);
                let guess = if slope != 0.0 {
                    -(polyline_length(&zero) - state.initial_length) / slope
                } else {
                    state.lambda_current
                };
                match constraint_root(
                    base,
                    &free,
                    &resp,
                    state.initial_length,
                    params.newton_tol,
                    guess,
                ) {
                    Ok(r) => r,
                    Err(e) if dt <= params.dt_min || rejections == params.max_step_rejections => {
                        return Err(e)
                    }
                    Err(_) => {
                        dt *= 0.5;
                        rejections += 1;
                        continue;
                    }
                }
            }
        };
        let next = displaced(base, &free, &resp, lambda);
        let accepted = PlanarCurve::new(next).ok().and_then(|c| {
            let s = summarize(&c);
            let lyap = mode.lyapunov(s.bending_energy, s.length);
            (lyap.is_finite() && lyap <= lyap_before * (1.0 + ENERGY_SLACK)).then_some((c, s, lyap))
        });
        let Some((c, s, lyap_after)) = accepted else {
            dt *= 0.5;
            rejections += 1;
            continue;
        };
        let max_displacement = free
            .iter()
            .zip(&resp)
            .map(|(&f, &r)| (f + lambda * r).norm())
            .fold(0.0, f64::max);
        let velocity_norm = max_displacement / dt;
        let dt_next = if rejections == 0 {
            let grown = if clipped {
                state.dt_current
            } else {
                (dt * 1.2).min(params.dt_max)
            };
            grown.max(state.dt_current.min(params.dt_max))
        } else {
            dt
        };
        let report = StepReport {
            dt_used: dt,
            rejections,
            lambda,
            energy_before: before.bending_energy,
            energy_after: s.bending_energy,
            lyapunov_before: lyap_before,
            lyapunov_after: lyap_after,
            length_after: s.length,
            max_displacement,
            velocity_norm,
            newton_iterations,
        };
        let next_state = FlowState {
            curve: c,
            time: state.time + dt,
            dt_current: dt_next,
            lambda_current: lambda,
            energy_current: s.bending_energy,
            initial_length: state.initial_length,
            step_index: state.step_index + 1,
            last_dt: dt,
            velocity_norm,
        };
        return Ok((next_state, report));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    EndTime,
    Stationary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub curve: PlanarCurve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResampleEvent {
    pub step: usize,
    pub time: f64,
    pub energy_before: f64,
    pub energy_after: f64,
    pub length_before: f64,
    pub length_after: f64,
    /// The monitored functional rose by more than the resampling slack.
    /// Interpolation changes the discrete energy at `O(h^2)`, so this is
    /// kept apart from the per-step structural checks.
    pub exceeds_slack: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantViolation {
    pub step: usize,
    pub time: f64,
    pub description: String,
}

/// Everything a run produces. `records` starts with the initial state and
/// then holds one entry per accepted step; full curves are kept only at
/// the requested checkpoints and at the end.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub mode: FlowMode,
    pub records: Vec<DiagRecord>,
    pub snapshots: Vec<Snapshot>,
    pub initial: PlanarCurve,
    pub final_state: FlowState,
    pub termination: Termination,
    pub resamplings: Vec<ResampleEvent>,
    pub violations: Vec<InvariantViolation>,
    pub rejected_attempts: usize,
    /// Constraint-root and quadrature multipliers per accepted step (LP mode).
    pub lambda_pairs: Vec<(f64, f64, f64)>,
}

impl Trajectory {
    pub fn accepted_steps(&self) -> usize {
        self.records.len() - 1
    }
}

/// Runs the flow to `t_end` or stationarity. Steps are clipped so that every
/// time in `checkpoints` is hit exactly and stored as a snapshot.
pub fn run_flow(
    initial: PlanarCurve,
    mode: FlowMode,
    params: &FlowParams,
    t_end: f64,
    checkpoints: &[f64],
    mut observer: impl FnMut(&FlowState, &StepReport),
) -> Result<Trajectory> {
    mode.validate()?;
    params.validate()?;
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t_end must be finite and >= 0, got {t_end}"
        )));
    }
    let report = validate_compatibility(&initial, initial.chord(), None);
    if !report.end_curvature_ok || !report.immersed {
        return Err(Error::Incompatible(format!(
            "end curvature {:e} exceeds {:e}",
            report.end_curvature, report.end_curvature_tol
        )));
    }
    let mut stops: Vec<f64> = checkpoints
        .iter()
        .copied()
        .filter(|t| *t > 0.0 && *t <= t_end)
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let mut snapshots = Vec::new();
    if checkpoints.contains(&0.0) {
        snapshots.push(Snapshot {
            time: 0.0,
            curve: initial.clone(),
        });
    }
    let track_lambda = matches!(mode, FlowMode::LengthPreserving);
    let mut state = FlowState::new(initial.clone(), mode, params);
    let mut records = vec![record(&state)];
    let mut resamplings = Vec::new();
    let mut violations = Vec::new();
    let mut lambda_pairs = Vec::new();
    let mut rejected_attempts = 0;
    let (start, end) = (initial.start(), initial.end());
    let mut next_stop = 0;
    let mut termination = Termination::EndTime;
    while state.time < t_end {
        let target = stops.get(next_stop).copied().unwrap_or(t_end).min(t_end);
        let cap = target - state.time;
        let (mut next, rep) = advance_step_capped(&state, mode, params, cap)?;
        rejected_attempts += rep.rejections;
        if rep.dt_used >= cap * (1.0 - 1e-12) {
            next.time = target;
        }
        let v = next.curve.vertices();
        if v[0] != start || v[v.len() - 1] != end {
            violations.push(InvariantViolation {
                step: next.step_index,
                time: next.time,
                description: "endpoint moved".into(),
            });
        }
        if rep.lyapunov_after > rep.lyapunov_before * (1.0 + 1e-10) {
            violations.push(InvariantViolation {
                step: next.step_index,
                time: next.time,
                description: format!(
                    "energy rose from {:e} to {:e}",
                    rep.lyapunov_before, rep.lyapunov_after
                ),
            });
        }
        if track_lambda {
            let drift = (rep.length_after - next.initial_length).abs() / next.initial_length;
            if drift > LENGTH_DRIFT_TOL {
                violations.push(InvariantViolation {
                    step: next.step_index,
                    time: next.time,
                    description: format!("length drift {drift:e}"),
                });
            }
            if let Ok(q) = compute_lambda_nonlocal(&next.curve) {
                lambda_pairs.push((next.time, rep.lambda, q));
            }
        }
        observer(&next, &rep);
        let stationary = rep.velocity_norm <= params.velocity_stop_tol;
        if next.curve.spacing_ratio() > params.resample_trigger {
            let before = summarize(&next.curve);
            let mut curve = resample_uniform(&next.curve, params.vertex_count)?;
            if track_lambda {
                curve = restore_length(&curve, next.initial_length, params.newton_tol)?;
            }
            let after = summarize(&curve);
            let lyap_before = mode.lyapunov(before.bending_energy, before.length);
            let lyap_after = mode.lyapunov(after.bending_energy, after.length);
            resamplings.push(ResampleEvent {
                step: next.step_index,
                time: next.time,
                energy_before: before.bending_energy,
                energy_after: after.bending_energy,
                length_before: before.length,
                length_after: after.length,
                exceeds_slack: lyap_after > lyap_before * (1.0 + RESAMPLE_ENERGY_SLACK),
            });
            next.energy_current = after.bending_energy;
            next.curve = curve;
        }
        state = next;
        records.push(record(&state));
        if next_stop < stops.len() && state.time >= stops[next_stop] {
            snapshots.push(Snapshot {
                time: state.time,
                curve: state.curve.clone(),
            });
            next_stop += 1;
        }
        if stationary {
            termination = Termination::Stationary;
            break;
        }
    }
    Ok(Trajectory {
        mode,
        records,
        snapshots,
        initial,
        final_state: state,
        termination,
        resamplings,
        violations,
        rejected_attempts,
        lambda_pairs,
    })
}

/// Comparison of two penalized runs related by the parabolic scaling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RescaleReport {
    pub ell: f64,
    pub lambda: f64,
    /// Largest vertex sup-norm discrepancy of matched snapshots, relative to
    /// the unit-chord length.
    pub max_discrepancy: f64,
    /// Largest relative error of `B_unit = ell * B_ell` and `L_unit = L_ell / ell`.
    pub max_energy_identity_error: f64,
    pub max_length_identity_error: f64,
    pub matched_times: Vec<f64>,
}

/// Runs the penalized flow from `unit_initial` scaled by `ell` with `lambda`
/// and from `unit_initial` itself with `lambda ell^2`, the second with all
/// times scaled by `ell^-4`, and compares the snapshots at `times` (unit
/// clock).
pub fn rescale_check_from(
    unit_initial: &PlanarCurve,
    ell: f64,
    lambda: f64,
    params: &FlowParams,
    times: &[f64],
) -> Result<RescaleReport> {
    if !(ell > 0.0 && lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need ell > 0 and lambda >= 0, got {ell}, {lambda}"
        )));
    }
    let t_end = times.iter().copied().fold(0.0, f64::max);
    let mut unit_params = params.clone();
    unit_params.velocity_stop_tol = 0.0;
    let s4 = ell.powi(4);
    let mut big_params = unit_params.clone();
    big_params.dt_initial *= s4;
    big_params.dt_min *= s4;
    big_params.dt_max *= s4;
    let big_initial = unit_initial.scaled(ell)?;
    let unit = run_flow(
        unit_initial.clone(),
        FlowMode::Penalized {
            lambda: lambda * ell * ell,
        },
        &unit_params,
        t_end,
        times,
        |_, _| {},
    )?;
    let big_times: Vec<f64> = times.iter().map(|t| t * s4).collect();
    let big = run_flow(
        big_initial,
        FlowMode::Penalized { lambda },
        &big_params,
        t_end * s4,
        &big_times,
        |_, _| {},
    )?;
    let mut report = RescaleReport {
        ell,
        lambda,
        max_discrepancy: 0.0,
        max_energy_identity_error: 0.0,
        max_length_identity_error: 0.0,
        matched_times: Vec::new(),
    };
    for (a, b) in unit.snapshots.iter().zip(&big.snapshots) {
        let length = a.curve.length();
        let d = a
            .curve
            .vertices()
            .iter()
            .zip(b.curve.vertices())
            .map(|(&p, &q)| (p - (1.0 / ell) * q).norm())
            .fold(0.0, f64::max);
        let (sa, sb) = (summarize(&a.curve), summarize(&b.curve));
        report.max_discrepancy = report.max_discrepancy.max(d / length);
        report.max_energy_identity_error = report.max_energy_identity_error.max(
            (sa.bending_energy - ell * sb.bending_energy).abs()
                / sa.bending_energy.max(f64::MIN_POSITIVE),
        );
        report.max_length_identity_error = report
            .max_length_identity_error
            .max((sa.length - sb.length / ell).abs() / sa.length);
        report.matched_times.push(a.time);
    }
    Ok(report)
}

/// [`rescale_check_from`] starting from the long asymmetric Fourier datum.
pub fn rescale_trajectory_check(
    ell: f64,
    lambda: f64,
    t_end: f64,
    params: &FlowParams,
) -> Result<RescaleReport> {
    let unit = crate::initial::fourier_initial(&crate::initial::FourierSpec::example_3_1(
        params.vertex_count,
    ))?;
    let times: Vec<f64> = (1..=5).map(|i| t_end * i as f64 / 5.0).collect();
    rescale_check_from(&unit, ell, lambda, params, &times)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elastica::{build_shape, ShapeKind, Side};
    use crate::initial::{fourier_initial, FourierSpec};

    fn circular_arc(n: usize, k0: f64, span: f64) -> PlanarCurve {
        let pts = (0..=n)
            .map(|i| {
                let a = -0.5 * span + span * i as f64 / n as f64;
                Vec2::new(a.sin() / k0, (a.cos() - (0.5 * span).cos()) / k0)
            })
            .collect();
        PlanarCurve::new(pts).unwrap()
    }

    fn small(n: usize) -> FlowParams {
        FlowParams {
            vertex_count: n,
            dt_initial: 1e-8,
            ..FlowParams::default()
        }
    }

    #[test]
    fn straight_segment_has_no_multiplier() {
        let c = PlanarCurve::from_xy(&(0..=20).map(|i| (i as f64 / 20.0, 0.0)).collect::<Vec<_>>())
            .unwrap();
        assert!(matches!(
            compute_lambda_nonlocal(&c),
            Err(Error::MultiplierUndefined { .. })
        ));
    }

    #[test]
    fn circular_arc_multiplier_is_curvature_squared() {
        let k0 = 3.0;
        let errs: Vec<f64> = [50, 100, 200, 400]
            .iter()
            .map(|&n| (compute_lambda_nonlocal(&circular_arc(n, k0, 2.0)).unwrap() - k0 * k0).abs())
            .collect();
        for w in errs.windows(2) {
            assert!(w[1] < 1e-11 || (w[0] / w[1]).log2() >= 1.9, "{errs:?}");
        }
        assert!(errs[3] < 1e-4 * k0 * k0);
    }

    #[test]
    fn built_arc_barely_moves() {
        let (shape, c) = build_shape(ShapeKind::Arc, Side::Upper, 1, 0.5, 1.0, 400).unwrap();
        let p = small(400);
        let state = FlowState::new(c.clone(), FlowMode::LengthPreserving, &p);
        assert!(
            (state.lambda_current - shape.lambda_exact).abs() < 1e-3 * shape.lambda_exact.abs()
        );
        let (next, rep) = advance_step(&state, FlowMode::LengthPreserving, &p).unwrap();
        assert!(rep.max_displacement < 1e-6, "{}", rep.max_displacement);
        assert!((rep.lambda - shape.lambda_exact).abs() < 1e-2 * shape.lambda_exact.abs());
        assert_eq!(next.curve.start(), c.start());
        assert_eq!(next.curve.end(), c.end());
    }

    #[test]
    fn length_preserving_step_decreases_energy() {
        let c = fourier_initial(&FourierSpec::example_3_1(200)).unwrap();
        let p = small(200);
        let mut state = FlowState::new(c, FlowMode::LengthPreserving, &p);
        let l0 = state.initial_length;
        for _ in 0..20 {
            let (next, rep) = advance_step(&state, FlowMode::LengthPreserving, &p).unwrap();
            assert!(rep.energy_after < rep.energy_before);
            assert!((rep.length_after - l0).abs() / l0 <= 1e-10);
            state = next;
        }
        assert_eq!(state.step_index, 20);
    }

    #[test]
    fn penalized_lyapunov_is_monotone() {
        let c = fourier_initial(&FourierSpec::example_3_1(100)).unwrap();
        let mode = FlowMode::Penalized { lambda: 9.0 };
        let mut last = f64::INFINITY;
        let traj = run_flow(c, mode, &small(100), 1e-3, &[], |_, rep| {
            assert!(rep.lyapunov_after <= rep.lyapunov_before * (1.0 + ENERGY_SLACK));
            assert!(rep.lyapunov_before <= last * (1.0 + 1e-10));
            last = rep.lyapunov_after;
        })
        .unwrap();
        assert!(traj.violations.is_empty());
    }

    #[test]
    fn reflection_symmetry_is_preserved() {
        let c = fourier_initial(&FourierSpec::example_3_3(200)).unwrap();
        let traj = run_flow(
            c,
            FlowMode::LengthPreserving,
            &small(200),
            1e-4,
            &[],
            |_, _| {},
        )
        .unwrap();
        let v = traj.final_state.curve.vertices();
        let n = v.len() - 1;
        for i in 0..=n {
            assert!((v[i].x + v[n - i].x - 1.0).abs() < 1e-8, "{i}");
            assert!((v[i].y - v[n - i].y).abs() < 1e-8, "{i}");
        }
    }

    #[test]
    fn snapshots_land_on_checkpoints() {
        let c = fourier_initial(&FourierSpec::example_3_1(100)).unwrap();
        let times = [0.0, 1e-5, 3e-5];
        let traj = run_flow(
            c,
            FlowMode::LengthPreserving,
            &small(100),
            5e-5,
            &times,
            |_, _| {},
        )
        .unwrap();
        let got: Vec<f64> = traj.snapshots.iter().map(|s| s.time).collect();
        assert_eq!(got, times);
        assert_eq!(traj.final_state.time, 5e-5);
        assert_eq!(traj.records.len(), traj.accepted_steps() + 1);
    }

    #[test]
    fn unit_rescale_matches_itself() {
        let p = small(100);
        let r = rescale_trajectory_check(1.0, 9.0, 1e-4, &p).unwrap();
        assert_eq!(r.max_discrepancy, 0.0);
        assert_eq!(r.max_energy_identity_error, 0.0);
        assert_eq!(r.matched_times.len(), 5);
    }

    #[test]
    fn incompatible_datum_is_rejected() {
        let c = circular_arc(100, 3.0, 2.0);
        let err = run_flow(
            c,
            FlowMode::LengthPreserving,
            &small(100),
            1e-4,
            &[],
            |_, _| {},
        );
        assert!(matches!(err, Err(Error::Incompatible(_))));
    }

    #[test]
    fn bad_parameters_are_reported() {
        let p = FlowParams {
            dt_min: -1.0,
            ..FlowParams::default()
        };
        assert!(p.problems().iter().any(|(f, _)| *f == "dt_min"));
        assert!(FlowMode::Penalized { lambda: -1.0 }.validate().is_err());
    }
}
