//! Open planar polylines and their static geometry.
//!
//! A curve with `N + 1` vertices has `N` segments. Curvature lives on the
//! `N - 1` interior vertices as turning angle over dual length, so total
//! curvature is exactly the sum of the turning angles and the bending energy
//! is `sum(phi_i^2 / d_i)`.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible vertex count.
pub const MIN_VERTICES: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Counter-clockwise rotation by a right angle.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(self * v.x, self * v.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Immersed open polyline. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec2>", into = "Vec<Vec2>")]
pub struct PlanarCurve {
    vertices: Vec<Vec2>,
}

impl TryFrom<Vec<Vec2>> for PlanarCurve {
    type Error = Error;
    fn try_from(v: Vec<Vec2>) -> Result<Self> {
        PlanarCurve::new(v)
    }
}

impl From<PlanarCurve> for Vec<Vec2> {
    fn from(c: PlanarCurve) -> Self {
        c.vertices
    }
}

impl PlanarCurve {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        if vertices.len() < MIN_VERTICES {
            return Err(Error::TooFewVertices {
                required: MIN_VERTICES,
                found: vertices.len(),
            });
        }
        for (i, w) in vertices.windows(2).enumerate() {
            let h = (w[1] - w[0]).norm();
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::DegenerateCurve { segment: i });
            }
        }
        Ok(Self { vertices })
    }

    pub fn from_xy(points: &[(f64, f64)]) -> Result<Self> {
        Self::new(points.iter().map(|&(x, y)| Vec2::new(x, y)).collect())
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    /// Number of segments `N`.
    pub fn segments(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn start(&self) -> Vec2 {
        self.vertices[0]
    }

    pub fn end(&self) -> Vec2 {
        *self.vertices.last().unwrap()
    }

    pub fn chord(&self) -> f64 {
        (self.end() - self.start()).norm()
    }

    pub fn length(&self) -> f64 {
        self.vertices.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        self.vertices
            .windows(2)
            .map(|w| (w[1] - w[0]).norm())
            .collect()
    }

    /// Cumulative arclength at every vertex, starting from zero.
    pub fn arclength(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.vertices.len());
        let mut acc = 0.0;
        s.push(0.0);
        for w in self.vertices.windows(2) {
            acc += (w[1] - w[0]).norm();
            s.push(acc);
        }
        s
    }

    /// Ratio of the longest to the shortest segment.
    pub fn spacing_ratio(&self) -> f64 {
        let h = self.segment_lengths();
        let (lo, hi) = h.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        hi / lo
    }

    /// Applies `f` to every vertex and revalidates.
    pub fn map(&self, f: impl Fn(Vec2) -> Vec2) -> Result<Self> {
        Self::new(self.vertices.iter().map(|&p| f(p)).collect())
    }

    pub fn reflect_horizontal_axis(&self) -> Self {
        Self {
            vertices: self.vertices.iter().map(|p| Vec2::new(p.x, -p.y)).collect(),
        }
    }

    pub fn scaled(&self, sigma: f64) -> Result<Self> {
        self.map(|p| sigma * p)
    }

    /// Interior vertices, endpoints excluded.
    pub fn interior(&self) -> &[Vec2] {
        &self.vertices[1..self.vertices.len() - 1]
    }
}

/// Static per-segment and per-vertex quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFields {
    pub segment_lengths: Vec<f64>,
    /// Dual lengths at interior vertices `1..N`.
    pub dual_lengths: Vec<f64>,
    /// Lifted tangential angle per segment.
    pub theta: Vec<f64>,
    /// Turning angle at interior vertices, in `(-pi, pi]`.
    pub turning: Vec<f64>,
    pub signed_curvature: Vec<f64>,
    pub curvature_vector: Vec<Vec2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricSummary {
    pub length: f64,
    pub bending_energy: f64,
    pub total_curvature: f64,
    pub min_interior_y: f64,
    pub max_interior_y: f64,
    pub chord: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfPlane {
    StrictlyUpper,
    StrictlyLower,
    Crossing,
}

impl HalfPlane {
    pub fn as_str(self) -> &'static str {
        match self {
            HalfPlane::StrictlyUpper => "strictly_upper",
            HalfPlane::StrictlyLower => "strictly_lower",
            HalfPlane::Crossing => "crossing",
        }
    }

    pub fn reflected(self) -> Self {
        match self {
            HalfPlane::StrictlyUpper => HalfPlane::StrictlyLower,
            HalfPlane::StrictlyLower => HalfPlane::StrictlyUpper,
            HalfPlane::Crossing => HalfPlane::Crossing,
        }
    }
}

impl std::str::FromStr for HalfPlane {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strictly_upper" => Ok(HalfPlane::StrictlyUpper),
            "strictly_lower" => Ok(HalfPlane::StrictlyLower),
            "crossing" => Ok(HalfPlane::Crossing),
            other => Err(Error::InvalidArgument(format!(
                "unknown half-plane `{other}`"
            ))),
        }
    }
}

/// Signed turning angle from `a` to `b`, wrapped into `(-pi, pi]`.
pub fn turning_angle(a: Vec2, b: Vec2) -> f64 {
    let phi = a.cross(b).atan2(a.dot(b));
    if phi <= -PI {
        PI
    } else {
        phi
    }
}

pub fn compute_fields(curve: &PlanarCurve) -> DiscreteFields {
    let v = curve.vertices();
    let n = curve.segments();
    let edges: Vec<Vec2> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let segment_lengths: Vec<f64> = edges.iter().map(|e| e.norm()).collect();

    let mut dual_lengths = Vec::with_capacity(n - 1);
    let mut turning = Vec::with_capacity(n - 1);
    let mut signed_curvature = Vec::with_capacity(n - 1);
    let mut curvature_vector = Vec::with_capacity(n - 1);
    let mut theta = Vec::with_capacity(n);
    theta.push(edges[0].y.atan2(edges[0].x));

    for i in 1..n {
        let (hm, hp) = (segment_lengths[i - 1], segment_lengths[i]);
        let d = 0.5 * (hm + hp);
        let phi = turning_angle(edges[i - 1], edges[i]);
        theta.push(theta[i - 1] + phi);
        dual_lengths.push(d);
        turning.push(phi);
        signed_curvature.push(phi / d);
        curvature_vector.push((1.0 / d) * ((1.0 / hp) * edges[i] - (1.0 / hm) * edges[i - 1]));
    }

    DiscreteFields {
        segment_lengths,
        dual_lengths,
        theta,
        turning,
        signed_curvature,
        curvature_vector,
    }
}

pub fn summarize(curve: &PlanarCurve) -> GeometricSummary {
    let v = curve.vertices();
    let mut length = 0.0;
    let mut bending_energy = 0.0;
    let mut total_curvature = 0.0;
    let mut prev = v[1] - v[0];
    let mut h_prev = prev.norm();
    length += h_prev;
    for i in 1..v.len() - 1 {
        let e = v[i + 1] - v[i];
        let h = e.norm();
        let phi = turning_angle(prev, e);
        bending_energy += phi * phi / (0.5 * (h_prev + h));
        total_curvature += phi;
        length += h;
        prev = e;
        h_prev = h;
    }
    let (min_interior_y, max_interior_y) = curve
        .interior()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.y), hi.max(p.y))
        });
    GeometricSummary {
        length,
        bending_energy,
        total_curvature,
        min_interior_y,
        max_interior_y,
        chord: curve.chord(),
    }
}

/// Open half-plane membership of the interior vertices. Ties count as crossing.
pub fn halfplane_status(curve: &PlanarCurve) -> HalfPlane {
    let interior = curve.interior();
    if interior.iter().all(|p| p.y > 0.0) {
        HalfPlane::StrictlyUpper
    } else if interior.iter().all(|p| p.y < 0.0) {
        HalfPlane::StrictlyLower
    } else {
        HalfPlane::Crossing
    }
}

/// Signed curvature at the two endpoints, linearly extrapolated from the
/// first two interior vertices on each side.
pub fn end_curvature(curve: &PlanarCurve) -> (f64, f64) {
    let f = compute_fields(curve);
    let s = curve.arclength();
    let k = &f.signed_curvature;
    let m = k.len();
    let extrap =
        |s0: f64, s1: f64, k1: f64, s2: f64, k2: f64| k1 + (k2 - k1) * (s0 - s1) / (s2 - s1);
    let n = s.len() - 1;
    (
        extrap(s[0], s[1], k[0], s[2], k[1]),
        extrap(s[n], s[n - 1], k[m - 1], s[n - 2], k[m - 2]),
    )
}

/// Gradient of the discrete bending energy with respect to every vertex.
/// Endpoint entries are included; callers pinning the ends ignore them.
pub fn bending_gradient(curve: &PlanarCurve) -> Vec<Vec2> {
    let v = curve.vertices();
    let n = curve.segments();
    let edges: Vec<Vec2> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let lens: Vec<f64> = edges.iter().map(|e| e.norm()).collect();
    // dB/d(angle of edge j) and dB/d(length of edge j)
    let mut g_angle = vec![0.0; n];
    let mut g_len = vec![0.0; n];
    for i in 1..n {
        let d = 0.5 * (lens[i - 1] + lens[i]);
        let phi = turning_angle(edges[i - 1], edges[i]);
        let c_phi = 2.0 * phi / d;
        let c_d = -phi * phi / (d * d);
        g_angle[i] += c_phi;
        g_angle[i - 1] -= c_phi;
        g_len[i - 1] += 0.5 * c_d;
        g_len[i] += 0.5 * c_d;
    }
    let mut grad = vec![Vec2::ZERO; n + 1];
    for j in 0..n {
        let e = edges[j];
        let l = lens[j];
        let g = (g_angle[j] / (l * l)) * e.perp() + (g_len[j] / l) * e;
        grad[j + 1] += g;
        grad[j] -= g;
    }
    grad
}

pub fn length_gradient(curve: &PlanarCurve) -> Vec<Vec2> {
    let v = curve.vertices();
    let mut grad = vec![Vec2::ZERO; v.len()];
    for j in 0..v.len() - 1 {
        let e = v[j + 1] - v[j];
        let t = (1.0 / e.norm()) * e;
        grad[j + 1] += t;
        grad[j] -= t;
    }
    grad
}

/// Transversal crossings between non-adjacent segments, as arclength pairs
/// `(s_a, s_b)` with `s_a < s_b`.
pub fn self_intersections(curve: &PlanarCurve) -> Vec<(f64, f64)> {
    let v = curve.vertices();
    let s = curve.arclength();
    let n = curve.segments();
    let mut out = Vec::new();
    for i in 0..n {
        let (p, r) = (v[i], v[i + 1] - v[i]);
        let (bx0, bx1) = (v[i].x.min(v[i + 1].x), v[i].x.max(v[i + 1].x));
        let (by0, by1) = (v[i].y.min(v[i + 1].y), v[i].y.max(v[i + 1].y));
        for j in i + 2..n {
            let (q, w) = (v[j], v[j + 1] - v[j]);
            if q.x.max(v[j + 1].x) < bx0
                || q.x.min(v[j + 1].x) > bx1
                || q.y.max(v[j + 1].y) < by0
                || q.y.min(v[j + 1].y) > by1
            {
                continue;
            }
            let denom = r.cross(w);
            if denom == 0.0 {
                continue;
            }
            let t = (q - p).cross(w) / denom;
            let u = (q - p).cross(r) / denom;
            if (0.0..1.0).contains(&t) && (0.0..1.0).contains(&u) {
                out.push((s[i] + t * (s[i + 1] - s[i]), s[j] + u * (s[j + 1] - s[j])));
            }
        }
    }
    out
}

/// Lifted tangent angle at arclength `s`, taken from the segment containing it.
pub fn theta_at(fields: &DiscreteFields, arclength: &[f64], s: f64) -> f64 {
    let seg = match arclength.binary_search_by(|a| a.partial_cmp(&s).unwrap()) {
        Ok(i) => i.min(fields.theta.len() - 1),
        Err(i) => i.saturating_sub(1).min(fields.theta.len() - 1),
    };
    fields.theta[seg]
}

/// Piecewise-cubic Hermite interpolant through the vertices, parameterized by
/// cumulative chord length.
struct CubicPath<'a> {
    pts: &'a [Vec2],
    knots: Vec<f64>,
    tangents: Vec<Vec2>,
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

impl<'a> CubicPath<'a> {
    fn new(curve: &'a PlanarCurve) -> Self {
        let pts = curve.vertices();
        let knots = curve.arclength();
        let n = pts.len() - 1;
        let h: Vec<f64> = (0..n).map(|i| knots[i + 1] - knots[i]).collect();
        let slope: Vec<Vec2> = (0..n)
            .map(|i| (1.0 / h[i]) * (pts[i + 1] - pts[i]))
            .collect();
        let mut tangents = Vec::with_capacity(n + 1);
        tangents.push((1.0 / (h[0] + h[1])) * ((2.0 * h[0] + h[1]) * slope[0] - h[0] * slope[1]));
        for i in 1..n {
            let w = h[i - 1] + h[i];
            tangents.push((h[i] / w) * slope[i - 1] + (h[i - 1] / w) * slope[i]);
        }
        tangents.push(
            (1.0 / (h[n - 1] + h[n - 2]))
                * ((2.0 * h[n - 1] + h[n - 2]) * slope[n - 1] - h[n - 1] * slope[n - 2]),
        );
        Self {
            pts,
            knots,
            tangents,
        }
    }

    fn eval(&self, i: usize, t: f64) -> Vec2 {
        let h = self.knots[i + 1] - self.knots[i];
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.pts[i]
            + (h10 * h) * self.tangents[i]
            + h01 * self.pts[i + 1]
            + (h11 * h) * self.tangents[i + 1]
    }

    fn speed(&self, i: usize, t: f64) -> f64 {
        let h = self.knots[i + 1] - self.knots[i];
        let t2 = t * t;
        let d00 = 6.0 * t2 - 6.0 * t;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = -6.0 * t2 + 6.0 * t;
        let d11 = 3.0 * t2 - 2.0 * t;
        (d00 * self.pts[i]
            + (d10 * h) * self.tangents[i]
            + d01 * self.pts[i + 1]
            + (d11 * h) * self.tangents[i + 1])
            .norm()
    }

    /// Arclength of piece `i` over local parameter `[0, t]`.
    fn partial_length(&self, i: usize, t: f64) -> f64 {
        let half = 0.5 * t;
        GL5_NODES
            .iter()
            .zip(GL5_WEIGHTS.iter())
            .map(|(&x, &w)| w * self.speed(i, half * (x + 1.0)))
            .sum::<f64>()
            * half
    }
}

/// Resamples to `n` segments of equal arclength along a piecewise-cubic
/// interpolant. Endpoints are copied exactly.
pub fn resample_uniform(curve: &PlanarCurve, n: usize) -> Result<PlanarCurve> {
    if n < MIN_VERTICES - 1 {
        return Err(Error::InvalidArgument(format!(
            "resample target {n} < {}",
            MIN_VERTICES - 1
        )));
    }
    let path = CubicPath::new(curve);
    let pieces = curve.segments();
    let piece_len: Vec<f64> = (0..pieces).map(|i| path.partial_length(i, 1.0)).collect();
    let mut cum = Vec::with_capacity(pieces + 1);
    cum.push(0.0);
    for l in &piece_len {
        cum.push(cum.last().unwrap() + l);
    }
    let total = cum[pieces];
    let mut out = Vec::with_capacity(n + 1);
    out.push(curve.start());
    let mut piece = 0;
    for k in 1..n {
        let target = total * k as f64 / n as f64;
        while piece + 1 < pieces && cum[piece + 1] < target {
            piece += 1;
        }
        let want = target - cum[piece];
        let len = piece_len[piece];
        // Newton on the monotone local arclength, with a bisection fallback.
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut t = (want / len).clamp(0.0, 1.0);
        for _ in 0..60 {
            let f = path.partial_length(piece, t) - want;
            if f.abs() <= 1e-15 * total {
                break;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let sp = path.speed(piece, t);
            let next = t - f / sp;
            t = if sp > 0.0 && next > lo && next < hi {
                next
            } else {
                0.5 * (lo + hi)
            };
        }
        out.push(path.eval(piece, t));
    }
    out.push(curve.end());
    PlanarCurve::new(out)
}
