//! Reference elastica for the pinned problem: convex arcs, loops and their
//! N-fold extensions.
//!
//! Every shape is an inflectional elastica with signed curvature
//! `k(s) = ±2 q alpha cn(alpha s - K(q), q)` and `alpha L = 2 N K(q)`, so the
//! curvature vanishes at both ends. The chord-to-length ratio of such a
//! piece is `2E/K - 1`: positive ratios give arcs (`q < q*`), negative ones
//! give loops (`q > q*`), where `2E(q*) = K(q*)` is the figure-eight modulus.
//!
//! The builder integrates the tangent numerically and checks the resulting
//! chord, half-plane and angle windows; a mismatch is reported as
//! [`Error::ParameterizationValidation`] rather than patched up.

pub mod elliptic;

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::curve::{
    compute_fields, halfplane_status, self_intersections, theta_at, HalfPlane, PlanarCurve, Vec2,
};
use crate::error::{Error, Result};
pub use elliptic::{elliptic_ke, elliptic_ke_mod, jacobi, EllipticPair, Jacobi, Modulus};

/// Smallest admissible ratio distance from 0 and 1.
pub const RATIO_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Arc,
    Loop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Upper,
    Lower,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Upper => 1.0,
            Side::Lower => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Side::Upper => Side::Lower,
            Side::Lower => Side::Upper,
        }
    }

    pub fn halfplane(self) -> HalfPlane {
        match self {
            Side::Upper => HalfPlane::StrictlyUpper,
            Side::Lower => HalfPlane::StrictlyLower,
        }
    }
}

impl std::str::FromStr for ShapeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arc" => Ok(ShapeKind::Arc),
            "loop" => Ok(ShapeKind::Loop),
            _ => Err(Error::InvalidArgument(format!("unknown shape kind `{s}`"))),
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "upper" => Ok(Side::Upper),
            "-" | "lower" => Ok(Side::Lower),
            _ => Err(Error::InvalidArgument(format!("unknown sign `{s}`"))),
        }
    }
}

/// `2E(q)/K(q) - 1`, strictly decreasing from 1 at `q = 0` to -1 as `q -> 1`.
pub fn chord_ratio(m: Modulus) -> f64 {
    let p = elliptic_ke_mod(m);
    2.0 * p.e / p.k - 1.0
}

fn bisect(mut lo: f64, mut hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    // f(lo) and f(hi) have opposite signs; runs until the bracket stops shrinking.
    let f_lo = f(lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Modulus of the figure-eight elastica, `2E(q*) = K(q*)`.
pub fn critical_modulus() -> Modulus {
    let q = bisect(0.5, 0.99, |q| chord_ratio(Modulus::new(q).unwrap()));
    Modulus::new(q).unwrap()
}

/// Smallest representable complementary modulus used by the loop branch.
const MIN_COMPLEMENT: f64 = 1e-300;

/// Solves the chord equation of `kind` for the ratio `r = chord / length`.
pub fn solve_modulus(r: f64, kind: ShapeKind) -> Result<Modulus> {
    if !(r > RATIO_MARGIN && r < 1.0 - RATIO_MARGIN) {
        return Err(Error::InvalidArgument(format!(
            "chord ratio {r} outside ({RATIO_MARGIN}, {})",
            1.0 - RATIO_MARGIN
        )));
    }
    let star = critical_modulus();
    let m = match kind {
        ShapeKind::Arc => {
            let q = bisect(0.0, star.q(), |q| chord_ratio(Modulus::new(q).unwrap()) - r);
            Modulus::new(q)?
        }
        ShapeKind::Loop => {
            let lo = MIN_COMPLEMENT.ln();
            let at_lo = chord_ratio(Modulus::from_complement(MIN_COMPLEMENT)?);
            if at_lo > -r {
                return Err(Error::InvalidArgument(format!(
                    "loop ratio {r} exceeds the representable limit {:.6}",
                    -at_lo
                )));
            }
            let t = bisect(lo, star.complement().ln(), |t| {
                chord_ratio(Modulus::from_complement(t.exp()).unwrap()) + r
            });
            Modulus::from_complement(t.exp())?
        }
    };
    let target = match kind {
        ShapeKind::Arc => r,
        ShapeKind::Loop => -r,
    };
    let residual = chord_ratio(m) - target;
    if residual.abs() > 1e-12 {
        return Err(Error::Validation(format!(
            "modulus equation residual {residual:e}"
        )));
    }
    Ok(m)
}

/// Closed-form bending energy `16 N^2 K (E - q'^2 K) / L`.
pub fn closed_form_energy(m: Modulus, fold: u32, total_length: f64) -> f64 {
    let p = elliptic_ke_mod(m);
    let qc2 = m.complement() * m.complement();
    let n = fold as f64;
    16.0 * n * n * p.k * (p.e - qc2 * p.k) / total_length
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticaShape {
    pub kind: ShapeKind,
    pub side: Side,
    pub fold: u32,
    pub chord: f64,
    pub total_length: f64,
    pub modulus: f64,
    pub modulus_complement: f64,
    pub elliptic_k: f64,
    pub elliptic_e: f64,
    /// Curvature scale, `alpha L = 2 N K`.
    pub alpha: f64,
    pub bending_energy_closed_form: f64,
    /// Least-squares multiplier of the sampled polyline.
    pub lambda_multiplier: f64,
    /// Analytic multiplier `2 alpha^2 (2 q^2 - 1)`.
    pub lambda_exact: f64,
}

impl ElasticaShape {
    /// Shape parameters without sampling a polyline.
    pub fn new(
        kind: ShapeKind,
        side: Side,
        fold: u32,
        chord: f64,
        total_length: f64,
    ) -> Result<Self> {
        if fold == 0 {
            return Err(Error::InvalidArgument("fold must be at least 1".into()));
        }
        if !(chord > 0.0 && chord < total_length && total_length.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < chord < length, got {chord} and {total_length}"
            )));
        }
        let m = solve_modulus(chord / total_length, kind)?;
        let p = elliptic_ke_mod(m);
        let alpha = 2.0 * fold as f64 * p.k / total_length;
        let qc2 = m.complement() * m.complement();
        let lambda_exact = 2.0 * alpha * alpha * (1.0 - 2.0 * qc2);
        Ok(Self {
            kind,
            side,
            fold,
            chord,
            total_length,
            modulus: m.q(),
            modulus_complement: m.complement(),
            elliptic_k: p.k,
            elliptic_e: p.e,
            alpha,
            bending_energy_closed_form: closed_form_energy(m, fold, total_length),
            lambda_multiplier: lambda_exact,
            lambda_exact,
        })
    }

    pub fn modulus(&self) -> Modulus {
        Modulus::from_parts(self.modulus, self.modulus_complement)
    }

    pub fn ratio(&self) -> f64 {
        self.chord / self.total_length
    }

    /// Sign of the curvature on the first lobe.
    fn curvature_sign(&self) -> f64 {
        match (self.kind, self.side) {
            (ShapeKind::Arc, Side::Upper) | (ShapeKind::Loop, Side::Lower) => -1.0,
            (ShapeKind::Arc, Side::Lower) | (ShapeKind::Loop, Side::Upper) => 1.0,
        }
    }

    /// Signed curvature at arclength `s`; valid on the whole real line
    /// (odd and antiperiodic continuation).
    pub fn curvature_at(&self, s: f64) -> f64 {
        let j = jacobi(self.alpha * s - self.elliptic_k, self.modulus());
        self.curvature_sign() * 2.0 * self.modulus * self.alpha * j.cn
    }

    /// Unit tangent at `s` in the profile frame, where the chord is horizontal.
    pub fn profile_tangent(&self, s: f64) -> Vec2 {
        let q = self.modulus;
        let j = jacobi(self.alpha * s - self.elliptic_k, self.modulus());
        Vec2::new(
            1.0 - 2.0 * q * q * j.sn * j.sn,
            self.curvature_sign() * 2.0 * q * j.sn * j.dn,
        )
    }

    /// Positions in the profile frame at the arclengths `s` (sorted),
    /// integrated from `s[0]` by 5-point Gauss-Legendre per interval.
    pub fn profile_positions(&self, s: &[f64]) -> Vec<Vec2> {
        const NODES: [f64; 5] = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683_1,
            0.0,
            0.538_469_310_105_683_1,
            0.906_179_845_938_664,
        ];
        const WEIGHTS: [f64; 5] = [
            0.236_926_885_056_189_1,
            0.478_628_670_499_366_5,
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
        ];
        let mut out = Vec::with_capacity(s.len());
        let mut p = Vec2::ZERO;
        out.push(p);
        for w in s.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            let mut acc = Vec2::ZERO;
            for (x, wt) in NODES.iter().zip(WEIGHTS.iter()) {
                acc += *wt * self.profile_tangent(mid + half * x);
            }
            p += half * acc;
            out.push(p);
        }
        out
    }
}

/// Samples `shape` at `samples` equal arclength steps and validates the result.
pub fn build_shape(
    kind: ShapeKind,
    side: Side,
    fold: u32,
    chord: f64,
    total_length: f64,
    samples: usize,
) -> Result<(ElasticaShape, PlanarCurve)> {
    if samples < 200 {
        return Err(Error::InvalidArgument(format!(
            "samples must be at least 200, got {samples}"
        )));
    }
    let mut shape = ElasticaShape::new(kind, side, fold, chord, total_length)?;
    let s: Vec<f64> = (0..=samples)
        .map(|i| total_length * i as f64 / samples as f64)
        .collect();
    let raw = shape.profile_positions(&s);
    let c = *raw.last().unwrap() - raw[0];
    if (c.norm() - chord).abs() > 1e-6 * total_length {
        return Err(Error::ParameterizationValidation(format!(
            "integrated chord {} differs from requested {chord}",
            c.norm()
        )));
    }
    let angle = -c.y.atan2(c.x);
    let mut pts: Vec<Vec2> = raw.iter().map(|&p| (p - raw[0]).rotate(angle)).collect();
    let last = pts.len() - 1;
    if (pts[last] - Vec2::new(chord, 0.0)).norm() > 1e-9 {
        return Err(Error::ParameterizationValidation(format!(
            "endpoint {:?} not at ({chord}, 0)",
            pts[last]
        )));
    }
    pts[0] = Vec2::ZERO;
    pts[last] = Vec2::new(chord, 0.0);
    let curve = PlanarCurve::new(pts)?;
    shape.lambda_multiplier = fit_multiplier(&curve)?;
    if fold == 1 {
        validate_first_fold(&shape, &curve)?;
    }
    Ok((shape, curve))
}

fn validate_first_fold(shape: &ElasticaShape, curve: &PlanarCurve) -> Result<()> {
    let fail = |m: String| Err(Error::ParameterizationValidation(m));
    if halfplane_status(curve) != shape.side.halfplane() {
        return fail(format!(
            "{:?} {:?} left its half-plane",
            shape.kind, shape.side
        ));
    }
    let f = compute_fields(curve);
    let sg = shape.side.sign();
    let (t0, t1) = (sg * f.theta[0], sg * *f.theta.last().unwrap());
    let turning_ok = match shape.kind {
        ShapeKind::Arc => f.turning.iter().all(|&p| sg * p < 0.0),
        ShapeKind::Loop => f.turning.iter().all(|&p| sg * p > 0.0),
    };
    if !turning_ok {
        return fail("tangent angle is not strictly monotone".into());
    }
    let windows_ok = match shape.kind {
        ShapeKind::Arc => t0 > 0.0 && t0 < PI && t1 > -PI && t1 < 0.0,
        ShapeKind::Loop => t0 > 0.0 && t0 < FRAC_PI_2 && t1 > 1.5 * PI && t1 < 2.0 * PI,
    };
    if !windows_ok {
        return fail(format!("end angles ({t0}, {t1}) outside their windows"));
    }
    if shape.kind == ShapeKind::Loop {
        let pairs = self_intersections(curve);
        if pairs.len() != 1 {
            return fail(format!("loop has {} self-intersections", pairs.len()));
        }
        let s = curve.arclength();
        let (a, b) = pairs[0];
        let (ta, tb) = (sg * theta_at(&f, &s, a), sg * theta_at(&f, &s, b));
        if !(ta > 0.0 && ta < FRAC_PI_2 && tb > 1.5 * PI && tb < 2.0 * PI) {
            return fail(format!(
                "crossing angles ({ta}, {tb}) outside their windows"
            ));
        }
    }
    Ok(())
}

/// Per-vertex curvature data on the stencils where a centred second
/// difference of curvature exists: `(k, k_ss, dual length)`.
pub fn curvature_stencils(curve: &PlanarCurve) -> Result<Vec<(f64, f64, f64)>> {
    let f = compute_fields(curve);
    let k = &f.signed_curvature;
    if k.len() < 3 {
        return Err(Error::TooFewVertices {
            required: 5,
            found: curve.vertices().len(),
        });
    }
    let s = curve.arclength();
    // interior vertex j has curvature k[j - 1]
    Ok((2..curve.segments() - 1)
        .map(|j| {
            let (km, k0, kp) = (k[j - 2], k[j - 1], k[j]);
            let (hm, hp) = (s[j] - s[j - 1], s[j + 1] - s[j]);
            let kss = 2.0 * ((kp - k0) / hp - (k0 - km) / hm) / (hm + hp);
            (k0, kss, f.dual_lengths[j - 1])
        })
        .collect())
}

/// Least-squares multiplier of `2 k'' + k^3 = lambda k` over interior stencils.
pub fn fit_multiplier(curve: &PlanarCurve) -> Result<f64> {
    let st = curvature_stencils(curve)?;
    let (num, den) = st.iter().fold((0.0, 0.0), |(n, d), &(k, kss, w)| {
        (n + (2.0 * kss + k * k * k) * k * w, d + k * k * w)
    });
    if !(den > 1e-14) {
        return Err(Error::MultiplierUndefined { energy: den });
    }
    Ok(num / den)
}

/// Discrete `L^2(ds)` norm of `2 k'' + k^3 - lambda k`.
///
/// Meaningful for near-uniform spacing (segment ratio below about 1.1).
pub fn residual_el(curve: &PlanarCurve, lambda: f64) -> Result<f64> {
    let st = curvature_stencils(curve)?;
    Ok(st
        .iter()
        .map(|&(k, kss, w)| {
            let r = 2.0 * kss + k * k * k - lambda * k;
            r * r * w
        })
        .sum::<f64>()
        .sqrt())
}

/// The two evaluations of the minimal energy of unit-length curves with
/// coincident endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarpiStar {
    /// `16 K^2 (q*^2 - 1/2)`.
    pub closed_form: f64,
    /// Composite Simpson quadrature of `k^2` over dense arc and loop builds
    /// at a tiny ratio, averaged so the `O(r)` offsets cancel.
    pub quadrature: f64,
}

impl VarpiStar {
    pub fn value(&self) -> f64 {
        self.closed_form
    }
}

/// Ratio at which the quadrature route is evaluated.
pub const VARPI_QUADRATURE_RATIO: f64 = 1e-5;

pub fn varpi_star() -> Result<VarpiStar> {
    let m = critical_modulus();
    let p = elliptic_ke_mod(m);
    let closed_form = 16.0 * p.k * (p.e - m.complement() * m.complement() * p.k);

    let samples = 20_000;
    let simpson = |shape: &ElasticaShape| {
        let h = shape.total_length / samples as f64;
        let mut acc = 0.0;
        for i in 0..=samples {
            let w = if i == 0 || i == samples {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let k = shape.curvature_at(h * i as f64);
            acc += w * k * k;
        }
        acc * h / 3.0
    };
    let (arc, _) = build_shape(
        ShapeKind::Arc,
        Side::Upper,
        1,
        VARPI_QUADRATURE_RATIO,
        1.0,
        samples,
    )?;
    let (lp, _) = build_shape(
        ShapeKind::Loop,
        Side::Upper,
        1,
        VARPI_QUADRATURE_RATIO,
        1.0,
        samples,
    )?;
    let quadrature = 0.5 * (simpson(&arc) + simpson(&lp));
    if ((quadrature - closed_form) / closed_form).abs() > 1e-8 {
        return Err(Error::Validation(format!(
            "varpi* routes disagree: closed form {closed_form}, quadrature {quadrature}"
        )));
    }
    Ok(VarpiStar {
        closed_form,
        quadrature,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRow {
    pub r: f64,
    pub b_arc: f64,
    pub b_loop: f64,
    pub four_b_arc: f64,
    pub two_varpi: f64,
    pub arc_below_loop: bool,
    pub loop_below_2varpi: bool,
    pub fourfold_arc_above_loop: bool,
}

/// Fold-1 arc and loop energies at unit length.
pub fn unit_energies(r: f64) -> Result<(f64, f64)> {
    let arc = closed_form_energy(solve_modulus(r, ShapeKind::Arc)?, 1, 1.0);
    let lp = closed_form_energy(solve_modulus(r, ShapeKind::Loop)?, 1, 1.0);
    Ok((arc, lp))
}

pub fn energy_table(r_values: &[f64], varpi: f64) -> Result<Vec<EnergyRow>> {
    r_values
        .iter()
        .map(|&r| {
            let (b_arc, b_loop) = unit_energies(r)?;
            Ok(EnergyRow {
                r,
                b_arc,
                b_loop,
                four_b_arc: 4.0 * b_arc,
                two_varpi: 2.0 * varpi,
                arc_below_loop: b_arc < b_loop,
                loop_below_2varpi: b_loop <= 2.0 * varpi,
                fourfold_arc_above_loop: 4.0 * b_arc >= b_loop,
            })
        })
        .collect()
}

/// Ratio where `4 B_arc = B_loop`.
pub fn fourfold_crossover() -> Result<f64> {
    let g = |r: f64| {
        unit_energies(r)
            .map(|(a, l)| 4.0 * a - l)
            .unwrap_or(f64::NAN)
    };
    let (lo, hi) = (0.05, 0.95);
    if !(g(lo) > 0.0 && g(hi) < 0.0) {
        return Err(Error::Validation("crossover not bracketed".into()));
    }
    Ok(bisect(lo, hi, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::summarize;

    #[test]
    fn critical_modulus_value() {
        let m = critical_modulus();
        assert!((m.q() - 0.908_908_557_548_541_5).abs() < 1e-12, "{}", m.q());
        let p = elliptic_ke_mod(m);
        assert!((2.0 * p.e - p.k).abs() < 1e-13);
    }

    #[test]
    fn chord_ratio_is_monotone() {
        let mut prev = chord_ratio(Modulus::new(0.0).unwrap());
        assert!((prev - 1.0).abs() < 1e-15);
        for i in 1..2000 {
            let r = chord_ratio(Modulus::new(i as f64 / 2000.0).unwrap());
            assert!(r < prev);
            prev = r;
        }
        assert!(prev > -1.0);
    }

    #[test]
    fn modulus_limits() {
        let near_zero_arc = solve_modulus(1e-5, ShapeKind::Arc).unwrap();
        let near_zero_loop = solve_modulus(1e-5, ShapeKind::Loop).unwrap();
        let star = critical_modulus().q();
        assert!((near_zero_arc.q() - star).abs() < 1e-4 && near_zero_arc.q() < star);
        assert!((near_zero_loop.q() - star).abs() < 1e-4 && near_zero_loop.q() > star);
        assert!(solve_modulus(1.0 - 2e-6, ShapeKind::Arc).unwrap().q() < 3e-3);
        assert!(solve_modulus(0.99, ShapeKind::Loop).unwrap().complement() < 1e-80);
        assert!(solve_modulus(1.5, ShapeKind::Arc).is_err());
        assert!(solve_modulus(0.0, ShapeKind::Arc).is_err());
    }

    #[test]
    fn arc_and_loop_sides() {
        let (_, arc) = build_shape(ShapeKind::Arc, Side::Upper, 1, 0.5, 1.0, 400).unwrap();
        assert_eq!(halfplane_status(&arc), HalfPlane::StrictlyUpper);
        assert!(summarize(&arc).total_curvature < 0.0);
        let (_, lp) = build_shape(ShapeKind::Loop, Side::Upper, 1, 0.5, 1.0, 400).unwrap();
        assert_eq!(halfplane_status(&lp), HalfPlane::StrictlyUpper);
        let tc = summarize(&lp).total_curvature;
        assert!(tc > PI && tc < 3.0 * PI, "tc {tc}");
    }

    #[test]
    fn reflection_symmetry() {
        for kind in [ShapeKind::Arc, ShapeKind::Loop] {
            let (_, up) = build_shape(kind, Side::Upper, 1, 0.3, 1.0, 300).unwrap();
            let (_, down) = build_shape(kind, Side::Lower, 1, 0.3, 1.0, 300).unwrap();
            for (a, b) in up.vertices().iter().zip(down.vertices()) {
                assert!((a.x - b.x).abs() < 1e-12 && (a.y + b.y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fold_scaling_and_closed_form_energy() {
        for kind in [ShapeKind::Arc, ShapeKind::Loop] {
            let (s1, c1) = build_shape(kind, Side::Upper, 1, 0.2, 1.0, 4000).unwrap();
            let (s2, c2) = build_shape(kind, Side::Upper, 2, 0.2, 1.0, 8000).unwrap();
            assert!(
                (s2.bending_energy_closed_form - 4.0 * s1.bending_energy_closed_form).abs()
                    < 1e-10 * s2.bending_energy_closed_form
            );
            let b1 = summarize(&c1).bending_energy;
            let b2 = summarize(&c2).bending_energy;
            assert!(
                (b1 / s1.bending_energy_closed_form - 1.0).abs() < 1e-5,
                "{b1} vs {}",
                s1.bending_energy_closed_form
            );
            assert!((b2 / s2.bending_energy_closed_form - 1.0).abs() < 1e-5);
            assert!((c2.chord() - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_scales_inversely_with_length() {
        let a = ElasticaShape::new(ShapeKind::Arc, Side::Upper, 1, 0.3, 1.0).unwrap();
        let b = ElasticaShape::new(ShapeKind::Arc, Side::Upper, 1, 0.6, 2.0).unwrap();
        assert!((a.bending_energy_closed_form - 2.0 * b.bending_energy_closed_form).abs() < 1e-12);
    }

    #[test]
    fn straight_segment_has_zero_residual() {
        let c =
            PlanarCurve::new((0..=20).map(|i| Vec2::new(i as f64 / 20.0, 0.0)).collect()).unwrap();
        assert_eq!(residual_el(&c, 0.0).unwrap(), 0.0);
        assert!(matches!(
            fit_multiplier(&c),
            Err(Error::MultiplierUndefined { .. })
        ));
    }

    #[test]
    fn multiplier_fit_matches_closed_form() {
        let (s, _) = build_shape(ShapeKind::Arc, Side::Lower, 1, 0.5, 1.0, 2000).unwrap();
        assert!(
            (s.lambda_multiplier - s.lambda_exact).abs() < 1e-3 * s.lambda_exact.abs().max(1.0)
        );
    }

    #[test]
    fn wrong_multiplier_leaves_residual() {
        let mut prev = 0.0;
        for n in [400, 800, 1600] {
            let (s, c) = build_shape(ShapeKind::Arc, Side::Upper, 1, 0.5, 1.0, n).unwrap();
            let r = residual_el(&c, s.lambda_multiplier + 1.0).unwrap();
            assert!(r > 0.1);
            if prev > 0.0 {
                assert!((r - prev).abs() < 0.01 * r);
            }
            prev = r;
        }
    }

    #[test]
    fn varpi_dual_route() {
        let v = varpi_star().unwrap();
        assert!(
            (v.closed_form - 28.109_902_435_330_35).abs() < 1e-9,
            "{}",
            v.closed_form
        );
        assert!(((v.quadrature - v.closed_form) / v.closed_form).abs() < 1e-8);
    }

    #[test]
    fn energy_table_flags() {
        let v = varpi_star().unwrap().value();
        let rows = energy_table(&[0.05, 0.99], v).unwrap();
        assert!(
            rows[0].arc_below_loop && rows[0].fourfold_arc_above_loop && rows[0].loop_below_2varpi
        );
        assert!(rows[1].arc_below_loop && !rows[1].fourfold_arc_above_loop);
    }

    #[test]
    fn crossover_regression() {
        // Located independently with 40-digit arithmetic.
        let r = fourfold_crossover().unwrap();
        assert!((r - 0.418_293_430_108_691_4).abs() < 1e-9, "{r}");
    }
}
