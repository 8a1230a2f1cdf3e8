//! Experiment configuration. The reference grammar is JSON; unknown keys
//! are rejected everywhere.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::curve::{PlanarCurve, Vec2};
use crate::error::{Error, Result};
use crate::flow::{FlowMode, FlowParams};
use crate::initial::{fourier_initial, well_prepared_loop, FourierFamily, FourierSpec};

/// A problem with one configuration field. `line` and `column` are set for
/// errors raised while reading the text.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
}

impl FieldError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
            line: None,
            column: None,
        }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => {
                write!(f, "{} (line {l}, column {c}): {}", self.field, self.message)
            }
            _ => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// Fourier datum sampled with `params.vertex_count` segments.
    Fourier {
        family: FourierFamily,
        #[serde(default)]
        a: f64,
        b: f64,
        c: f64,
        d: f64,
    },
    /// Loop datum with chord `r` and unit length.
    WellPrepared { r: f64 },
    /// Whitespace or comma separated `x y` pairs, one vertex per line.
    Polyline { path: PathBuf },
}

impl InitialSpec {
    pub fn from_fourier(spec: &FourierSpec) -> Self {
        InitialSpec::Fourier {
            family: spec.family,
            a: spec.a,
            b: spec.b,
            c: spec.c,
            d: spec.d,
        }
    }

    pub fn fourier_spec(&self, vertex_count: usize) -> Option<FourierSpec> {
        match *self {
            InitialSpec::Fourier {
                family: FourierFamily::Asymmetric,
                b,
                c,
                d,
                ..
            } => Some(FourierSpec::asymmetric(b, c, d, vertex_count)),
            InitialSpec::Fourier {
                family: FourierFamily::Symmetric,
                a,
                b,
                c,
                d,
            } => Some(FourierSpec::symmetric(a, b, c, d, vertex_count)),
            _ => None,
        }
    }

    /// Builds the initial polyline. Relative polyline paths resolve against `base`.
    pub fn build(&self, vertex_count: usize, base: &Path) -> Result<PlanarCurve> {
        match self {
            InitialSpec::Fourier { .. } => {
                fourier_initial(&self.fourier_spec(vertex_count).unwrap())
            }
            InitialSpec::WellPrepared { r } => well_prepared_loop(*r, vertex_count).map(|(c, _)| c),
            InitialSpec::Polyline { path } => {
                let full = if path.is_absolute() {
                    path.clone()
                } else {
                    base.join(path)
                };
                read_polyline(&std::fs::read_to_string(full)?)
            }
        }
    }
}

pub fn read_polyline(text: &str) -> Result<PlanarCurve> {
    let mut pts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('x') {
            continue;
        }
        let nums: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidArgument(format!("polyline line {}: {e}", i + 1)))?;
        if nums.len() != 2 {
            return Err(Error::InvalidArgument(format!(
                "polyline line {}: expected two numbers",
                i + 1
            )));
        }
        pts.push(Vec2::new(nums[0], nums[1]));
    }
    PlanarCurve::new(pts)
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub initial: InitialSpec,
    pub mode: FlowMode,
    #[serde(default)]
    pub params: FlowParams,
    pub t_end: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rescale_y: Option<f64>,
}

impl ExperimentConfig {
    pub fn problems(&self) -> Vec<FieldError> {
        let mut out = Vec::new();
        if self.id.trim().is_empty() {
            out.push(FieldError::new("id", "must be nonempty"));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            out.push(FieldError::new(
                "t_end",
                format!("must be finite and positive, got {}", self.t_end),
            ));
        }
        for (i, t) in self.snapshot_times.iter().enumerate() {
            if !(*t >= 0.0 && *t <= self.t_end) {
                out.push(FieldError::new(
                    format!("snapshot_times[{i}]"),
                    format!("{t} lies outside [0, t_end]"),
                ));
            }
        }
        if let Err(e) = self.mode.validate() {
            out.push(FieldError::new("mode.lambda", e.to_string()));
        }
        for (field, msg) in self.params.problems() {
            out.push(FieldError::new(format!("params.{field}"), msg));
        }
        match &self.initial {
            InitialSpec::WellPrepared { r } if !(*r > 0.0 && *r < 1.0) => {
                out.push(FieldError::new(
                    "initial.r",
                    format!("must lie in (0, 1), got {r}"),
                ));
            }
            InitialSpec::Fourier { a, b, c, d, .. }
                if ![a, b, c, d].iter().all(|v| v.is_finite()) =>
            {
                out.push(FieldError::new("initial", "coefficients must be finite"));
            }
            _ => {}
        }
        if let Some(s) = self.rescale_y {
            if !(s.is_finite() && s > 0.0) {
                out.push(FieldError::new(
                    "rescale_y",
                    format!("must be positive, got {s}"),
                ));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }
}

/// Parses and validates a configuration, collecting every field problem.
pub fn parse_config(text: &str) -> std::result::Result<ExperimentConfig, Vec<FieldError>> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = match serde_path_to_error::deserialize(de) {
        Ok(c) => c,
        Err(e) => {
            let path = e.path().to_string();
            let inner = e.into_inner();
            return Err(vec![FieldError {
                field: if path == "." {
                    "<document>".into()
                } else {
                    path
                },
                message: inner.to_string(),
                line: Some(inner.line()),
                column: Some(inner.column()),
            }]);
        }
    };
    let problems = cfg.problems();
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(problems)
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text).map_err(Error::Config)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "id": "demo",
        "initial": {"kind": "well_prepared", "r": 0.05},
        "mode": {"kind": "length_preserving"},
        "t_end": 0.1
    }"#;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.params, FlowParams::default());
        assert!(cfg.snapshot_times.is_empty());
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
        assert_eq!(cfg.rescale_y, None);
    }

    #[test]
    fn negative_dt_min_is_a_field_error() {
        let text = MINIMAL.replace(
            "\"t_end\": 0.1",
            "\"t_end\": 0.1, \"params\": {\"dt_min\": -1e-9}",
        );
        let errs = parse_config(&text).unwrap_err();
        assert!(errs.iter().any(|e| e.field == "params.dt_min"), "{errs:?}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let text = MINIMAL.replace("\"t_end\"", "\"t_ned\": 1, \"t_end\"");
        let errs = parse_config(&text).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].message.contains("t_ned"));
        assert!(errs[0].line.is_some());

        let nested = MINIMAL.replace("\"r\": 0.05", "\"r\": 0.05, \"radius\": 2");
        let errs = parse_config(&nested).unwrap_err();
        assert!(errs[0].message.contains("radius"), "{errs:?}");
        assert_eq!(errs[0].field, "initial");

        let params = MINIMAL.replace("\"t_end\": 0.1", "\"t_end\": 0.1, \"params\": {\"dt\": 1}");
        let errs = parse_config(&params).unwrap_err();
        assert_eq!(errs[0].field, "params.dt");
    }

    #[test]
    fn collects_several_problems() {
        let text = r#"{"id": " ", "initial": {"kind": "well_prepared", "r": 1.5},
            "mode": {"kind": "penalized", "lambda": -1}, "t_end": 1, "snapshot_times": [0.5, 2]}"#;
        let fields: Vec<String> = parse_config(text)
            .unwrap_err()
            .into_iter()
            .map(|e| e.field)
            .collect();
        for f in ["id", "initial.r", "mode.lambda", "snapshot_times[1]"] {
            assert!(fields.iter().any(|g| g == f), "{f} missing from {fields:?}");
        }
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(parse_config(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn polyline_reader_accepts_csv_with_header() {
        let text = "x,y\n0,0\n1,0.1\n2,0.2\n3,0.2\n4,0.1\n5,0\n6,0.1\n7,0.1\n8,0\n";
        let c = read_polyline(text).unwrap();
        assert_eq!(c.vertices().len(), 9);
        assert!(read_polyline("0 0 0\n").is_err());
    }
}
