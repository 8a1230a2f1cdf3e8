//! Elastic flow of open planar curves with pinned ends and vanishing end
//! curvature: discrete geometry, reference elastica, a structure-preserving
//! flow solver, initial data, migration diagnostics and an experiment runner.

// Negated comparisons are used on purpose so that NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod curve;
pub mod diagnostics;
pub mod elastica;
pub mod error;
pub mod flow;
pub mod initial;
pub mod runner;

pub use curve::{HalfPlane, PlanarCurve, Vec2};
pub use error::{Error, Result};
pub use flow::{FlowMode, FlowParams, FlowState, Trajectory};
