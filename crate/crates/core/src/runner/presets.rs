//! The six shipped experiments and what each is expected to show.

use std::path::PathBuf;

use serde::Serialize;

use crate::diagnostics::LimitKind;
use crate::flow::{FlowMode, FlowParams};
use crate::initial::FourierSpec;

use super::config::{ExperimentConfig, InitialSpec};

pub const PRESET_IDS: [&str; 7] = [
    "ex3_1", "ex3_2", "ex3_3", "ex3_4", "ex3_5", "ex3_6a", "ex3_6b",
];

/// Which migration time an event expectation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventTime {
    /// End of the initial upper run.
    T0,
    /// Start of the terminal lower run.
    T1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventExpectation {
    pub event: EventTime,
    pub time: f64,
}

/// Soft window on event times, as a fraction of the expected time.
pub const EVENT_TOLERANCE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expectation {
    pub migrated: bool,
    pub limit: Option<LimitKind>,
    pub protrusion: bool,
    pub event: Option<EventExpectation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub config: ExperimentConfig,
    pub expectation: Expectation,
}

fn params(dt_max: f64) -> FlowParams {
    FlowParams {
        dt_initial: 1e-8f64.min(dt_max),
        dt_max,
        resample_trigger: 6.0,
        ..FlowParams::default()
    }
}

pub fn preset(id: &str) -> Option<Preset> {
    let n = FlowParams::default().vertex_count;
    let long = InitialSpec::from_fourier(&FourierSpec::example_3_1(n));
    let short = InitialSpec::from_fourier(&FourierSpec::example_3_2(n));
    let symmetric = InitialSpec::from_fourier(&FourierSpec::example_3_3(n));
    let lp = FlowMode::LengthPreserving;
    let pen = |lambda| FlowMode::Penalized { lambda };
    let expect = |migrated, limit, event: Option<(EventTime, f64)>| Expectation {
        migrated,
        limit,
        protrusion: false,
        event: event.map(|(event, time)| EventExpectation { event, time }),
    };
    let (initial, mode, dt_max, t_end, snapshot_times, rescale_y, expectation) = match id {
        "ex3_1" => (
            long,
            lp,
            1e-4,
            1.0,
            vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 1.0],
            None,
            expect(true, Some(LimitKind::ArcLower), Some((EventTime::T0, 0.1))),
        ),
        "ex3_2" => (
            short,
            lp,
            1e-5,
            0.02,
            vec![0.0, 2e-5, 5e-5, 9e-5, 1.5e-4, 3e-4, 1e-3, 3e-3, 0.02],
            None,
            Expectation {
                protrusion: true,
                ..expect(true, None, Some((EventTime::T0, 9.0e-5)))
            },
        ),
        "ex3_3" => (
            symmetric,
            lp,
            1e-4,
            0.5,
            vec![0.0, 0.001, 0.002, 0.004, 0.008, 0.02, 0.1, 0.5],
            None,
            expect(true, None, Some((EventTime::T0, 0.004))),
        ),
        "ex3_4" => (
            long,
            pen(9.0),
            1e-4,
            1.0,
            vec![0.0, 0.05, 0.1, 0.2, 0.24, 0.3, 1.0],
            None,
            expect(true, Some(LimitKind::Segment), Some((EventTime::T1, 0.24))),
        ),
        "ex3_5" => (
            short,
            pen(900.0),
            2e-7,
            0.01,
            vec![0.0, 5e-5, 1e-4, 2e-4, 5e-4, 1e-3, 0.01],
            Some(10.0),
            expect(false, None, None),
        ),
        "ex3_6a" => (
            symmetric,
            pen(16.0),
            1e-4,
            0.5,
            vec![0.0, 0.002, 0.004, 0.01, 0.03, 0.1, 0.5],
            None,
            expect(true, Some(LimitKind::Segment), None),
        ),
        "ex3_6b" => (
            symmetric,
            pen(900.0),
            2e-7,
            0.01,
            vec![0.0, 1e-4, 2e-4, 3e-4, 5e-4, 1e-3, 0.01],
            Some(10.0),
            expect(false, None, None),
        ),
        _ => return None,
    };
    Some(Preset {
        config: ExperimentConfig {
            id: id.to_string(),
            initial,
            mode,
            params: params(dt_max),
            t_end,
            snapshot_times,
            output_dir: PathBuf::from("out").join(id),
            rescale_y,
        },
        expectation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::config::parse_config;
    use std::f64::consts::PI;

    #[test]
    fn every_preset_is_a_valid_config() {
        for id in PRESET_IDS {
            let p = preset(id).unwrap();
            assert!(
                p.config.problems().is_empty(),
                "{id}: {:?}",
                p.config.problems()
            );
            assert_eq!(parse_config(&p.config.to_json()).unwrap(), p.config);
        }
        assert!(preset("ex3_7").is_none());
    }

    #[test]
    fn long_asymmetric_preset_coefficients() {
        let p = preset("ex3_1").unwrap();
        assert_eq!(p.config.mode, FlowMode::LengthPreserving);
        let spec = p.config.initial.fourier_spec(400).unwrap();
        assert_eq!(spec.b, 1.0 / PI);
        assert_eq!(spec.c, 0.4 / PI);
        assert_eq!(spec.d, 1.0);
        assert_eq!(spec.a, 2.0 * spec.b - 3.0 * spec.c + 1.0 / PI);
    }

    #[test]
    fn penalized_presets_share_their_data() {
        let same = |a: &str, b: &str| {
            preset(a).unwrap().config.initial == preset(b).unwrap().config.initial
        };
        assert!(same("ex3_1", "ex3_4"));
        assert!(same("ex3_2", "ex3_5"));
        assert!(same("ex3_3", "ex3_6a") && same("ex3_3", "ex3_6b"));
        assert_eq!(
            preset("ex3_6a").unwrap().config.mode,
            FlowMode::Penalized { lambda: 16.0 }
        );
        assert_eq!(
            preset("ex3_6b").unwrap().config.mode,
            FlowMode::Penalized { lambda: 900.0 }
        );
    }
}
