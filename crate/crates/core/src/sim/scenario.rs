use serde::{Deserialize, Serialize};

use super::piecewise::PiecewiseHazardSpec;
use crate::error::{Error, Result};

/// Control hazard giving an exact median of 2 years.
pub const LN2_OVER_2: f64 = std::f64::consts::LN_2 / 2.0;
/// The rounded control hazard quoted alongside the 2-year median.
pub const ROUNDED_RATE: f64 = 0.35;

pub const ACCRUAL_YEARS: f64 = 3.0;
pub const FOLLOWUP_YEARS: f64 = 4.0;

/// Which side of the change-point carries the benefit in the crossing
/// scenario.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingOrientation {
    /// Ratio 1/HR on [0, 1] and HR afterwards: early harm, later benefit.
    #[default]
    HarmFirst,
    /// Ratio HR on [0, 1] and 1/HR afterwards.
    BenefitFirst,
}

/// The six generating scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Scenario {
    Null,
    ProportionalHazards,
    EarlyEffect,
    MiddleEffect,
    DelayedEffect,
    CrossingHazards,
}

impl TryFrom<u8> for Scenario {
    type Error = Error;

    fn try_from(id: u8) -> Result<Self> {
        Ok(match id {
            1 => Scenario::Null,
            2 => Scenario::ProportionalHazards,
            3 => Scenario::EarlyEffect,
            4 => Scenario::MiddleEffect,
            5 => Scenario::DelayedEffect,
            6 => Scenario::CrossingHazards,
            _ => return Err(Error::invalid(format!("scenario must be 1 to 6, got {id}"))),
        })
    }
}

impl From<Scenario> for u8 {
    fn from(s: Scenario) -> u8 {
        s.id()
    }
}

/// Analysis change-points used by default for one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisChangePoints {
    pub early: f64,
    pub middle: (f64, f64),
    pub delayed: f64,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Null,
        Scenario::ProportionalHazards,
        Scenario::EarlyEffect,
        Scenario::MiddleEffect,
        Scenario::DelayedEffect,
        Scenario::CrossingHazards,
    ];

    pub fn id(self) -> u8 {
        self as u8 + 1
    }

    /// Generating hazard: the control rate times a ratio on each segment.
    pub fn hazard_spec(
        self,
        control_rate: f64,
        hr: f64,
        orientation: CrossingOrientation,
    ) -> Result<PiecewiseHazardSpec> {
        if !(hr.is_finite() && hr > 0.0) {
            return Err(Error::invalid(format!("hazard ratio must be positive, got {hr}")));
        }
        let (cps, hrs) = match self {
            Scenario::Null => (vec![], vec![1.0]),
            Scenario::ProportionalHazards => (vec![], vec![hr]),
            Scenario::EarlyEffect => (vec![1.0], vec![hr, 1.0]),
            Scenario::MiddleEffect => (vec![1.0, 4.0], vec![1.0, hr, 1.0]),
            Scenario::DelayedEffect => (vec![3.0], vec![1.0, hr]),
            Scenario::CrossingHazards => match orientation {
                CrossingOrientation::HarmFirst => (vec![1.0], vec![1.0 / hr, hr]),
                CrossingOrientation::BenefitFirst => (vec![1.0], vec![hr, 1.0 / hr]),
            },
        };
        PiecewiseHazardSpec::new(control_rate, cps, hrs)
    }

    pub fn analysis_change_points(self) -> AnalysisChangePoints {
        match self {
            Scenario::Null | Scenario::ProportionalHazards => AnalysisChangePoints {
                early: 4.0,
                middle: (1.0, 6.0),
                delayed: 2.0,
            },
            Scenario::EarlyEffect => AnalysisChangePoints {
                early: 1.0,
                middle: (1.0, 7.0),
                delayed: 1.0,
            },
            Scenario::MiddleEffect => AnalysisChangePoints {
                early: 4.0,
                middle: (1.0, 4.0),
                delayed: 1.0,
            },
            Scenario::DelayedEffect => AnalysisChangePoints {
                early: 3.0,
                middle: (0.0, 3.0),
                delayed: 3.0,
            },
            Scenario::CrossingHazards => AnalysisChangePoints {
                early: 1.0,
                middle: (1.0, 4.0),
                delayed: 1.0,
            },
        }
    }
}
