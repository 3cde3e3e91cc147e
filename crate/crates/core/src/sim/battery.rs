use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::combo::{maxcombo, maxcombo_hochberg, ComboComponent, ComboSpec};
use crate::dist::SurvivalModel;
use crate::error::{Error, Result};
use crate::km::{drmst_test, select_tau};
use crate::mvn::MvnOptions;
use crate::sample::SurvivalSample;
use crate::score::ScoreTest;

use super::scenario::Scenario;

/// One entry of a simulation test battery.
///
/// Written as a short string in configuration files: any score test
/// (`oslrt`, `early:1`, `middle:1,4`, ...), `drmst` or `drmst:TAU`, and
/// `maxcombo` or `maxcombo_exact`, optionally followed by
/// `:component;component;...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum StudyTest {
    Score(ScoreTest),
    /// `None` restricts to the smaller of the sample's last time and the
    /// study horizon.
    Drmst { tau: Option<f64> },
    MaxCombo { spec: ComboSpec, exact: bool },
}

impl StudyTest {
    /// Rejection decision at level `alpha`. `horizon` is the end of study,
    /// used when the restriction time is not fixed.
    pub fn rejects(
        &self,
        sample: &SurvivalSample,
        control: &SurvivalModel,
        alpha: f64,
        horizon: f64,
        mvn: &MvnOptions,
    ) -> Result<bool> {
        match self {
            StudyTest::Score(t) => Ok(t.evaluate(sample, control)?.p_value < alpha),
            StudyTest::Drmst { tau } => {
                let tau = match tau {
                    Some(t) => *t,
                    None => select_tau(sample, horizon)?,
                };
                Ok(drmst_test(sample, control, tau)?.p_value < alpha)
            }
            StudyTest::MaxCombo { spec, exact } => {
                if *exact {
                    let r = maxcombo(sample, control, spec, mvn)?;
                    Ok(r.p_exact.expect("requested") < alpha)
                } else {
                    Ok(maxcombo_hochberg(sample, control, spec)?.p_hochberg < alpha)
                }
            }
        }
    }

    /// True if evaluating the test needs multivariate normal integration.
    pub fn is_expensive(&self) -> bool {
        matches!(self, StudyTest::MaxCombo { exact: true, .. })
    }
}

/// Tests applied when a study does not list its own: both log-rank tests,
/// the four score tests at the scenario's change-points, the restricted-mean
/// test and the max-Combo with the Hochberg p-value.
pub fn default_battery(scenario: Scenario) -> Vec<StudyTest> {
    let cp = scenario.analysis_change_points();
    vec![
        StudyTest::Score(ScoreTest::Oslrt),
        StudyTest::Score(ScoreTest::Moslrt),
        StudyTest::Score(ScoreTest::Early { k: cp.early }),
        StudyTest::Score(ScoreTest::Middle {
            k1: cp.middle.0,
            k2: cp.middle.1,
        }),
        StudyTest::Score(ScoreTest::Delayed { k: cp.delayed }),
        StudyTest::Score(ScoreTest::Crossing),
        StudyTest::Drmst { tau: None },
        StudyTest::MaxCombo {
            spec: ComboSpec::default(),
            exact: false,
        },
    ]
}

impl fmt::Display for StudyTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StudyTest::Score(t) => write!(f, "{t}"),
            StudyTest::Drmst { tau: None } => write!(f, "drmst"),
            StudyTest::Drmst { tau: Some(t) } => write!(f, "drmst:{t}"),
            StudyTest::MaxCombo { spec, exact } => {
                f.write_str(if *exact { "maxcombo_exact" } else { "maxcombo" })?;
                if spec.components != ComboSpec::default().components {
                    let parts: Vec<String> = spec.components.iter().map(|c| c.to_string()).collect();
                    write!(f, ":{}", parts.join(";"))?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for StudyTest {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        match head.to_ascii_lowercase().as_str() {
            "drmst" | "rmst" => {
                let tau = rest
                    .map(|r| {
                        r.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::invalid(format!("bad restriction time in '{s}'")))
                    })
                    .transpose()?;
                Ok(StudyTest::Drmst { tau })
            }
            "maxcombo" | "maxcombo_exact" => {
                let exact = head.eq_ignore_ascii_case("maxcombo_exact");
                let components = match rest {
                    None => ComboSpec::default().components,
                    Some(r) => r
                        .split(';')
                        .map(str::parse::<ComboComponent>)
                        .collect::<Result<Vec<_>>>()?,
                };
                Ok(StudyTest::MaxCombo {
                    spec: ComboSpec {
                        components,
                        ..ComboSpec::default()
                    },
                    exact,
                })
            }
            _ => Ok(StudyTest::Score(s.parse()?)),
        }
    }
}

impl TryFrom<String> for StudyTest {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<StudyTest> for String {
    fn from(t: StudyTest) -> String {
        t.to_string()
    }
}
