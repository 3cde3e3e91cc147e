//! The max-Combo test: the strongest of several correlated score statistics,
//! with a Hochberg p-value and an exact p-value from the joint normal law.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::SurvivalModel;
use crate::error::{Error, Result};
use crate::mvn::{mvn_orthant, MvnOptions};
use crate::sample::SurvivalSample;
use crate::score::{moslrt, time_serde, z_delayed, z_early, TestOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "snake_case")]
pub enum ComboComponent {
    Moslrt,
    Early {
        #[serde(with = "time_serde")]
        k: f64,
    },
    Delayed {
        #[serde(with = "time_serde")]
        k: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Group {
    Overall,
    Early,
    Delayed,
}

impl ComboComponent {
    fn group(&self) -> Group {
        match self {
            ComboComponent::Moslrt => Group::Overall,
            ComboComponent::Early { .. } => Group::Early,
            ComboComponent::Delayed { .. } => Group::Delayed,
        }
    }

    pub fn evaluate(&self, sample: &SurvivalSample, control: &SurvivalModel) -> Result<TestOutcome> {
        match *self {
            ComboComponent::Moslrt => moslrt(sample, control),
            ComboComponent::Early { k } => z_early(sample, control, k),
            ComboComponent::Delayed { k } => z_delayed(sample, control, k),
        }
    }
}

impl fmt::Display for ComboComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComboComponent::Moslrt => write!(f, "moslrt"),
            ComboComponent::Early { k } => write!(f, "early:{k}"),
            ComboComponent::Delayed { k } => write!(f, "delayed:{k}"),
        }
    }
}

impl FromStr for ComboComponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<crate::score::ScoreTest>()? {
            crate::score::ScoreTest::Moslrt => Ok(ComboComponent::Moslrt),
            crate::score::ScoreTest::Early { k } => Ok(ComboComponent::Early { k }),
            crate::score::ScoreTest::Delayed { k } => Ok(ComboComponent::Delayed { k }),
            other => Err(Error::invalid(format!(
                "'{other}' cannot be a max-Combo component (use moslrt, early:K or delayed:K)"
            ))),
        }
    }
}

/// How the component statistics are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComboSign {
    /// max(−Zᵢ): rejects when any component shows benefit.
    #[default]
    Negated,
    /// max(Zᵢ) taken literally: significant only when every component is.
    RawMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComboSpec {
    pub components: Vec<ComboComponent>,
    #[serde(default)]
    pub sign: ComboSign,
}

impl Default for ComboSpec {
    /// mOSLRT with early effects at 1 and 3 and delayed effects at 3 and 5.
    fn default() -> Self {
        Self {
            components: vec![
                ComboComponent::Moslrt,
                ComboComponent::Early { k: 1.0 },
                ComboComponent::Early { k: 3.0 },
                ComboComponent::Delayed { k: 3.0 },
                ComboComponent::Delayed { k: 5.0 },
            ],
            sign: ComboSign::Negated,
        }
    }
}

/// Expected events driving a component's variance:
/// E_EE,κ = Σ Λ₀(Xᵢ)I(Xᵢ ≤ κ) + Λ₀(κ)I(Xᵢ ≥ κ),
/// E_DE,κ = Σ (Λ₀(Xᵢ) − Λ₀(κ))I(Xᵢ > κ) and E_mOSLRT = Σ Λ₀(Xᵢ).
pub fn expected_events(sample: &SurvivalSample, control: &SurvivalModel, component: &ComboComponent) -> f64 {
    let times = sample.times();
    match *component {
        ComboComponent::Moslrt => times.iter().map(|&x| control.cum_hazard(x)).sum(),
        ComboComponent::Early { k } => {
            let lk = control.cum_hazard(k);
            times
                .iter()
                .map(|&x| {
                    let mut e = 0.0;
                    if x <= k {
                        e += control.cum_hazard(x);
                    }
                    if x >= k {
                        e += lk;
                    }
                    e
                })
                .sum()
        }
        ComboComponent::Delayed { k } => {
            let lk = control.cum_hazard(k);
            times
                .iter()
                .filter(|&&x| x > k)
                .map(|&x| control.cum_hazard(x) - lk)
                .sum()
        }
    }
}

/// Correlation between component statistics. Two components of the same
/// kind, or either paired with the mOSLRT, correlate as √(E_small/E_large).
/// Early and delayed components are uncorrelated.
pub fn covariance_matrix(expected: &[f64], components: &[ComboComponent]) -> Result<Vec<Vec<f64>>> {
    if expected.len() != components.len() {
        return Err(Error::invalid(format!(
            "{} expected-event values for {} components",
            expected.len(),
            components.len()
        )));
    }
    if let Some(i) = expected.iter().position(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::degenerate(
            components[i].to_string(),
            format!("expected events {} is not positive", expected[i]),
        ));
    }
    let m = components.len();
    let mut cov = vec![vec![0.0; m]; m];
    for i in 0..m {
        cov[i][i] = 1.0;
        for j in 0..i {
            let (gi, gj) = (components[i].group(), components[j].group());
            let related = gi == gj || gi == Group::Overall || gj == Group::Overall;
            let rho = if related {
                let (a, b) = (expected[i], expected[j]);
                (a.min(b) / a.max(b)).sqrt()
            } else {
                0.0
            };
            cov[i][j] = rho;
            cov[j][i] = rho;
        }
    }
    Ok(cov)
}

/// Hochberg step-up: min over j of (m − j + 1)·p₍ⱼ₎ with p sorted ascending,
/// capped at 1.
pub fn hochberg_p(p_values: &[f64]) -> Result<f64> {
    if p_values.is_empty() {
        return Err(Error::invalid("Hochberg correction needs at least one p-value"));
    }
    if let Some(p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::invalid(format!("p-value {p} outside [0, 1]")));
    }
    let mut sorted = p_values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let adjusted = sorted
        .iter()
        .enumerate()
        .map(|(j, p)| (m - j) as f64 * p)
        .fold(f64::INFINITY, f64::min);
    Ok(adjusted.min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentResult {
    pub component: ComboComponent,
    pub outcome: TestOutcome,
    pub expected_events: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedComponent {
    pub component: ComboComponent,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComboResult {
    pub components: Vec<ComponentResult>,
    pub dropped: Vec<DroppedComponent>,
    /// max(−Zᵢ) under the default sign, max(Zᵢ) under the raw reading.
    pub combined: f64,
    /// Index into `components` of the component attaining `combined`.
    pub argmax: usize,
    pub covariance: Vec<Vec<f64>>,
    pub p_hochberg: f64,
    /// Absent when only the Hochberg p-value was requested.
    pub p_exact: Option<f64>,
    pub p_exact_se: Option<f64>,
}

impl ComboResult {
    pub fn statistics(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.outcome.statistic).collect()
    }
}

/// Combined value and its index. Ties keep the first component.
pub fn combine(statistics: &[f64], sign: ComboSign) -> Option<(f64, usize)> {
    let signed = statistics.iter().map(|&z| match sign {
        ComboSign::Negated => -z,
        ComboSign::RawMax => z,
    });
    signed
        .enumerate()
        .fold(None, |best: Option<(f64, usize)>, (i, v)| match best {
            Some((b, _)) if b >= v => best,
            _ => Some((v, i)),
        })
}

/// Evaluates every component, drops those that are degenerate or carry no
/// expected events, and computes both p-values.
pub fn maxcombo(
    sample: &SurvivalSample,
    control: &SurvivalModel,
    spec: &ComboSpec,
    mvn: &MvnOptions,
) -> Result<ComboResult> {
    maxcombo_inner(sample, control, spec, Some(mvn))
}

/// As [`maxcombo`] but without the multivariate normal integration, so
/// `p_exact` is `None`.
pub fn maxcombo_hochberg(sample: &SurvivalSample, control: &SurvivalModel, spec: &ComboSpec) -> Result<ComboResult> {
    maxcombo_inner(sample, control, spec, None)
}

fn maxcombo_inner(
    sample: &SurvivalSample,
    control: &SurvivalModel,
    spec: &ComboSpec,
    mvn: Option<&MvnOptions>,
) -> Result<ComboResult> {
    if spec.components.is_empty() {
        return Err(Error::invalid("max-Combo needs at least one component"));
    }
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for component in &spec.components {
        let e = expected_events(sample, control, component);
        if !(e.is_finite() && e > 0.0) {
            log::warn!("max-Combo: dropping {component}: expected events {e}");
            dropped.push(DroppedComponent {
                component: *component,
                reason: format!("expected events {e} is not positive"),
            });
            continue;
        }
        match component.evaluate(sample, control) {
            Ok(outcome) if outcome.statistic.is_finite() => kept.push(ComponentResult {
                component: *component,
                outcome,
                expected_events: e,
            }),
            Ok(outcome) => {
                log::warn!("max-Combo: dropping {component}: statistic {}", outcome.statistic);
                dropped.push(DroppedComponent {
                    component: *component,
                    reason: format!("statistic {}", outcome.statistic),
                });
            }
            Err(err) => {
                log::warn!("max-Combo: dropping {component}: {err}");
                dropped.push(DroppedComponent {
                    component: *component,
                    reason: err.to_string(),
                });
            }
        }
    }
    if kept.is_empty() {
        return Err(Error::degenerate("maxcombo", "every component is degenerate"));
    }

    let expected: Vec<f64> = kept.iter().map(|c| c.expected_events).collect();
    let comps: Vec<ComboComponent> = kept.iter().map(|c| c.component).collect();
    let covariance = covariance_matrix(&expected, &comps)?;
    let stats: Vec<f64> = kept.iter().map(|c| c.outcome.statistic).collect();
    let (combined, argmax) = combine(&stats, spec.sign).expect("nonempty");
    let p_values: Vec<f64> = kept.iter().map(|c| c.outcome.p_value).collect();
    let p_hochberg = hochberg_p(&p_values)?;

    let (p_exact, p_exact_se) = match mvn {
        Some(opts) => {
            let orthant = mvn_orthant(combined, &covariance, opts)?;
            let p = match spec.sign {
                // P(max(−Z) ≥ c) under H₀, where −Z has the same law as Z.
                ComboSign::Negated => 1.0 - orthant.probability,
                // P(max Z ≤ c): small only when every component is strongly negative.
                ComboSign::RawMax => orthant.probability,
            };
            (Some(p.clamp(0.0, 1.0)), Some(orthant.std_error))
        }
        None => (None, None),
    };
    Ok(ComboResult {
        components: kept,
        dropped,
        combined,
        argmax,
        covariance,
        p_hochberg,
        p_exact,
        p_exact_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> SurvivalSample {
        SurvivalSample::new(vec![0.5, 2.0], vec![true, false]).unwrap()
    }

    fn exp1() -> SurvivalModel {
        SurvivalModel::exponential(1.0).unwrap()
    }

    #[test]
    fn expected_event_hand_sums() {
        let (s, m) = (pair(), exp1());
        assert!((expected_events(&s, &m, &ComboComponent::Moslrt) - 2.5).abs() < 1e-15);
        assert!((expected_events(&s, &m, &ComboComponent::Early { k: 1.0 }) - 1.5).abs() < 1e-15);
        assert!((expected_events(&s, &m, &ComboComponent::Delayed { k: 1.0 }) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expected_event_limits() {
        let (s, m) = (pair(), exp1());
        let all = expected_events(&s, &m, &ComboComponent::Moslrt);
        assert_eq!(expected_events(&s, &m, &ComboComponent::Early { k: 0.0 }), 0.0);
        assert_eq!(expected_events(&s, &m, &ComboComponent::Delayed { k: 0.0 }), all);
        assert_eq!(expected_events(&s, &m, &ComboComponent::Early { k: f64::INFINITY }), all);
        assert_eq!(expected_events(&s, &m, &ComboComponent::Delayed { k: f64::INFINITY }), 0.0);
    }

    #[test]
    fn covariance_hand_ratios() {
        let comps = [
            ComboComponent::Moslrt,
            ComboComponent::Early { k: 1.0 },
            ComboComponent::Delayed { k: 1.0 },
        ];
        let c = covariance_matrix(&[2.5, 1.5, 1.0], &comps).unwrap();
        assert!((c[1][0] - (1.5f64 / 2.5).sqrt()).abs() < 1e-15);
        assert!((c[2][0] - (1.0f64 / 2.5).sqrt()).abs() < 1e-15);
        assert_eq!(c[1][2], 0.0);
        assert!((c[0][1] - 0.7746).abs() < 1e-4);
        assert!((c[0][2] - 0.6325).abs() < 1e-4);
    }

    #[test]
    fn single_component_matrix() {
        let c = covariance_matrix(&[3.0], &[ComboComponent::Moslrt]).unwrap();
        assert_eq!(c, vec![vec![1.0]]);
    }

    #[test]
    fn combined_value_is_max_of_negations() {
        let z = [-2.1, -1.0, -2.5, 0.3, -0.8];
        assert_eq!(combine(&z, ComboSign::Negated), Some((2.5, 2)));
        assert_eq!(combine(&[0.0; 5], ComboSign::Negated), Some((0.0, 0)));
        assert_eq!(combine(&z, ComboSign::RawMax), Some((0.3, 3)));
    }

    #[test]
    fn hochberg_values() {
        let p = hochberg_p(&[0.01, 0.02, 0.03, 0.04, 0.05]).unwrap();
        assert!((p - 0.05).abs() < 1e-15);
        assert_eq!(hochberg_p(&[0.3]).unwrap(), 0.3);
        assert_eq!(hochberg_p(&[0.2; 4]).unwrap(), 0.2);
        assert_eq!(hochberg_p(&[0.9, 0.8]).unwrap(), 0.9);
        assert!(hochberg_p(&[]).is_err());
        assert!(hochberg_p(&[1.2]).is_err());
    }

    #[test]
    fn degenerate_components_are_dropped() {
        let (s, m) = (pair(), exp1());
        let spec = ComboSpec::default();
        let r = maxcombo(&s, &m, &spec, &MvnOptions::default()).unwrap();
        // Nobody is followed beyond 3, so both delayed components go.
        assert_eq!(r.dropped.len(), 2);
        assert_eq!(r.components.len(), 3);
        let p = r.p_exact.unwrap();
        assert!((0.0..=1.0).contains(&p));
        assert!(maxcombo_hochberg(&s, &m, &spec).unwrap().p_exact.is_none());
        let min_p = r.components.iter().map(|c| c.outcome.p_value).fold(1.0, f64::min);
        assert!(r.p_hochberg >= min_p);
    }

    #[test]
    fn parse_components() {
        assert_eq!("early:2".parse::<ComboComponent>().unwrap(), ComboComponent::Early { k: 2.0 });
        assert!("crossing".parse::<ComboComponent>().is_err());
    }
}
