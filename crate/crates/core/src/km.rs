//! Kaplan–Meier estimation and the one-sample restricted-mean test.

use serde::{Deserialize, Serialize};

use crate::dist::SurvivalModel;
use crate::error::{Error, Result};
use crate::normal;
use crate::sample::SurvivalSample;
use crate::score::{Tail, TestOutcome, DEFAULT_ALPHA};

/// Product-limit estimate at the distinct event times. The implicit starting
/// point (0, 1) is not stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmCurve {
    pub times: Vec<f64>,
    pub at_risk: Vec<usize>,
    pub events: Vec<usize>,
    pub survival: Vec<f64>,
    /// Largest observed time (event or censored) in the sample.
    pub max_time: f64,
}

/// How the area under the Kaplan–Meier curve is integrated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RmstRule {
    /// Trapezoids between consecutive knots {0, event times ≤ τ, τ}.
    #[default]
    Trapezoid,
    /// Exact integral of the right-continuous step function.
    Step,
}

pub fn km_estimate(sample: &SurvivalSample) -> KmCurve {
    let mut obs: Vec<(f64, bool)> = sample.iter().collect();
    obs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut curve = KmCurve {
        times: Vec::new(),
        at_risk: Vec::new(),
        events: Vec::new(),
        survival: Vec::new(),
        max_time: sample.max_time(),
    };
    let mut at_risk = obs.len();
    let mut s = 1.0;
    let mut i = 0;
    while i < obs.len() {
        let t = obs[i].0;
        let mut d = 0;
        let mut leaving = 0;
        while i < obs.len() && obs[i].0 == t {
            d += usize::from(obs[i].1);
            leaving += 1;
            i += 1;
        }
        if d > 0 {
            s *= 1.0 - d as f64 / at_risk as f64;
            curve.times.push(t);
            curve.at_risk.push(at_risk);
            curve.events.push(d);
            curve.survival.push(s);
        }
        at_risk -= leaving;
    }
    curve
}

impl KmCurve {
    /// Ŝ(t), right-continuous.
    pub fn survival_at(&self, t: f64) -> f64 {
        let idx = self.times.partition_point(|&x| x <= t);
        if idx == 0 {
            1.0
        } else {
            self.survival[idx - 1]
        }
    }

    fn check_tau(&self, tau: f64) -> Result<()> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::invalid(format!("tau must be finite and positive, got {tau}")));
        }
        if tau > self.max_time {
            return Err(Error::invalid(format!(
                "tau={tau} lies beyond the last follow-up time {}",
                self.max_time
            )));
        }
        Ok(())
    }

    /// Knots {0, event times ≤ τ, τ} with the curve values attached.
    fn knots(&self, tau: f64) -> Vec<(f64, f64)> {
        let mut knots = vec![(0.0, 1.0)];
        for (&t, &s) in self.times.iter().zip(&self.survival) {
            if t <= tau {
                knots.push((t, s));
            }
        }
        let last = knots.last().unwrap().1;
        knots.push((tau, last));
        knots
    }

    /// Area of each segment between consecutive knots.
    fn segment_areas(knots: &[(f64, f64)], rule: RmstRule) -> Vec<f64> {
        knots
            .windows(2)
            .map(|w| {
                let width = w[1].0 - w[0].0;
                match rule {
                    RmstRule::Trapezoid => 0.5 * (w[0].1 + w[1].1) * width,
                    RmstRule::Step => w[0].1 * width,
                }
            })
            .collect()
    }

    pub fn rmst(&self, tau: f64) -> Result<f64> {
        self.rmst_with_rule(tau, RmstRule::Trapezoid)
    }

    pub fn rmst_with_rule(&self, tau: f64, rule: RmstRule) -> Result<f64> {
        self.check_tau(tau)?;
        Ok(Self::segment_areas(&self.knots(tau), rule).iter().sum())
    }

    pub fn greenwood_variance(&self, tau: f64) -> Result<f64> {
        self.greenwood_variance_with_rule(tau, RmstRule::Trapezoid)
    }

    /// Σ over event times tⱼ ≤ τ of (∫_{tⱼ}^τ Ŝ)² dⱼ/(nⱼ(nⱼ − dⱼ)).
    ///
    /// A term with nⱼ = dⱼ has an infinite weight; it is skipped with a
    /// warning.
    pub fn greenwood_variance_with_rule(&self, tau: f64, rule: RmstRule) -> Result<f64> {
        self.check_tau(tau)?;
        let knots = self.knots(tau);
        let areas = Self::segment_areas(&knots, rule);
        // tail[i] = area to the right of knot i.
        let mut tail = vec![0.0; knots.len()];
        for i in (0..areas.len()).rev() {
            tail[i] = tail[i + 1] + areas[i];
        }
        let mut var = 0.0;
        // Knot j + 1 holds the j-th event time (knot 0 is the origin).
        for j in 0..self.times.len() {
            if self.times[j] > tau {
                break;
            }
            let (n, d) = (self.at_risk[j], self.events[j]);
            if n == d {
                log::warn!(
                    "Greenwood term at t={} skipped: all {n} subjects at risk had the event",
                    self.times[j]
                );
                continue;
            }
            let a = tail[j + 1];
            var += a * a * d as f64 / (n as f64 * (n - d) as f64);
        }
        Ok(var)
    }
}

pub fn rmst_km(curve: &KmCurve, tau: f64) -> Result<f64> {
    curve.rmst(tau)
}

pub fn greenwood_variance(curve: &KmCurve, tau: f64) -> Result<f64> {
    curve.greenwood_variance(tau)
}

/// Restriction time: the smaller of the two groups' maximum follow-up.
pub fn select_tau(experimental: &SurvivalSample, control_max_time: f64) -> Result<f64> {
    if !(control_max_time.is_finite() && control_max_time > 0.0) {
        return Err(Error::invalid(format!(
            "control maximum time must be finite and positive, got {control_max_time}"
        )));
    }
    let exp_max = experimental.max_time();
    if exp_max <= 0.0 {
        return Err(Error::invalid("experimental sample has no positive follow-up"));
    }
    Ok(exp_max.min(control_max_time))
}

/// Restricted-mean test: Z = (RMST̂₁ − RMST₀)/√Var, p = 1 − Φ(Z).
///
/// `observed` holds RMST̂₁ and `expected` holds RMST₀.
pub fn drmst_test(sample: &SurvivalSample, control: &SurvivalModel, tau: f64) -> Result<TestOutcome> {
    drmst_test_with_rule(sample, control, tau, RmstRule::Trapezoid)
}

pub fn drmst_test_with_rule(
    sample: &SurvivalSample,
    control: &SurvivalModel,
    tau: f64,
    rule: RmstRule,
) -> Result<TestOutcome> {
    let curve = km_estimate(sample);
    let observed = curve.rmst_with_rule(tau, rule)?;
    let var = curve.greenwood_variance_with_rule(tau, rule)?;
    let label = format!("drmst(tau={tau})");
    if var <= 0.0 {
        return Err(Error::degenerate(label, "zero Greenwood variance"));
    }
    let expected = control.rmst(tau)?;
    let z = (observed - expected) / var.sqrt();
    Ok(TestOutcome {
        label,
        statistic: z,
        p_value: normal::sf(z),
        observed,
        expected,
        alpha: DEFAULT_ALPHA,
        tail: Tail::Upper,
    })
}
