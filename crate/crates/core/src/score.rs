//! One-sample log-rank tests and score tests for non-proportional hazards.
//!
//! Every statistic is oriented so that a benefit of the experimental arm
//! (fewer events than the control law predicts) gives a negative Z, and the
//! one-sided p-value is Φ(Z).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::SurvivalModel;
use crate::error::{Error, Result};
use crate::normal;
use crate::sample::SurvivalSample;

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Which tail of the statistic's null distribution signals benefit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub label: String,
    pub statistic: f64,
    /// One-sided p-value; small values favour the experimental arm.
    pub p_value: f64,
    /// Events counted in the test's time window.
    pub observed: f64,
    /// Null expectation matching `observed`, i.e. `observed` minus the score.
    pub expected: f64,
    pub alpha: f64,
    pub tail: Tail,
}

impl TestOutcome {
    pub(crate) fn lower(label: impl Into<String>, statistic: f64, observed: f64, expected: f64) -> Self {
        Self {
            label: label.into(),
            statistic,
            p_value: normal::cdf(statistic),
            observed,
            expected,
            alpha: DEFAULT_ALPHA,
            tail: Tail::Lower,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn rejects(&self) -> bool {
        self.p_value < self.alpha
    }
}

fn check_time(name: &str, k: f64) -> Result<()> {
    if k.is_nan() || k < 0.0 {
        Err(Error::invalid(format!("change-point {name} must be nonnegative, got {k}")))
    } else {
        Ok(())
    }
}

fn standardize(label: &str, numerator: f64, radicand: f64) -> Result<f64> {
    if radicand.is_nan() || radicand <= 0.0 {
        return Err(Error::degenerate(
            label,
            format!("variance term is {radicand}, not positive"),
        ));
    }
    Ok(numerator / radicand.sqrt())
}

fn event_count(sample: &SurvivalSample) -> f64 {
    sample.event_count() as f64
}

fn total_expected(sample: &SurvivalSample, control: &SurvivalModel) -> f64 {
    sample.times().iter().map(|&t| control.cum_hazard(t)).sum()
}

/// One-sample log-rank test, Z = (O − E)/√E.
pub fn oslrt(sample: &SurvivalSample, control: &SurvivalModel) -> Result<TestOutcome> {
    let o = event_count(sample);
    let e = total_expected(sample, control);
    let z = standardize("oslrt", o - e, e)?;
    Ok(TestOutcome::lower("oslrt", z, o, e))
}

/// Modified one-sample log-rank test, Z = (O − E)/√((O + E)/2).
pub fn moslrt(sample: &SurvivalSample, control: &SurvivalModel) -> Result<TestOutcome> {
    let o = event_count(sample);
    let e = total_expected(sample, control);
    let z = standardize("moslrt", o - e, (o + e) / 2.0)?;
    Ok(TestOutcome::lower("moslrt", z, o, e))
}

/// Score test for an effect confined to [0, k].
///
/// A patient with X = k enters both the I(X ≤ k) and the I(X ≥ k) sums.
pub fn z_early(sample: &SurvivalSample, control: &SurvivalModel, k: f64) -> Result<TestOutcome> {
    check_time("k", k)?;
    let label = format!("z_early(k={k})");
    let lk = control.cum_hazard(k);
    let (mut num, mut den, mut o) = (0.0, 0.0, 0.0);
    for (x, d) in sample.iter() {
        let d = f64::from(u8::from(d));
        if x <= k {
            let lx = control.cum_hazard(x);
            num += d - lx;
            den += lx;
            o += d;
        }
        if x >= k {
            num -= lk;
            den += lk;
        }
    }
    let z = standardize(&label, num, den)?;
    Ok(TestOutcome::lower(label, z, o, o - num))
}

/// Score test for an effect confined to (k1, k2]; `k2` may be +∞.
///
/// The score sums over X ∈ (k1, k2] while the information sums over the
/// closed window [k1, k2]. The two only differ when an observation falls
/// exactly on a change-point.
pub fn z_middle(
    sample: &SurvivalSample,
    control: &SurvivalModel,
    k1: f64,
    k2: f64,
) -> Result<TestOutcome> {
    check_time("k1", k1)?;
    check_time("k2", k2)?;
    if k1 >= k2 {
        return Err(Error::invalid(format!("z_middle needs k1 < k2, got k1={k1}, k2={k2}")));
    }
    let label = format!("z_middle(k1={k1},k2={k2})");
    let l1 = control.cum_hazard(k1);
    let l2 = control.cum_hazard(k2);
    let (mut num, mut den, mut o) = (0.0, 0.0, 0.0);
    for (x, d) in sample.iter() {
        let d = f64::from(u8::from(d));
        let inside_closed = x >= k1 && x <= k2;
        let lx = if inside_closed { control.cum_hazard(x) } else { 0.0 };
        if x > k1 && x <= k2 {
            num += d - lx;
            o += d;
        }
        if inside_closed {
            den += lx;
        }
        if x >= k1 {
            num += l1;
            den -= l1;
        }
        if x >= k2 {
            num -= l2;
            den += l2;
        }
    }
    let z = standardize(&label, num, den)?;
    Ok(TestOutcome::lower(label, z, o, o - num))
}

/// Score test for an effect starting after k.
pub fn z_delayed(sample: &SurvivalSample, control: &SurvivalModel, k: f64) -> Result<TestOutcome> {
    check_time("k", k)?;
    let label = format!("z_delayed(k={k})");
    let lk = control.cum_hazard(k);
    let (mut num, mut den, mut o) = (0.0, 0.0, 0.0);
    let mut beyond = 0usize;
    for (x, d) in sample.iter() {
        if x > k {
            let d = f64::from(u8::from(d));
            let lx = control.cum_hazard(x);
            num += d - lx + lk;
            den += lx - lk;
            o += d;
            beyond += 1;
        }
    }
    if beyond == 0 {
        return Err(Error::degenerate(&label, format!("no observation beyond k={k}")));
    }
    let z = standardize(&label, num, den)?;
    Ok(TestOutcome::lower(label, z, o, o - num))
}

/// Score test for crossing hazards under the accelerated hazards model
/// h₁(t) = e^β λ₀(t) Λ₀(t)^(e^β − 1).
pub fn z_crossing(sample: &SurvivalSample, control: &SurvivalModel) -> Result<TestOutcome> {
    let label = "z_crossing";
    let (mut num, mut rad, mut o) = (0.0, 0.0, 0.0);
    for (x, d) in sample.iter() {
        let lx = control.cum_hazard(x);
        if lx <= 0.0 {
            return Err(Error::degenerate(
                label,
                format!("cumulative hazard is zero at time {x}"),
            ));
        }
        let d = f64::from(u8::from(d));
        let log_l = lx.ln();
        num += d - (lx - d) * log_l;
        rad -= (d - lx * (1.0 + log_l)) * log_l;
        o += d;
    }
    let z = standardize(label, num, rad)?;
    Ok(TestOutcome::lower(label, z, o, o - num))
}

/// Time at which the accelerated-hazards alternative with log-effect `beta`
/// crosses the control hazard, Λ₀⁻¹(exp(−β/(e^β − 1))).
pub fn crossing_time(control: &SurvivalModel, beta: f64) -> Result<f64> {
    if !beta.is_finite() || beta == 0.0 {
        return Err(Error::invalid(format!(
            "crossing time needs a finite nonzero beta, got {beta}"
        )));
    }
    control.inverse_cum_hazard((-beta / beta.exp_m1()).exp())
}

/// A single test with its change-points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "snake_case")]
pub enum ScoreTest {
    Oslrt,
    Moslrt,
    Early {
        #[serde(with = "time_serde")]
        k: f64,
    },
    Middle {
        #[serde(with = "time_serde")]
        k1: f64,
        #[serde(with = "time_serde")]
        k2: f64,
    },
    Delayed {
        #[serde(with = "time_serde")]
        k: f64,
    },
    Crossing,
}

impl ScoreTest {
    pub fn evaluate(&self, sample: &SurvivalSample, control: &SurvivalModel) -> Result<TestOutcome> {
        match *self {
            ScoreTest::Oslrt => oslrt(sample, control),
            ScoreTest::Moslrt => moslrt(sample, control),
            ScoreTest::Early { k } => z_early(sample, control, k),
            ScoreTest::Middle { k1, k2 } => z_middle(sample, control, k1, k2),
            ScoreTest::Delayed { k } => z_delayed(sample, control, k),
            ScoreTest::Crossing => z_crossing(sample, control),
        }
    }
}

impl fmt::Display for ScoreTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreTest::Oslrt => write!(f, "oslrt"),
            ScoreTest::Moslrt => write!(f, "moslrt"),
            ScoreTest::Early { k } => write!(f, "early:{k}"),
            ScoreTest::Middle { k1, k2 } => write!(f, "middle:{k1},{k2}"),
            ScoreTest::Delayed { k } => write!(f, "delayed:{k}"),
            ScoreTest::Crossing => write!(f, "crossing"),
        }
    }
}

/// JSON has no infinity, so an infinite change-point is written as `"inf"`.
pub(crate) mod time_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) => super::parse_time(&t).map_err(serde::de::Error::custom),
        }
    }
}

fn parse_time(s: &str) -> Result<f64> {
    let s = s.trim();
    match s.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
        _ => s
            .parse::<f64>()
            .map_err(|_| Error::invalid(format!("bad change-point '{s}'"))),
    }
}

/// Parses `oslrt`, `moslrt`, `early:K`, `middle:K1,K2`, `delayed:K` or
/// `crossing`. `inf` is accepted as a change-point.
impl FromStr for ScoreTest {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let args: Vec<f64> = match args {
            Some(a) => a.split(',').map(parse_time).collect::<Result<_>>()?,
            None => Vec::new(),
        };
        let name = name.trim().to_ascii_lowercase();
        let test = match (name.as_str(), args.as_slice()) {
            ("oslrt", []) => ScoreTest::Oslrt,
            ("moslrt", []) => ScoreTest::Moslrt,
            ("early" | "ee", [k]) => ScoreTest::Early { k: *k },
            ("middle" | "me", [k1, k2]) => ScoreTest::Middle { k1: *k1, k2: *k2 },
            ("delayed" | "de", [k]) => ScoreTest::Delayed { k: *k },
            ("crossing" | "ch", []) => ScoreTest::Crossing,
            _ => {
                return Err(Error::invalid(format!(
                    "unknown test '{s}' (expected oslrt, moslrt, early:K, middle:K1,K2, delayed:K or crossing)"
                )))
            }
        };
        Ok(test)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp(rate: f64) -> SurvivalModel {
        SurvivalModel::exponential(rate).unwrap()
    }

    fn two() -> SurvivalSample {
        SurvivalSample::new(vec![1.0, 2.0], vec![true, false]).unwrap()
    }

    fn early_pair() -> SurvivalSample {
        SurvivalSample::new(vec![0.5, 2.0], vec![true, false]).unwrap()
    }

    #[test]
    fn oslrt_hand_value() {
        let r = oslrt(&two(), &exp(0.5)).unwrap();
        assert_eq!(r.observed, 1.0);
        assert!((r.expected - 1.5).abs() < 1e-15);
        assert!((r.statistic - (-0.5 / 1.5f64.sqrt())).abs() < 1e-12);
        assert!((r.statistic + 0.4082).abs() < 1e-4);
        assert!((r.p_value - normal::cdf(r.statistic)).abs() < 1e-15);
    }

    #[test]
    fn oslrt_balanced_is_zero() {
        let s = SurvivalSample::new(vec![1.0], vec![true]).unwrap();
        assert_eq!(oslrt(&s, &exp(1.0)).unwrap().statistic, 0.0);
    }

    #[test]
    fn oslrt_degenerate_at_time_zero() {
        let s = SurvivalSample::new(vec![0.0, 0.0], vec![false, false]).unwrap();
        assert!(matches!(oslrt(&s, &exp(1.0)), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn moslrt_hand_value() {
        let r = moslrt(&two(), &exp(0.5)).unwrap();
        assert!((r.statistic - (-0.5 / 1.25f64.sqrt())).abs() < 1e-12);
        assert!((r.statistic + 0.4472).abs() < 1e-4);
    }

    #[test]
    fn early_hand_value() {
        let r = z_early(&early_pair(), &exp(1.0), 1.0).unwrap();
        assert!((r.statistic - (-0.5 / 1.5f64.sqrt())).abs() < 1e-12);
        assert_eq!(r.observed, 1.0);
    }

    #[test]
    fn delayed_hand_value() {
        let r = z_delayed(&early_pair(), &exp(1.0), 1.0).unwrap();
        assert!((r.statistic + 1.0).abs() < 1e-12);
        assert_eq!(r.observed, 0.0);
        assert!((r.expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delayed_needs_someone_beyond_k() {
        let err = z_delayed(&early_pair(), &exp(1.0), 5.0).unwrap_err();
        assert!(matches!(err, Error::Degenerate { .. }));
    }

    #[test]
    fn crossing_hand_value() {
        // Λ₀(X) = e for a unit-rate exponential at X = e.
        let e = std::f64::consts::E;
        let s = SurvivalSample::new(vec![e], vec![true]).unwrap();
        let r = z_crossing(&s, &exp(1.0)).unwrap();
        assert!((r.statistic - (2.0 - e) / (2.0 * e - 1.0).sqrt()).abs() < 1e-12);
        assert!((r.statistic + 0.3410).abs() < 1e-4);
    }

    #[test]
    fn crossing_unit_cum_hazard_is_degenerate() {
        let s = SurvivalSample::new(vec![1.0], vec![true]).unwrap();
        assert!(matches!(z_crossing(&s, &exp(1.0)), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn middle_rejects_bad_order() {
        assert!(z_middle(&two(), &exp(1.0), 2.0, 1.0).is_err());
        assert!(z_middle(&two(), &exp(1.0), 1.0, 1.0).is_err());
    }

    #[test]
    fn crossing_time_values() {
        let t = crossing_time(&exp(0.35), 0.5f64.ln()).unwrap();
        assert!((t - 0.25 / 0.35).abs() < 1e-12);
        let w = SurvivalModel::weibull(1.0, 1.0).unwrap();
        assert!((crossing_time(&w, 2f64.ln()).unwrap() - 0.5).abs() < 1e-12);
        assert!(crossing_time(&w, 0.0).is_err());
    }

    #[test]
    fn infinite_change_point_round_trips_through_json() {
        let t = ScoreTest::Middle { k1: 1.0, k2: f64::INFINITY };
        let js = serde_json::to_string(&t).unwrap();
        assert_eq!(js, r#"{"test":"middle","k1":1.0,"k2":"inf"}"#);
        assert_eq!(serde_json::from_str::<ScoreTest>(&js).unwrap(), t);
    }

    #[test]
    fn parse_tests() {
        assert_eq!("early:1".parse::<ScoreTest>().unwrap(), ScoreTest::Early { k: 1.0 });
        assert_eq!(
            "middle:1,inf".parse::<ScoreTest>().unwrap(),
            ScoreTest::Middle { k1: 1.0, k2: f64::INFINITY }
        );
        assert_eq!("crossing".parse::<ScoreTest>().unwrap(), ScoreTest::Crossing);
        assert!("early".parse::<ScoreTest>().is_err());
        assert!("bogus:1".parse::<ScoreTest>().is_err());
        for t in ["oslrt", "moslrt", "early:1.5", "middle:1,4", "delayed:3", "crossing"] {
            assert_eq!(t.parse::<ScoreTest>().unwrap().to_string(), t);
        }
    }
}
