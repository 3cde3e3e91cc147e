use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observed follow-up times and event indicators for one group.
///
/// `times[i]` is `min(T_i, C_i)`; `events[i]` is true when the event was
/// observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSample", into = "RawSample")]
pub struct SurvivalSample {
    times: Vec<f64>,
    events: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct RawSample {
    times: Vec<f64>,
    events: Vec<bool>,
}

impl TryFrom<RawSample> for SurvivalSample {
    type Error = Error;

    fn try_from(raw: RawSample) -> Result<Self> {
        SurvivalSample::new(raw.times, raw.events)
    }
}

impl From<SurvivalSample> for RawSample {
    fn from(s: SurvivalSample) -> Self {
        RawSample {
            times: s.times,
            events: s.events,
        }
    }
}

impl SurvivalSample {
    pub fn new(times: Vec<f64>, events: Vec<bool>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::invalid("sample is empty"));
        }
        if times.len() != events.len() {
            return Err(Error::invalid(format!(
                "times ({}) and events ({}) differ in length",
                times.len(),
                events.len()
            )));
        }
        if let Some((i, t)) = times
            .iter()
            .enumerate()
            .find(|(_, t)| !t.is_finite() || **t < 0.0)
        {
            return Err(Error::invalid(format!(
                "time at index {i} must be finite and nonnegative, got {t}"
            )));
        }
        Ok(Self { times, events })
    }

    /// Convenience constructor taking 0/1 status codes.
    pub fn from_status(times: Vec<f64>, status: &[u8]) -> Result<Self> {
        if let Some(s) = status.iter().find(|s| **s > 1) {
            return Err(Error::invalid(format!("status must be 0 or 1, got {s}")));
        }
        Self::new(times, status.iter().map(|s| *s == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn events(&self) -> &[bool] {
        &self.events
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, bool)> + '_ {
        self.times.iter().copied().zip(self.events.iter().copied())
    }

    pub fn event_count(&self) -> usize {
        self.events.iter().filter(|e| **e).count()
    }

    pub fn censored_fraction(&self) -> f64 {
        1.0 - self.event_count() as f64 / self.len() as f64
    }

    pub fn max_time(&self) -> f64 {
        self.times.iter().copied().fold(0.0, f64::max)
    }

    pub fn total_time(&self) -> f64 {
        self.times.iter().sum()
    }

    /// Times of observed events only.
    pub fn event_times(&self) -> Vec<f64> {
        self.iter().filter(|(_, e)| *e).map(|(t, _)| t).collect()
    }

    /// Multiplies every time by `factor` (e.g. years to months).
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::invalid(format!("rescale factor must be positive, got {factor}")));
        }
        Self::new(
            self.times.iter().map(|t| t * factor).collect(),
            self.events.clone(),
        )
    }

    /// Administrative censoring at `t_max`: observations beyond it become
    /// censored at `t_max`.
    pub fn truncate_at(&self, t_max: f64) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::invalid(format!("truncation time must be positive, got {t_max}")));
        }
        let (times, events) = self
            .iter()
            .map(|(t, e)| if t > t_max { (t_max, false) } else { (t, e) })
            .unzip();
        Ok(Self { times, events })
    }
}
