use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponential control hazard multiplied by a constant ratio on each segment
/// between change-points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseHazardSpec {
    pub control_rate: f64,
    pub change_points: Vec<f64>,
    /// One ratio per segment, so one more than there are change-points.
    pub segment_hrs: Vec<f64>,
}

impl PiecewiseHazardSpec {
    pub fn new(control_rate: f64, change_points: Vec<f64>, segment_hrs: Vec<f64>) -> Result<Self> {
        if !(control_rate.is_finite() && control_rate > 0.0) {
            return Err(Error::invalid(format!(
                "control rate must be finite and positive, got {control_rate}"
            )));
        }
        if segment_hrs.len() != change_points.len() + 1 {
            return Err(Error::invalid(format!(
                "{} change-points need {} hazard ratios, got {}",
                change_points.len(),
                change_points.len() + 1,
                segment_hrs.len()
            )));
        }
        if let Some(r) = segment_hrs.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::invalid(format!("hazard ratio must be positive, got {r}")));
        }
        if change_points.iter().any(|k| !(k.is_finite() && *k > 0.0))
            || change_points.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::invalid(format!(
                "change-points must be positive and strictly ascending, got {change_points:?}"
            )));
        }
        Ok(Self {
            control_rate,
            change_points,
            segment_hrs,
        })
    }

    /// Segment boundaries [0, k₁, …, k_J, ∞).
    fn bounds(&self, j: usize) -> (f64, f64) {
        let lo = if j == 0 { 0.0 } else { self.change_points[j - 1] };
        let hi = self.change_points.get(j).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    pub fn hazard(&self, t: f64) -> f64 {
        let j = self.change_points.partition_point(|&k| k <= t);
        self.control_rate * self.segment_hrs[j]
    }

    pub fn cum_hazard(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let mut h = 0.0;
        for (j, r) in self.segment_hrs.iter().enumerate() {
            let (lo, hi) = self.bounds(j);
            if t <= lo {
                break;
            }
            h += r * (t.min(hi) - lo);
        }
        self.control_rate * h
    }

    pub fn survival(&self, t: f64) -> f64 {
        (-self.cum_hazard(t)).exp()
    }

    /// H⁻¹(y) by walking the segments.
    pub fn inverse_cum_hazard(&self, y: f64) -> f64 {
        let mut remaining = y / self.control_rate;
        for (j, r) in self.segment_hrs.iter().enumerate() {
            let (lo, hi) = self.bounds(j);
            let capacity = r * (hi - lo);
            if remaining <= capacity {
                return lo + remaining / r;
            }
            remaining -= capacity;
        }
        f64::INFINITY
    }

    /// Inverse-transform draw H⁻¹(−ln u).
    pub fn sample(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::invalid(format!("uniform draw must lie in (0, 1), got {u}")));
        }
        Ok(self.inverse_cum_hazard(-u.ln()))
    }
}
