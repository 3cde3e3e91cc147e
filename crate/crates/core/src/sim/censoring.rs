use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::piecewise::PiecewiseHazardSpec;
use crate::error::{Error, Result};

pub const CALIBRATION_DRAWS: usize = 200_000;
pub const CALIBRATION_SEED: u64 = 20_240_601;

/// What the censoring target is a proportion of.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CensoringMode {
    /// Patients whose dropout comes before both their event and the
    /// administrative cutoff.
    #[default]
    Dropout,
    /// P(dropout < event), ignoring the administrative cutoff.
    NoAdmin,
    /// Every patient without an observed event, administrative censoring
    /// included.
    Total,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Exponential dropout hazard (per year).
    pub hazard: f64,
    /// Proportion reached on the calibration draws.
    pub achieved: f64,
}

/// Common random numbers used to evaluate the censoring proportion.
struct Draws {
    /// (event time, time to the administrative cutoff, unit-rate dropout draw).
    rows: Vec<(f64, f64, f64)>,
}

impl Draws {
    fn new(spec: &PiecewiseHazardSpec, accrual: f64, followup: f64, count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..count)
            .map(|_| {
                let entry = accrual * rng.random::<f64>();
                let u = 1.0 - rng.random::<f64>();
                let e: f64 = rng.sample(Exp1);
                let t = spec.inverse_cum_hazard(-u.ln());
                (t, accrual + followup - entry, e)
            })
            .collect();
        Self { rows }
    }

    fn proportion(&self, hazard: f64, mode: CensoringMode) -> f64 {
        let hits = self
            .rows
            .iter()
            .filter(|&&(t, admin, e)| {
                let d = if hazard > 0.0 { e / hazard } else { f64::INFINITY };
                match mode {
                    CensoringMode::Dropout => d < t && d < admin,
                    CensoringMode::NoAdmin => d < t,
                    CensoringMode::Total => t > d.min(admin),
                }
            })
            .count();
        hits as f64 / self.rows.len() as f64
    }
}

/// Finds the exponential dropout hazard whose expected censoring proportion
/// (in the sense of `mode`) equals `target`, by bisection on a fixed set of
/// Monte Carlo draws.
pub fn calibrate_censor_rate(
    spec: &PiecewiseHazardSpec,
    accrual: f64,
    followup: f64,
    target: f64,
    mode: CensoringMode,
) -> Result<Calibration> {
    calibrate_with(spec, accrual, followup, target, mode, CALIBRATION_DRAWS, CALIBRATION_SEED)
}

pub fn calibrate_with(
    spec: &PiecewiseHazardSpec,
    accrual: f64,
    followup: f64,
    target: f64,
    mode: CensoringMode,
    draws: usize,
    seed: u64,
) -> Result<Calibration> {
    if !(0.0..1.0).contains(&target) {
        return Err(Error::invalid(format!("censoring target must lie in [0, 1), got {target}")));
    }
    if !(accrual >= 0.0 && followup > 0.0 && accrual.is_finite() && followup.is_finite()) {
        return Err(Error::invalid("accrual and follow-up must be finite, follow-up positive"));
    }
    let draws = Draws::new(spec, accrual, followup, draws.max(1), seed);
    let floor = draws.proportion(0.0, mode);
    if target <= floor {
        if (target == 0.0 && mode != CensoringMode::Total) || (target - floor).abs() < 1e-3 {
            return Ok(Calibration {
                hazard: 0.0,
                achieved: floor,
            });
        }
        return Err(Error::UnattainableCensoring {
            target,
            min: floor,
            max: 1.0,
        });
    }

    let mut lo = 0.0;
    let mut hi = spec.control_rate;
    let mut p_hi = draws.proportion(hi, mode);
    while p_hi < target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::UnattainableCensoring {
                target,
                min: floor,
                max: p_hi,
            });
        }
        p_hi = draws.proportion(hi, mode);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if draws.proportion(mid, mode) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    let hazard = 0.5 * (lo + hi);
    Ok(Calibration {
        hazard,
        achieved: draws.proportion(hazard, mode),
    })
}

/// Censoring proportion realised on fresh draws, used to check a calibration.
pub fn censoring_proportion(
    spec: &PiecewiseHazardSpec,
    accrual: f64,
    followup: f64,
    hazard: f64,
    mode: CensoringMode,
    draws: usize,
    seed: u64,
) -> f64 {
    Draws::new(spec, accrual, followup, draws, seed).proportion(hazard, mode)
}
