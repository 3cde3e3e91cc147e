//! Trial simulation: piecewise-exponential event times, uniform accrual,
//! administrative and dropout censoring, and operating-characteristic
//! studies built on top.

mod battery;
mod censoring;
mod piecewise;
pub mod report;
mod scenario;
mod study;

pub use battery::{default_battery, StudyTest};
pub use censoring::{
    calibrate_censor_rate, calibrate_with, censoring_proportion, Calibration, CensoringMode,
    CALIBRATION_DRAWS, CALIBRATION_SEED,
};
pub use piecewise::PiecewiseHazardSpec;
pub use scenario::{
    AnalysisChangePoints, CrossingOrientation, Scenario, ACCRUAL_YEARS, FOLLOWUP_YEARS, LN2_OVER_2,
    ROUNDED_RATE,
};
pub use study::{
    control_variability_study, cp_misspecification_sweep, draw_medians, misspecified_analysis_study,
    misspecified_control, observe, run_study, simulate_trial, CellResult, ComparisonReport,
    ComparisonRow, MedianPrior, SimulationReport, StudyConfig, SweepReport, SweepRow, TrialDesign,
    DEFAULT_OFFSETS,
};
