use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::battery::{default_battery, StudyTest};
use super::censoring::{calibrate_censor_rate, CensoringMode};
use super::piecewise::PiecewiseHazardSpec;
use super::scenario::{
    CrossingOrientation, Scenario, ACCRUAL_YEARS, FOLLOWUP_YEARS, LN2_OVER_2, ROUNDED_RATE,
};
use crate::dist::SurvivalModel;
use crate::error::{Error, Result};
use crate::mvn::MvnOptions;
use crate::sample::SurvivalSample;
use crate::score::{ScoreTest, DEFAULT_ALPHA};

/// Separates the stream of drawn control medians from the patient streams.
const MEDIAN_STREAM_KEY: u64 = 0x6d65_6469_616e_7321;
const MVN_SEED_KEY: u64 = 0x9e37_79b9_7f4a_7c15;

/// Gamma prior (shape, rate) on the control median.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MedianPrior {
    pub shape: f64,
    pub rate: f64,
}

impl Default for MedianPrior {
    /// Mean 2 years and variance 0.05.
    fn default() -> Self {
        Self {
            shape: 80.0,
            rate: 40.0,
        }
    }
}

impl MedianPrior {
    fn distribution(&self) -> Result<Gamma<f64>> {
        Gamma::new(self.shape, 1.0 / self.rate)
            .map_err(|e| Error::invalid(format!("median prior: {e}")))
    }
}

/// Draws `count` control medians, each from the stream used by replicate i.
pub fn draw_medians(prior: &MedianPrior, count: usize, seed: u64) -> Result<Vec<f64>> {
    let dist = prior.distribution()?;
    Ok((0..count)
        .map(|i| median_rng(seed, i as u64).sample(dist))
        .collect())
}

fn median_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ MEDIAN_STREAM_KEY);
    rng.set_stream(index);
    rng
}

fn default_hr() -> Vec<f64> {
    vec![0.5]
}
fn default_censoring() -> Vec<f64> {
    vec![0.15]
}
fn default_replications() -> usize {
    2000
}
fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}
fn default_accrual() -> f64 {
    ACCRUAL_YEARS
}
fn default_followup() -> f64 {
    FOLLOWUP_YEARS
}

/// A simulation study: the grid scenario × n × HR × censoring target, each
/// cell analysed with the same test battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub scenarios: Vec<Scenario>,
    pub n: Vec<usize>,
    #[serde(default = "default_hr")]
    pub hr: Vec<f64>,
    #[serde(default = "default_censoring")]
    pub censoring: Vec<f64>,
    /// Per-scenario defaults when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tests: Option<Vec<StudyTest>>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Overrides the control hazard; otherwise ln 2 / 2 (or 0.35 with
    /// `rounded_rate`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_rate: Option<f64>,
    #[serde(default)]
    pub rounded_rate: bool,
    #[serde(default)]
    pub censoring_mode: CensoringMode,
    #[serde(default)]
    pub crossing_orientation: CrossingOrientation,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_accrual")]
    pub accrual: f64,
    #[serde(default = "default_followup")]
    pub followup: f64,
    /// Control model used by the tests; the exponential generating control
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis_model: Option<SurvivalModel>,
    /// Draw a fresh control median per replicate for data generation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub median_prior: Option<MedianPrior>,
}

impl StudyConfig {
    /// A single-cell study with defaults elsewhere.
    pub fn cell(scenario: Scenario, n: usize, hr: f64, censoring: f64, replications: usize, seed: u64) -> Self {
        Self {
            scenarios: vec![scenario],
            n: vec![n],
            hr: vec![hr],
            censoring: vec![censoring],
            tests: None,
            replications,
            seed: Some(seed),
            control_rate: None,
            rounded_rate: false,
            censoring_mode: CensoringMode::default(),
            crossing_orientation: CrossingOrientation::default(),
            alpha: DEFAULT_ALPHA,
            accrual: ACCRUAL_YEARS,
            followup: FOLLOWUP_YEARS,
            analysis_model: None,
            median_prior: None,
        }
    }

    pub fn with_tests(mut self, tests: Vec<StudyTest>) -> Self {
        self.tests = Some(tests);
        self
    }

    pub fn control_rate(&self) -> f64 {
        match self.control_rate {
            Some(r) => r,
            None if self.rounded_rate => ROUNDED_RATE,
            None => LN2_OVER_2,
        }
    }

    pub fn analysis_model(&self) -> Result<SurvivalModel> {
        match self.analysis_model {
            Some(m) => m.validated(),
            None => SurvivalModel::exponential(self.control_rate()),
        }
    }

    pub fn horizon(&self) -> f64 {
        self.accrual + self.followup
    }

    pub fn validate(&self) -> Result<()> {
        let seed_missing = self.seed.is_none();
        let checks: [(bool, &str); 9] = [
            (self.scenarios.is_empty(), "no scenarios"),
            (self.n.is_empty() || self.n.contains(&0), "sample sizes must be positive"),
            (
                self.hr.is_empty() || self.hr.iter().any(|h| !(h.is_finite() && *h > 0.0)),
                "hazard ratios must be positive",
            ),
            (
                self.censoring.is_empty() || self.censoring.iter().any(|c| !(0.0..1.0).contains(c)),
                "censoring targets must lie in [0, 1)",
            ),
            (self.replications == 0, "replications must be positive"),
            (seed_missing, "a seed is required"),
            (!(self.alpha > 0.0 && self.alpha <= 0.5), "alpha must lie in (0, 0.5]"),
            (
                !(self.accrual >= 0.0 && self.followup > 0.0 && self.horizon().is_finite()),
                "accrual must be nonnegative and follow-up positive",
            ),
            (
                !(self.control_rate() > 0.0 && self.control_rate().is_finite()),
                "control rate must be positive",
            ),
        ];
        if let Some((_, msg)) = checks.iter().find(|(bad, _)| *bad) {
            return Err(Error::invalid(format!("study config: {msg}")));
        }
        self.analysis_model()?;
        if let Some(p) = self.median_prior {
            p.distribution()?;
        }
        Ok(())
    }

    fn battery(&self, scenario: Scenario) -> Vec<StudyTest> {
        self.tests.clone().unwrap_or_else(|| default_battery(scenario))
    }
}

/// Everything needed to draw one simulated experimental arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialDesign {
    pub spec: PiecewiseHazardSpec,
    pub n: usize,
    pub accrual: f64,
    pub followup: f64,
    /// Exponential dropout hazard; 0 disables dropout.
    pub dropout_hazard: f64,
    pub seed: u64,
    pub median_prior: Option<MedianPrior>,
}

/// Observed time and event indicator for one patient.
pub fn observe(entry: f64, event: f64, dropout: f64, horizon: f64) -> (f64, bool) {
    let admin = horizon - entry;
    let x = event.min(dropout).min(admin);
    (x, event <= dropout && event <= admin)
}

#[derive(Debug, Clone, Copy)]
struct Patient {
    time: f64,
    event: bool,
    dropped_out: bool,
}

fn simulate_patients(design: &TrialDesign, index: u64) -> Result<Vec<Patient>> {
    let spec = match design.median_prior {
        None => design.spec.clone(),
        Some(prior) => {
            let median: f64 = median_rng(design.seed, index).sample(prior.distribution()?);
            PiecewiseHazardSpec::new(
                std::f64::consts::LN_2 / median,
                design.spec.change_points.clone(),
                design.spec.segment_hrs.clone(),
            )?
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(design.seed);
    rng.set_stream(index);
    let horizon = design.accrual + design.followup;
    let patients = (0..design.n)
        .map(|_| {
            // Three draws per patient whatever the design, so that designs
            // differing only in dropout share their random numbers.
            let entry = design.accrual * rng.random::<f64>();
            let u = 1.0 - rng.random::<f64>();
            let e: f64 = rng.sample(Exp1);
            let event = spec.inverse_cum_hazard(-u.ln());
            let dropout = if design.dropout_hazard > 0.0 {
                e / design.dropout_hazard
            } else {
                f64::INFINITY
            };
            let (time, is_event) = observe(entry, event, dropout, horizon);
            Patient {
                time,
                event: is_event,
                dropped_out: !is_event && dropout < horizon - entry,
            }
        })
        .collect();
    Ok(patients)
}

/// Draws replicate `index` of a design. The stream depends only on the seed
/// and the index.
pub fn simulate_trial(design: &TrialDesign, index: u64) -> Result<SurvivalSample> {
    let patients = simulate_patients(design, index)?;
    SurvivalSample::new(
        patients.iter().map(|p| p.time).collect(),
        patients.iter().map(|p| p.event).collect(),
    )
}

/// Rejection rate of one test in one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub scenario: u8,
    pub test: String,
    pub n: usize,
    pub censor_target: f64,
    pub hr: f64,
    pub replications: usize,
    pub rejections: usize,
    /// Replicates where the statistic was undefined, counted as
    /// non-rejections.
    pub degenerate: usize,
    pub rate: f64,
    /// √(p̂(1 − p̂)/R).
    pub mc_se: f64,
    pub mean_events: f64,
    /// Mean proportion of patients without an observed event.
    pub mean_censoring: f64,
    /// Mean proportion censored by dropout before event and cutoff.
    pub mean_dropout: f64,
    pub dropout_hazard: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: StudyConfig,
    pub cells: Vec<CellResult>,
}

impl SimulationReport {
    pub fn find(&self, scenario: Scenario, test: &str, n: usize) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.scenario == scenario.id() && c.test == test && c.n == n)
    }

    pub fn rate(&self, scenario: Scenario, test: &str, n: usize) -> Option<f64> {
        self.find(scenario, test, n).map(|c| c.rate)
    }
}

struct ReplicateOutcome {
    decisions: Vec<Option<bool>>,
    events: usize,
    censored: usize,
    dropped: usize,
}

fn run_replicate(
    design: &TrialDesign,
    index: u64,
    tests: &[StudyTest],
    control: &SurvivalModel,
    alpha: f64,
) -> Result<ReplicateOutcome> {
    let patients = simulate_patients(design, index)?;
    let sample = SurvivalSample::new(
        patients.iter().map(|p| p.time).collect(),
        patients.iter().map(|p| p.event).collect(),
    )?;
    let horizon = design.accrual + design.followup;
    let mvn = MvnOptions::with_seed(design.seed.wrapping_mul(MVN_SEED_KEY).wrapping_add(index));
    let decisions = tests
        .iter()
        .map(|t| t.rejects(&sample, control, alpha, horizon, &mvn).ok())
        .collect();
    let events = sample.event_count();
    Ok(ReplicateOutcome {
        decisions,
        events,
        censored: sample.len() - events,
        dropped: patients.iter().filter(|p| p.dropped_out).count(),
    })
}

/// Runs `replications` replicates of one design and tabulates every test.
#[allow(clippy::too_many_arguments)]
fn run_cell(
    design: &TrialDesign,
    scenario: Scenario,
    hr: f64,
    censor_target: f64,
    tests: &[StudyTest],
    control: &SurvivalModel,
    alpha: f64,
    replications: usize,
) -> Result<Vec<CellResult>> {
    let outcomes: Vec<ReplicateOutcome> = (0..replications as u64)
        .into_par_iter()
        .map(|i| run_replicate(design, i, tests, control, alpha))
        .collect::<Result<_>>()?;
    let r = replications as f64;
    let n = design.n as f64;
    let mean_events = outcomes.iter().map(|o| o.events as f64).sum::<f64>() / r;
    let mean_censoring = outcomes.iter().map(|o| o.censored as f64 / n).sum::<f64>() / r;
    let mean_dropout = outcomes.iter().map(|o| o.dropped as f64 / n).sum::<f64>() / r;
    Ok(tests
        .iter()
        .enumerate()
        .map(|(j, test)| {
            let rejections = outcomes.iter().filter(|o| o.decisions[j] == Some(true)).count();
            let degenerate = outcomes.iter().filter(|o| o.decisions[j].is_none()).count();
            if degenerate > 0 {
                log::warn!(
                    "scenario {} n={} {test}: {degenerate} of {replications} replicates degenerate",
                    scenario.id(),
                    design.n
                );
            }
            let rate = rejections as f64 / r;
            CellResult {
                scenario: scenario.id(),
                test: test.to_string(),
                n: design.n,
                censor_target,
                hr,
                replications,
                rejections,
                degenerate,
                rate,
                mc_se: (rate * (1.0 - rate) / r).sqrt(),
                mean_events,
                mean_censoring,
                mean_dropout,
                dropout_hazard: design.dropout_hazard,
            }
        })
        .collect())
}

/// Runs every cell of the grid. Replicate i of every cell uses the random
/// stream (seed, i), so results do not depend on the number of threads and
/// cells differing only in their analysis share data.
pub fn run_study(config: &StudyConfig) -> Result<SimulationReport> {
    config.validate()?;
    let seed = config.seed.expect("validated");
    let control = config.analysis_model()?;
    let mut calibrations: HashMap<(Scenario, u64, u64), f64> = HashMap::new();
    let mut cells = Vec::new();
    for &scenario in &config.scenarios {
        let tests = config.battery(scenario);
        for &hr in &config.hr {
            let spec = scenario.hazard_spec(config.control_rate(), hr, config.crossing_orientation)?;
            for &target in &config.censoring {
                let key = (scenario, hr.to_bits(), target.to_bits());
                let dropout_hazard = match calibrations.get(&key) {
                    Some(&h) => h,
                    None => {
                        let c = calibrate_censor_rate(
                            &spec,
                            config.accrual,
                            config.followup,
                            target,
                            config.censoring_mode,
                        )?;
                        log::info!(
                            "scenario {} hr={hr} target={target}: dropout hazard {:.5} (achieved {:.4})",
                            scenario.id(),
                            c.hazard,
                            c.achieved
                        );
                        calibrations.insert(key, c.hazard);
                        c.hazard
                    }
                };
                for &n in &config.n {
                    let design = TrialDesign {
                        spec: spec.clone(),
                        n,
                        accrual: config.accrual,
                        followup: config.followup,
                        dropout_hazard,
                        seed,
                        median_prior: config.median_prior,
                    };
                    cells.extend(run_cell(
                        &design,
                        scenario,
                        hr,
                        target,
                        &tests,
                        &control,
                        config.alpha,
                        config.replications,
                    )?);
                }
            }
        }
    }
    Ok(SimulationReport {
        config: config.clone(),
        cells,
    })
}

/// Power at one shifted change-point against the correctly placed test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scenario: u8,
    pub n: usize,
    pub hr: f64,
    pub censor_target: f64,
    pub offset: f64,
    pub change_point: f64,
    pub power: f64,
    pub power_true: f64,
    /// `power_true − power`; positive when misplacing the change-point costs
    /// power.
    pub drop: f64,
    pub oslrt_power: f64,
    pub moslrt_power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub report: SimulationReport,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn max_drop(&self, scenario: Scenario) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.scenario == scenario.id())
            .map(|r| r.drop)
            .reduce(f64::max)
    }
}

pub const DEFAULT_OFFSETS: [f64; 4] = [-0.5, -0.25, 0.25, 0.5];

fn optimal_test(scenario: Scenario, k: f64) -> Result<ScoreTest> {
    match scenario {
        Scenario::EarlyEffect => Ok(ScoreTest::Early { k }),
        Scenario::DelayedEffect => Ok(ScoreTest::Delayed { k }),
        other => Err(Error::invalid(format!(
            "change-point sweep needs scenario 3 or 5, got {}",
            other.id()
        ))),
    }
}

/// Power of the scenario's own score test with its change-point shifted by
/// each offset, next to the log-rank baselines from the same replicates.
pub fn cp_misspecification_sweep(config: &StudyConfig, offsets: &[f64]) -> Result<SweepReport> {
    let mut cells = Vec::new();
    let mut rows = Vec::new();
    for &scenario in &config.scenarios {
        let true_k = match scenario {
            Scenario::EarlyEffect => scenario.analysis_change_points().early,
            _ => scenario.analysis_change_points().delayed,
        };
        let true_test = optimal_test(scenario, true_k)?;
        let mut shifted = Vec::new();
        for &offset in offsets {
            let mut k = true_k + offset;
            if k < 0.0 {
                log::warn!("shifted change-point {k} clipped to 0");
                k = 0.0;
            }
            shifted.push((offset, k, optimal_test(scenario, k)?));
        }
        let mut tests = vec![
            StudyTest::Score(ScoreTest::Oslrt),
            StudyTest::Score(ScoreTest::Moslrt),
            StudyTest::Score(true_test),
        ];
        for (_, _, t) in &shifted {
            let t = StudyTest::Score(*t);
            if !tests.contains(&t) {
                tests.push(t);
            }
        }
        let mut sub = config.clone();
        sub.scenarios = vec![scenario];
        sub.tests = Some(tests);
        let report = run_study(&sub)?;
        for &n in &config.n {
            for &hr in &config.hr {
                for &target in &config.censoring {
                    let rate = |label: &str| {
                        report
                            .cells
                            .iter()
                            .find(|c| c.n == n && c.hr == hr && c.censor_target == target && c.test == label)
                            .map(|c| c.rate)
                            .expect("cell present")
                    };
                    let power_true = rate(&true_test.to_string());
                    for (offset, k, t) in &shifted {
                        let power = rate(&t.to_string());
                        rows.push(SweepRow {
                            scenario: scenario.id(),
                            n,
                            hr,
                            censor_target: target,
                            offset: *offset,
                            change_point: *k,
                            power,
                            power_true,
                            drop: power_true - power,
                            oslrt_power: rate("oslrt"),
                            moslrt_power: rate("moslrt"),
                        });
                    }
                }
            }
        }
        cells.extend(report.cells);
    }
    Ok(SweepReport {
        report: SimulationReport {
            config: config.clone(),
            cells,
        },
        rows,
    })
}

/// One cell of a baseline study next to the same cell of a variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub scenario: u8,
    pub test: String,
    pub n: usize,
    pub censor_target: f64,
    pub hr: f64,
    pub baseline_rate: f64,
    pub variant_rate: f64,
    pub difference: f64,
    /// (variant − baseline)/baseline, absent when the baseline rate is 0.
    pub relative_difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub baseline: SimulationReport,
    pub variant: SimulationReport,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    fn build(baseline: SimulationReport, variant: SimulationReport) -> Self {
        let rows = baseline
            .cells
            .iter()
            .zip(&variant.cells)
            .map(|(b, v)| ComparisonRow {
                scenario: b.scenario,
                test: b.test.clone(),
                n: b.n,
                censor_target: b.censor_target,
                hr: b.hr,
                baseline_rate: b.rate,
                variant_rate: v.rate,
                difference: v.rate - b.rate,
                relative_difference: (b.rate > 0.0).then(|| (v.rate - b.rate) / b.rate),
            })
            .collect();
        Self {
            baseline,
            variant,
            rows,
        }
    }

    pub fn row(&self, scenario: Scenario, test: &str, n: usize) -> Option<&ComparisonRow> {
        self.rows
            .iter()
            .find(|r| r.scenario == scenario.id() && r.test == test && r.n == n)
    }
}

/// Generates each replicate under a control median drawn from `prior` while
/// analysing with the nominal control, next to the fixed-median study.
pub fn control_variability_study(config: &StudyConfig, prior: MedianPrior) -> Result<ComparisonReport> {
    let mut fixed = config.clone();
    fixed.median_prior = None;
    let mut varied = config.clone();
    varied.median_prior = Some(prior);
    Ok(ComparisonReport::build(run_study(&fixed)?, run_study(&varied)?))
}

/// The control model used by default for the misspecified analysis.
pub fn misspecified_control() -> SurvivalModel {
    SurvivalModel::LogLogistic {
        shape: 1.7,
        scale: 2.0,
    }
}

/// Analyses the usual exponential-control data with `analysis` instead of
/// the generating control, next to the well-specified study.
pub fn misspecified_analysis_study(config: &StudyConfig, analysis: SurvivalModel) -> Result<ComparisonReport> {
    let mut well = config.clone();
    well.analysis_model = None;
    let mut miss = config.clone();
    miss.analysis_model = Some(analysis);
    Ok(ComparisonReport::build(run_study(&well)?, run_study(&miss)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(n: usize, dropout: f64) -> TrialDesign {
        TrialDesign {
            spec: Scenario::Null.hazard_spec(LN2_OVER_2, 1.0, CrossingOrientation::default()).unwrap(),
            n,
            accrual: 3.0,
            followup: 4.0,
            dropout_hazard: dropout,
            seed: 11,
            median_prior: None,
        }
    }

    #[test]
    fn administrative_cutoff() {
        assert_eq!(observe(0.0, 10.0, f64::INFINITY, 7.0), (7.0, false));
        assert_eq!(observe(1.0, 2.0, 5.0, 7.0), (2.0, true));
        assert_eq!(observe(1.0, 4.0, 3.0, 7.0), (3.0, false));
    }

    #[test]
    fn deterministic_streams() {
        let d = design(50, 0.1);
        assert_eq!(simulate_trial(&d, 3).unwrap(), simulate_trial(&d, 3).unwrap());
        assert_ne!(simulate_trial(&d, 3).unwrap(), simulate_trial(&d, 4).unwrap());
    }

    #[test]
    fn smaller_n_is_a_prefix() {
        let a = simulate_trial(&design(20, 0.1), 5).unwrap();
        let b = simulate_trial(&design(40, 0.1), 5).unwrap();
        assert_eq!(a.times(), &b.times()[..20]);
    }

    #[test]
    fn config_requires_seed() {
        let mut c = StudyConfig::cell(Scenario::Null, 10, 1.0, 0.0, 5, 1);
        assert!(c.validate().is_ok());
        c.seed = None;
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_json_defaults() {
        let c: StudyConfig =
            serde_json::from_str(r#"{"scenarios":[1,3],"n":[20],"seed":4}"#).unwrap();
        assert_eq!(c.hr, vec![0.5]);
        assert_eq!(c.replications, 2000);
        assert_eq!(c.scenarios, vec![Scenario::Null, Scenario::EarlyEffect]);
        assert!(serde_json::from_str::<StudyConfig>(r#"{"scenarios":[7],"n":[20]}"#).is_err());
        assert!(serde_json::from_str::<StudyConfig>(r#"{"scenarios":[1],"n":[20],"bogus":1}"#).is_err());
    }

    #[test]
    fn small_study_runs() {
        let c = StudyConfig::cell(Scenario::EarlyEffect, 30, 0.5, 0.15, 40, 2);
        let r = run_study(&c).unwrap();
        assert_eq!(r.cells.len(), default_battery(Scenario::EarlyEffect).len());
        for cell in &r.cells {
            assert!((0.0..=1.0).contains(&cell.rate));
            assert_eq!(cell.replications, 40);
        }
    }
}
