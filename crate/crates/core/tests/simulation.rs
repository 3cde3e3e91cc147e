use satsurv::km::km_estimate;
use satsurv::sim::report::{read_report_json, write_cells_csv, write_json};
use satsurv::sim::{
    calibrate_censor_rate, censoring_proportion, control_variability_study, cp_misspecification_sweep,
    misspecified_analysis_study, run_study, simulate_trial,
    CensoringMode, CrossingOrientation, MedianPrior, Scenario, StudyConfig, StudyTest, TrialDesign, LN2_OVER_2,
};
use satsurv::score::ScoreTest;
use satsurv::SurvivalModel;

fn design(scenario: Scenario, n: usize, dropout_hazard: f64, followup: f64) -> TrialDesign {
    TrialDesign {
        spec: scenario.hazard_spec(LN2_OVER_2, 0.5, CrossingOrientation::default()).unwrap(),
        n,
        accrual: 0.0,
        followup,
        dropout_hazard,
        seed: 99,
        median_prior: None,
    }
}

#[test]
fn simulated_arms_follow_the_piecewise_law() {
    for scenario in [Scenario::EarlyEffect, Scenario::MiddleEffect, Scenario::CrossingHazards] {
        let d = design(scenario, 100_000, 0.0, 50.0);
        let s = simulate_trial(&d, 0).unwrap();
        let km = km_estimate(&s);
        for t in [0.5, 1.0, 2.0, 3.5, 5.0] {
            let diff = km.survival_at(t) - d.spec.survival(t);
            assert!(diff.abs() < 0.006, "scenario {}: S({t}) off by {diff}", scenario.id());
        }
    }
}

#[test]
fn calibrated_dropout_reaches_target_on_fresh_draws() {
    for scenario in [Scenario::Null, Scenario::DelayedEffect] {
        let spec = scenario.hazard_spec(LN2_OVER_2, 0.5, CrossingOrientation::default()).unwrap();
        for (mode, target) in [
            (CensoringMode::Dropout, 0.15),
            (CensoringMode::Dropout, 0.30),
            (CensoringMode::NoAdmin, 0.15),
            (CensoringMode::Total, 0.45),
        ] {
            let c = calibrate_censor_rate(&spec, 3.0, 4.0, target, mode).unwrap();
            let fresh = censoring_proportion(&spec, 3.0, 4.0, c.hazard, mode, 200_000, 4242);
            assert!((fresh - target).abs() < 0.005, "{mode:?} {target}: {fresh}");
        }
    }
}

#[test]
fn total_censoring_below_the_administrative_floor_is_rejected() {
    let spec = Scenario::Null.hazard_spec(LN2_OVER_2, 1.0, CrossingOrientation::default()).unwrap();
    assert!(calibrate_censor_rate(&spec, 3.0, 4.0, 0.05, CensoringMode::Total).is_err());
}

#[test]
fn simulated_censoring_matches_target() {
    let config = StudyConfig::cell(Scenario::ProportionalHazards, 100, 0.5, 0.15, 400, 5)
        .with_tests(vec![StudyTest::Score(ScoreTest::Oslrt)]);
    let report = run_study(&config).unwrap();
    let cell = &report.cells[0];
    assert!((cell.mean_dropout - 0.15).abs() < 0.01, "{}", cell.mean_dropout);
    assert!(cell.mean_censoring > cell.mean_dropout);
}

fn small_config() -> StudyConfig {
    let mut c = StudyConfig::cell(Scenario::EarlyEffect, 40, 0.5, 0.15, 200, 17);
    c.scenarios.push(Scenario::CrossingHazards);
    c.n.push(60);
    c
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let config = small_config();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_study(&config).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn reports_round_trip_through_json_and_csv_is_stable() {
    let report = run_study(&small_config()).unwrap();
    let mut json = Vec::new();
    write_json(&report, &mut json).unwrap();
    assert_eq!(read_report_json(json.as_slice()).unwrap(), report);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    write_cells_csv(&report, &mut a).unwrap();
    write_cells_csv(&run_study(&small_config()).unwrap(), &mut b).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sweep_with_zero_offset_reproduces_the_true_change_point() {
    let mut config = StudyConfig::cell(Scenario::EarlyEffect, 50, 0.5, 0.15, 300, 8);
    config.scenarios.push(Scenario::DelayedEffect);
    let sweep = cp_misspecification_sweep(&config, &[0.0, -0.5]).unwrap();
    assert_eq!(sweep.rows.len(), 4);
    let direct = run_study(&config).unwrap();
    for row in sweep.rows.iter().filter(|r| r.offset == 0.0) {
        assert_eq!(row.drop, 0.0);
        let scenario = if row.scenario == 3 { Scenario::EarlyEffect } else { Scenario::DelayedEffect };
        let label = if row.scenario == 3 { "early:1" } else { "delayed:3" };
        assert_eq!(direct.rate(scenario, label, 50), Some(row.power_true));
        assert_eq!(direct.rate(scenario, "oslrt", 50), Some(row.oslrt_power));
    }
    assert!(cp_misspecification_sweep(&StudyConfig::cell(Scenario::Null, 10, 1.0, 0.0, 5, 1), &[0.5]).is_err());
}

#[test]
fn correctly_specified_comparisons_are_exact_no_ops() {
    let config = StudyConfig::cell(Scenario::EarlyEffect, 40, 0.5, 0.15, 200, 23);
    let same = misspecified_analysis_study(&config, SurvivalModel::exponential(LN2_OVER_2).unwrap()).unwrap();
    assert!(same.rows.iter().all(|r| r.difference == 0.0));

    let other = misspecified_analysis_study(&config, SurvivalModel::log_logistic(1.7, 2.0).unwrap()).unwrap();
    assert!(other.rows.iter().any(|r| r.difference != 0.0));
    assert_eq!(other.baseline, same.baseline);
}

#[test]
fn a_degenerate_median_prior_matches_the_fixed_control() {
    // Median prior concentrated at ln 2/λ: every replicate reuses the
    // nominal control up to O(1e-4) perturbations of the rate.
    let median = std::f64::consts::LN_2 / LN2_OVER_2;
    let prior = MedianPrior { shape: 1e8, rate: 1e8 / median };
    let config = StudyConfig::cell(Scenario::Null, 60, 1.0, 0.15, 400, 31);
    let cmp = control_variability_study(&config, prior).unwrap();
    for r in &cmp.rows {
        assert!(r.difference.abs() <= 0.01, "{}: {}", r.test, r.difference);
    }
}

#[test]
fn scenario_two_at_unit_ratio_is_the_null() {
    let tests = vec![StudyTest::Score(ScoreTest::Oslrt), StudyTest::Drmst { tau: None }];
    let a = run_study(&StudyConfig::cell(Scenario::Null, 50, 1.0, 0.15, 200, 3).with_tests(tests.clone())).unwrap();
    let b = run_study(&StudyConfig::cell(Scenario::ProportionalHazards, 50, 1.0, 0.15, 200, 3).with_tests(tests))
        .unwrap();
    let rates = |r: &satsurv::sim::SimulationReport| r.cells.iter().map(|c| c.rate).collect::<Vec<_>>();
    assert_eq!(rates(&a), rates(&b));
}

#[test]
fn config_rejects_unknown_fields_and_missing_seed() {
    let bad: Result<StudyConfig, _> = serde_json::from_str(r#"{"scenarios":[1],"n":[10],"sede":1}"#);
    assert!(bad.is_err());
    let no_seed: StudyConfig = serde_json::from_str(r#"{"scenarios":[1],"n":[10]}"#).unwrap();
    assert!(run_study(&no_seed).is_err());
    let ok: StudyConfig =
        serde_json::from_str(r#"{"scenarios":[3,6],"n":[20],"seed":1,"tests":["early:1","maxcombo"]}"#).unwrap();
    assert_eq!(ok.tests.as_ref().unwrap().len(), 2);
}
