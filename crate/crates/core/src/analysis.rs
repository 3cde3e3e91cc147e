//! Real-data pipeline: fit candidate families to an external control, rank
//! them by AIC and run the full test battery under each control model.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::combo::{maxcombo, ComboSpec};
use crate::dist::{fit_mle, Family, FittedModel};
use crate::error::{Error, Result};
use crate::km::{drmst_test, select_tau};
use crate::mvn::MvnOptions;
use crate::sample::SurvivalSample;
use crate::score::{ScoreTest, TestOutcome};

/// Fits every family and returns the converged fits sorted by ascending AIC.
pub fn fit_all_families(control: &SurvivalSample) -> Result<Vec<FittedModel>> {
    if control.event_count() < 2 {
        return Err(Error::invalid(format!(
            "fitting needs at least 2 events in the control sample, found {}",
            control.event_count()
        )));
    }
    let mut fits = Vec::new();
    let mut failures = Vec::new();
    for family in Family::ALL {
        match fit_mle(control, family) {
            Ok(f) => fits.push(f),
            Err(e) => {
                log::warn!("{family} fit excluded: {e}");
                failures.push(format!("{family}: {e}"));
            }
        }
    }
    if fits.is_empty() {
        return Err(Error::invalid(format!("every fit failed ({})", failures.join("; "))));
    }
    fits.sort_by(|a, b| {
        a.aic
            .unwrap_or(f64::INFINITY)
            .total_cmp(&b.aic.unwrap_or(f64::INFINITY))
    });
    Ok(fits)
}

/// Observations beyond `t_max` become censored at `t_max`.
pub fn truncate_at(sample: &SurvivalSample, t_max: f64) -> Result<SurvivalSample> {
    sample.truncate_at(t_max)
}

/// Score tests to run, each with its change-points.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChangePointSet {
    #[serde(default)]
    pub early: Vec<f64>,
    #[serde(default)]
    pub middle: Vec<(f64, f64)>,
    #[serde(default)]
    pub delayed: Vec<f64>,
    #[serde(default)]
    pub crossing: bool,
}

impl ChangePointSet {
    pub fn tests(&self) -> Vec<ScoreTest> {
        let mut out: Vec<ScoreTest> = self.early.iter().map(|&k| ScoreTest::Early { k }).collect();
        out.extend(self.middle.iter().map(|&(k1, k2)| ScoreTest::Middle { k1, k2 }));
        out.extend(self.delayed.iter().map(|&k| ScoreTest::Delayed { k }));
        if self.crossing {
            out.push(ScoreTest::Crossing);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    pub change_points: ChangePointSet,
    pub combo: Option<ComboSpec>,
    /// Restriction time for the RMST test. When absent it is the smaller of
    /// the experimental and control maximum follow-up.
    pub tau: Option<f64>,
    /// Last follow-up time of the control data, if known.
    pub control_max_time: Option<f64>,
    pub truncated_at: Option<f64>,
    pub mvn_seed: u64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            change_points: ChangePointSet::default(),
            combo: None,
            tau: None,
            control_max_time: None,
            truncated_at: None,
            mvn_seed: MvnOptions::default().seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCell {
    pub statistic: Option<f64>,
    /// One-sided p-value; small values favour the experimental arm for
    /// every row.
    pub p_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl ReportCell {
    fn from_outcome(r: Result<TestOutcome>) -> Self {
        match r {
            Ok(o) => Self {
                statistic: Some(o.statistic),
                p_value: Some(o.p_value),
                warning: None,
            },
            Err(e) => Self::failed(e),
        }
    }

    fn failed(e: Error) -> Self {
        Self {
            statistic: None,
            p_value: None,
            warning: Some(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub test: String,
    /// One cell per control model, in column order.
    pub cells: Vec<ReportCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub note: String,
    /// Control models in column order.
    pub models: Vec<FittedModel>,
    pub rows: Vec<ReportRow>,
    pub tau: f64,
    pub truncated_at: Option<f64>,
    pub warnings: Vec<String>,
}

const NOTE: &str = "One-sided p-values; small values favour the experimental arm. \
Results on reconstructed patient data are approximate.";

/// Runs the battery under each control model: OSLRT, mOSLRT, the requested
/// score tests, the RMST test and, if requested, the max-Combo with its
/// Hochberg and exact p-values. Failures are reported in their cell.
pub fn full_report(
    experimental: &SurvivalSample,
    control_models: &[FittedModel],
    options: &ReportOptions,
) -> Result<AnalysisReport> {
    if control_models.is_empty() {
        return Err(Error::invalid("no control model supplied"));
    }
    let tau = match options.tau {
        Some(t) => t,
        None => select_tau(
            experimental,
            options.control_max_time.unwrap_or_else(|| experimental.max_time()),
        )?,
    };

    let mut tests = vec![ScoreTest::Oslrt, ScoreTest::Moslrt];
    tests.extend(options.change_points.tests());
    let mut rows: Vec<ReportRow> = tests
        .iter()
        .map(|t| ReportRow {
            test: t.to_string(),
            cells: control_models
                .iter()
                .map(|m| ReportCell::from_outcome(t.evaluate(experimental, &m.model)))
                .collect(),
        })
        .collect();
    rows.push(ReportRow {
        test: format!("drmst:{tau}"),
        cells: control_models
            .iter()
            .map(|m| ReportCell::from_outcome(drmst_test(experimental, &m.model, tau)))
            .collect(),
    });
    if let Some(spec) = &options.combo {
        let mvn = MvnOptions::with_seed(options.mvn_seed);
        let results: Vec<_> = control_models
            .iter()
            .map(|m| maxcombo(experimental, &m.model, spec, &mvn))
            .collect();
        let cell = |r: &Result<crate::combo::ComboResult>, exact: bool| match r {
            Ok(c) => ReportCell {
                statistic: Some(c.combined),
                p_value: if exact { c.p_exact } else { Some(c.p_hochberg) },
                warning: (!c.dropped.is_empty()).then(|| {
                    let names: Vec<String> = c.dropped.iter().map(|d| d.component.to_string()).collect();
                    format!("dropped {}", names.join(", "))
                }),
            },
            Err(e) => ReportCell {
                statistic: None,
                p_value: None,
                warning: Some(e.to_string()),
            },
        };
        rows.push(ReportRow {
            test: "maxcombo_hochberg".into(),
            cells: results.iter().map(|r| cell(r, false)).collect(),
        });
        rows.push(ReportRow {
            test: "maxcombo_exact".into(),
            cells: results.iter().map(|r| cell(r, true)).collect(),
        });
    }

    let mut warnings = Vec::new();
    for row in &rows {
        for (cell, model) in row.cells.iter().zip(control_models) {
            if let Some(w) = &cell.warning {
                warnings.push(format!("{} under {}: {w}", row.test, model.family()));
            }
        }
    }
    Ok(AnalysisReport {
        note: NOTE.into(),
        models: control_models.to_vec(),
        rows,
        tau,
        truncated_at: options.truncated_at,
        warnings,
    })
}

impl AnalysisReport {
    pub fn p_value(&self, test: &str, column: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.test == test)
            .and_then(|r| r.cells.get(column))
            .and_then(|c| c.p_value)
    }

    /// Plain-text table: tests down, control models across.
    pub fn render(&self) -> String {
        let headers: Vec<String> = self
            .models
            .iter()
            .map(|m| match m.aic {
                Some(aic) => format!("{} (AIC {aic:.2})", m.family()),
                None => m.model.to_string(),
            })
            .collect();
        let first = self
            .rows
            .iter()
            .map(|r| r.test.len())
            .chain(std::iter::once(4))
            .max()
            .unwrap_or(4);
        let widths: Vec<usize> = headers.iter().map(|h| h.len().max(8)).collect();
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.note);
        let _ = write!(s, "tau = {}", self.tau);
        if let Some(t) = self.truncated_at {
            let _ = write!(s, ", experimental data truncated at {t}");
        }
        s.push_str("\n\n");
        let _ = write!(s, "{:<first$}", "test");
        for (h, w) in headers.iter().zip(&widths) {
            let _ = write!(s, "  {h:>w$}");
        }
        s.push('\n');
        let total = first + widths.iter().map(|w| w + 2).sum::<usize>();
        s.push_str(&"-".repeat(total));
        s.push('\n');
        for row in &self.rows {
            let _ = write!(s, "{:<first$}", row.test);
            for (cell, w) in row.cells.iter().zip(&widths) {
                let text = match cell.p_value {
                    Some(p) if p < 1e-4 => "<0.0001".to_string(),
                    Some(p) => format!("{p:.4}"),
                    None => "NA".to_string(),
                };
                let _ = write!(s, "  {text:>w$}");
            }
            s.push('\n');
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }

    /// One row per (test, control model) with statistic and p-value.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row<'a> {
            test: &'a str,
            family: String,
            model: String,
            statistic: Option<f64>,
            p_value: Option<f64>,
            warning: Option<&'a str>,
        }
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            for (cell, m) in row.cells.iter().zip(&self.models) {
                w.serialize(Row {
                    test: &row.test,
                    family: m.family().to_string(),
                    model: m.model.to_string(),
                    statistic: cell.statistic,
                    p_value: cell.p_value,
                    warning: cell.warning.as_deref(),
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::SurvivalModel;

    fn exp_model() -> FittedModel {
        FittedModel::fixed(SurvivalModel::exponential(0.5).unwrap())
    }

    fn sample() -> SurvivalSample {
        SurvivalSample::new(vec![0.5, 1.0, 2.0, 3.5, 4.0], vec![true, true, false, true, false]).unwrap()
    }

    #[test]
    fn empty_change_point_set_gives_three_rows() {
        let r = full_report(&sample(), &[exp_model()], &ReportOptions::default()).unwrap();
        let names: Vec<&str> = r.rows.iter().map(|r| r.test.as_str()).collect();
        assert_eq!(names, vec!["oslrt", "moslrt", "drmst:4"]);
        assert_eq!(r.tau, 4.0);
    }

    #[test]
    fn degenerate_cells_do_not_abort() {
        let opts = ReportOptions {
            change_points: ChangePointSet {
                delayed: vec![10.0],
                ..Default::default()
            },
            combo: Some(ComboSpec::default()),
            ..Default::default()
        };
        let r = full_report(&sample(), &[exp_model()], &opts).unwrap();
        let row = r.rows.iter().find(|r| r.test == "delayed:10").unwrap();
        assert!(row.cells[0].p_value.is_none());
        assert!(!r.warnings.is_empty());
        assert!(r.render().contains("NA"));
        assert!(r.p_value("maxcombo_exact", 0).is_some());
    }

    #[test]
    fn fit_all_needs_two_events() {
        let s = SurvivalSample::new(vec![1.0, 2.0], vec![true, false]).unwrap();
        assert!(fit_all_families(&s).is_err());
    }

    #[test]
    fn json_round_trip() {
        let r = full_report(&sample(), &[exp_model()], &ReportOptions::default()).unwrap();
        let js = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<AnalysisReport>(&js).unwrap(), r);
    }
}
