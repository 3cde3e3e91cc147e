//! Writers for simulation results: one CSV row per cell and test, the full
//! report as JSON, and a long-format CSV for plotting rejection rate
//! against sample size.

use std::io::{Read, Write};

use serde::Serialize;

use super::study::{ComparisonReport, SimulationReport, SweepReport};
use crate::error::Result;

/// Rows in CSV order.
pub fn write_cells_csv<W: Write>(report: &SimulationReport, out: W) -> Result<()> {
    write_rows(&report.cells, out)
}

pub fn write_json<W: Write, T: Serialize>(value: &T, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, value)?;
    Ok(())
}

pub fn read_report_json<R: Read>(input: R) -> Result<SimulationReport> {
    Ok(serde_json::from_reader(input)?)
}

#[derive(Serialize)]
struct PlotRow<'a> {
    scenario: u8,
    censor_target: f64,
    hr: f64,
    test: &'a str,
    n: usize,
    metric: &'static str,
    value: f64,
}

/// Long format: one row per (cell, test, metric), with `n` as the x axis and
/// panels keyed by scenario, censoring target and HR.
pub fn write_plot_csv<W: Write>(report: &SimulationReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in &report.cells {
        for (metric, value) in [
            ("rejection_rate", c.rate),
            ("mc_se", c.mc_se),
            ("lower_95", (c.rate - 1.96 * c.mc_se).max(0.0)),
            ("upper_95", (c.rate + 1.96 * c.mc_se).min(1.0)),
        ] {
            w.serialize(PlotRow {
                scenario: c.scenario,
                censor_target: c.censor_target,
                hr: c.hr,
                test: &c.test,
                n: c.n,
                metric,
                value,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(report: &SweepReport, out: W) -> Result<()> {
    write_rows(&report.rows, out)
}

pub fn write_comparison_csv<W: Write>(report: &ComparisonReport, out: W) -> Result<()> {
    write_rows(&report.rows, out)
}

fn write_rows<W: Write, T: Serialize>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
