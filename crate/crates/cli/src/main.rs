use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use satsurv::analysis::{fit_all_families, full_report, truncate_at, ChangePointSet, ReportOptions};
use satsurv::combo::{maxcombo, ComboComponent, ComboSign, ComboSpec};
use satsurv::io::load_ipd;
use satsurv::km::{drmst_test_with_rule, select_tau, RmstRule};
use satsurv::mvn::MvnOptions;
use satsurv::sim::{
    control_variability_study, cp_misspecification_sweep, misspecified_analysis_study,
    misspecified_control, report, run_study, StudyConfig, StudyTest, DEFAULT_OFFSETS,
};
use satsurv::{fit_mle, Family, FittedModel, SurvivalModel, SurvivalSample};

/// One-sample survival tests for single-arm trials against an external control.
#[derive(Parser)]
#[command(name = "satsurv", version, about)]
struct Cli {
    /// Log progress messages as well as warnings (to standard error).
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit every parametric family to a control sample and rank by AIC.
    Fit(FitArgs),
    /// Run one test on an experimental sample and print the outcome as JSON.
    Test(TestArgs),
    /// Run a simulation study described by a JSON configuration.
    Simulate(SimulateArgs),
    /// Run the full test battery under one or more control models.
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Table,
    Json,
    Csv,
}

#[derive(Args)]
struct FitArgs {
    /// Control data, CSV with header `time,status`.
    #[arg(long)]
    ipd: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    format: TableFormat,
    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
#[group(id = "control_source", required = true, multiple = false)]
struct SingleControl {
    /// Explicit control model `family:p1[,p2]`, e.g. `exponential:0.35`,
    /// `weibull:1.2,3` (shape, scale), `lognormal:0.5,1` (meanlog, sdlog).
    #[arg(long, group = "control_source")]
    control: Option<SurvivalModel>,
    /// Control data (CSV `time,status`) to fit the control model from.
    #[arg(long, group = "control_source")]
    control_ipd: Option<PathBuf>,
}

#[derive(Args)]
struct TestArgs {
    /// oslrt, moslrt, early:K, middle:K1,K2, delayed:K, crossing, drmst,
    /// drmst:TAU, maxcombo, or maxcombo:COMPONENT;COMPONENT;...
    #[arg(long)]
    method: String,
    /// Experimental data, CSV with header `time,status`.
    #[arg(long)]
    ipd: PathBuf,
    #[command(flatten)]
    control: SingleControl,
    /// Family fitted to --control-ipd; the lowest-AIC family when omitted.
    #[arg(long, requires = "control_ipd")]
    family: Option<Family>,
    /// Significance level in (0, 0.5].
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Integrate the restricted mean as an exact step function instead of
    /// trapezoids.
    #[arg(long)]
    step_rmst: bool,
    /// Combine max-Combo components by their raw maximum.
    #[arg(long)]
    raw_max: bool,
    /// Seed for the max-Combo exact p-value integration.
    #[arg(long, default_value_t = MvnOptions::default().seed)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum StudyKind {
    /// Rejection rates over the configured grid.
    Standard,
    /// Power of the scenario's own test at shifted change-points (scenarios 3 and 5).
    CpSweep,
    /// Control median drawn per replicate versus fixed.
    ControlVariability,
    /// Analysis under a misspecified control model versus the true one.
    Misspecified,
}

#[derive(Args)]
struct SimulateArgs {
    /// Study configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Seed for every random draw; required so runs are reproducible.
    #[arg(long, required = true)]
    seed: u64,
    #[arg(long, value_enum, default_value = "standard")]
    study: StudyKind,
    /// Override the replication count of the configuration.
    #[arg(long)]
    replications: Option<usize>,
    /// Change-point offsets for the sweep, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    offsets: Option<Vec<f64>>,
    /// Analysis model for the misspecified study.
    #[arg(long)]
    analysis_model: Option<SurvivalModel>,
    /// Output prefix; writes PREFIX.csv, PREFIX.json and PREFIX_plot.csv.
    #[arg(long, default_value = "simulation")]
    output: PathBuf,
}

#[derive(Args)]
#[group(id = "analyze_control", required = true, multiple = false)]
struct AnalyzeControl {
    /// Explicit control model(s) `family:p1[,p2]`; repeat for several columns.
    #[arg(long, group = "analyze_control")]
    control: Vec<SurvivalModel>,
    /// Control data; every family is fitted and the columns ordered by AIC.
    #[arg(long, group = "analyze_control")]
    control_ipd: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Experimental data, CSV with header `time,status`.
    #[arg(long)]
    ipd: PathBuf,
    #[command(flatten)]
    control: AnalyzeControl,
    /// Early-effect change-points, comma separated.
    #[arg(long, value_delimiter = ',')]
    early: Vec<f64>,
    /// Middle-effect windows `K1,K2`; repeat for several.
    #[arg(long)]
    middle: Vec<String>,
    /// Delayed-effect change-points, comma separated.
    #[arg(long, value_delimiter = ',')]
    delayed: Vec<f64>,
    /// Include the crossing-hazards score test.
    #[arg(long)]
    crossing: bool,
    /// Include the max-Combo test; `default` or `COMPONENT;COMPONENT;...`.
    #[arg(long)]
    combo: Option<String>,
    /// Restriction time for the RMST test.
    #[arg(long)]
    tau: Option<f64>,
    /// Censor experimental follow-up at the last control time (needs
    /// --control-ipd).
    #[arg(long, requires = "control_ipd")]
    truncate: bool,
    /// Censor experimental follow-up at this time.
    #[arg(long, conflicts_with = "truncate")]
    truncate_at: Option<f64>,
    /// Seed for the max-Combo exact p-value integration.
    #[arg(long, default_value_t = MvnOptions::default().seed)]
    seed: u64,
    /// Write the report as JSON to this file.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write every (test, model) p-value as CSV to this file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Errors caused by arguments rather than by the computation.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<satsurv::Error>() {
            return if e.is_input_error() { 2 } else { 1 };
        }
        if cause.is::<UsageError>() || cause.is::<std::io::Error>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    let result = match cli.command {
        Command::Fit(a) => fit(a),
        Command::Test(a) => test(a),
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => analyze(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg: Vec<String> = e.chain().map(|c| c.to_string()).collect();
            eprintln!("error: {}", msg.join(": "));
            ExitCode::from(exit_code(&e))
        }
    }
}

fn open_output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn read_sample(path: &Path) -> anyhow::Result<SurvivalSample> {
    load_ipd(path).with_context(|| format!("reading {}", path.display()))
}

fn fit(args: FitArgs) -> anyhow::Result<()> {
    let sample = read_sample(&args.ipd)?;
    let fits = fit_all_families(&sample)?;
    let mut out = open_output(args.output.as_deref())?;
    match args.format {
        TableFormat::Json => {
            serde_json::to_writer_pretty(&mut out, &fits)?;
            writeln!(out)?;
        }
        TableFormat::Csv => {
            writeln!(out, "family,model,loglik,aic,converged")?;
            for f in &fits {
                writeln!(
                    out,
                    "{},\"{}\",{},{},{}",
                    f.family(),
                    f.model,
                    f.loglik.unwrap_or(f64::NAN),
                    f.aic.unwrap_or(f64::NAN),
                    f.converged
                )?;
            }
        }
        TableFormat::Table => {
            writeln!(
                out,
                "n = {}, events = {}, censored = {:.1}%",
                sample.len(),
                sample.event_count(),
                100.0 * sample.censored_fraction()
            )?;
            writeln!(out, "{:<12} {:>12} {:>12}  parameters", "family", "loglik", "AIC")?;
            for f in &fits {
                writeln!(
                    out,
                    "{:<12} {:>12.4} {:>12.4}  {}",
                    f.family().to_string(),
                    f.loglik.unwrap_or(f64::NAN),
                    f.aic.unwrap_or(f64::NAN),
                    f.model
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn resolve_single_control(
    control: &SingleControl,
    family: Option<Family>,
) -> anyhow::Result<(FittedModel, Option<f64>)> {
    match (&control.control, &control.control_ipd) {
        (Some(m), None) => Ok((FittedModel::fixed(*m), None)),
        (None, Some(path)) => {
            let data = read_sample(path)?;
            let fitted = match family {
                Some(f) => fit_mle(&data, f)?,
                None => fit_all_families(&data)?.remove(0),
            };
            log::info!("control model fitted from {}: {}", path.display(), fitted.model);
            Ok((fitted, Some(data.max_time())))
        }
        _ => Err(usage("give exactly one of --control or --control-ipd")),
    }
}

fn check_alpha(alpha: f64) -> anyhow::Result<()> {
    if alpha > 0.0 && alpha <= 0.5 {
        Ok(())
    } else {
        Err(usage(format!("--alpha must lie in (0, 0.5], got {alpha}")))
    }
}

fn test(args: TestArgs) -> anyhow::Result<()> {
    check_alpha(args.alpha)?;
    let method: StudyTest = args.method.parse()?;
    let sample = read_sample(&args.ipd)?;
    let (control, control_max) = resolve_single_control(&args.control, args.family)?;
    let model = control.model;
    let value = match method {
        StudyTest::Score(t) => serde_json::to_value(t.evaluate(&sample, &model)?.with_alpha(args.alpha))?,
        StudyTest::Drmst { tau } => {
            let tau = match tau {
                Some(t) => t,
                None => select_tau(&sample, control_max.unwrap_or_else(|| sample.max_time()))?,
            };
            let rule = if args.step_rmst { RmstRule::Step } else { RmstRule::Trapezoid };
            serde_json::to_value(drmst_test_with_rule(&sample, &model, tau, rule)?.with_alpha(args.alpha))?
        }
        StudyTest::MaxCombo { mut spec, .. } => {
            if args.raw_max {
                spec.sign = ComboSign::RawMax;
            }
            let r = maxcombo(&sample, &model, &spec, &MvnOptions::with_seed(args.seed))?;
            serde_json::to_value(r)?
        }
    };
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &value)?;
    writeln!(out)?;
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> satsurv::Result<()>) -> anyhow::Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?);
    f(&mut w)?;
    w.flush()?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let mut config: StudyConfig = serde_json::from_str(&text)
        .map_err(satsurv::Error::from)
        .with_context(|| format!("parsing {}", args.config.display()))?;
    config.seed = Some(args.seed);
    if let Some(r) = args.replications {
        config.replications = r;
    }
    config.validate()?;
    let prefix = args.output;
    match args.study {
        StudyKind::Standard => {
            let rep = run_study(&config)?;
            write_file(&with_suffix(&prefix, ".csv"), |w| report::write_cells_csv(&rep, w))?;
            write_file(&with_suffix(&prefix, ".json"), |w| report::write_json(&rep, w))?;
            write_file(&with_suffix(&prefix, "_plot.csv"), |w| report::write_plot_csv(&rep, w))?;
        }
        StudyKind::CpSweep => {
            let offsets = args.offsets.unwrap_or_else(|| DEFAULT_OFFSETS.to_vec());
            let rep = cp_misspecification_sweep(&config, &offsets)?;
            write_file(&with_suffix(&prefix, ".csv"), |w| report::write_sweep_csv(&rep, w))?;
            write_file(&with_suffix(&prefix, ".json"), |w| report::write_json(&rep, w))?;
            write_file(&with_suffix(&prefix, "_plot.csv"), |w| report::write_plot_csv(&rep.report, w))?;
        }
        StudyKind::ControlVariability | StudyKind::Misspecified => {
            let rep = if matches!(args.study, StudyKind::ControlVariability) {
                control_variability_study(&config, config.median_prior.unwrap_or_default())?
            } else {
                let model = args.analysis_model.unwrap_or_else(misspecified_control);
                misspecified_analysis_study(&config, model)?
            };
            write_file(&with_suffix(&prefix, ".csv"), |w| report::write_comparison_csv(&rep, w))?;
            write_file(&with_suffix(&prefix, ".json"), |w| report::write_json(&rep, w))?;
            write_file(&with_suffix(&prefix, "_plot.csv"), |w| report::write_plot_csv(&rep.variant, w))?;
        }
    }
    Ok(())
}

fn parse_combo(s: &str) -> anyhow::Result<ComboSpec> {
    if s.eq_ignore_ascii_case("default") {
        return Ok(ComboSpec::default());
    }
    let components = s
        .split(';')
        .map(|c| c.parse::<ComboComponent>())
        .collect::<satsurv::Result<Vec<_>>>()?;
    Ok(ComboSpec {
        components,
        ..ComboSpec::default()
    })
}

fn analyze(args: AnalyzeArgs) -> anyhow::Result<()> {
    let mut experimental = read_sample(&args.ipd)?;
    let (models, control_max) = match (&args.control.control_ipd, args.control.control.is_empty()) {
        (Some(path), true) => {
            let data = read_sample(path)?;
            (fit_all_families(&data)?, Some(data.max_time()))
        }
        (None, false) => (args.control.control.iter().map(|m| FittedModel::fixed(*m)).collect(), None),
        _ => bail!(usage("give either --control (one or more) or --control-ipd")),
    };
    let truncated_at = match (args.truncate, args.truncate_at) {
        (true, _) => control_max,
        (false, t) => t,
    };
    if let Some(t) = truncated_at {
        experimental = truncate_at(&experimental, t)?;
    }
    let middle = args
        .middle
        .iter()
        .map(|m| {
            let (a, b) = m
                .split_once(',')
                .ok_or_else(|| usage(format!("--middle expects K1,K2, got '{m}'")))?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| usage(format!("bad change-point '{x}' in --middle")))
            };
            Ok((parse(a)?, parse(b)?))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let options = ReportOptions {
        change_points: ChangePointSet {
            early: args.early,
            middle,
            delayed: args.delayed,
            crossing: args.crossing,
        },
        combo: args.combo.as_deref().map(parse_combo).transpose()?,
        tau: args.tau,
        control_max_time: control_max,
        truncated_at,
        mvn_seed: args.seed,
    };
    let report = full_report(&experimental, &models, &options)?;
    print!("{}", report.render());
    if let Some(p) = &args.json {
        write_file(p, |w| {
            serde_json::to_writer_pretty(&mut *w, &report)?;
            Ok(())
        })?;
    }
    if let Some(p) = &args.csv {
        write_file(p, |w| report.write_csv(w))?;
    }
    Ok(())
}
