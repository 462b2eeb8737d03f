//! `ringflow` command-line tool.
//!
//! Exit status: 0 success, 1 usage error, 2 invalid input, 3 numerical
//! failure (including `validate` exceeding its tolerance). Failures print a
//! single JSON object on standard error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ringflow::oracle::{self, OracleGrid};
use ringflow::scenario::{
    coupling_table, drawdown_table, format_sig6, gradient_table, Format, Report, ReportSettings, ScanAxis,
    Scenario, Table, TableMetadata, Value,
};
use ringflow::{classify_pressure_drop, max_admissible_withdrawal, Error, SafetyThresholds, SeriesOptions};

#[derive(Parser, Debug)]
#[command(
    name = "ringflow",
    version,
    about = "Transient pressure analysis of ring gas pipelines"
)]
#[command(
    after_help = "Units: positions in m, times in s, pressures in Pa, gradients in Pa/m, \
                        withdrawals in Pa*s/m (linearized mass flow)."
)]
struct Cli {
    /// Scenario file (TOML). Defaults to $RINGFLOW_SCENARIO.
    #[arg(long, global = true, env = "RINGFLOW_SCENARIO", value_name = "PATH")]
    scenario: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,

    /// Write output to this file instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Locate the hydraulic coupling point (pressure maximum) at one time.
    Node(NodeArgs),
    /// Pressure and gradient at a single position and time.
    Pressure(PressureArgs),
    /// Pressure gradient profile over the ring at several times.
    GradientTable(GradientArgs),
    /// Inlet and tap pressure over time for several total withdrawal levels.
    Drawdown(DrawdownArgs),
    /// Largest total withdrawal at the tap keeping the inlet above a floor.
    MaxDraw(MaxDrawArgs),
    /// Safety band of an inlet pressure drop (scenario optional; supplies thresholds).
    Classify(ClassifyArgs),
    /// Compare the series against the finite-difference oracle.
    Validate(ValidateArgs),
    /// All tables plus the discrepancy ledger.
    Report(ReportArgs),
    /// Print the scenario with defaults filled in (TOML, or JSON with --format json).
    EchoConfig,
}

#[derive(Args, Debug)]
struct NodeArgs {
    /// Time [s].
    #[arg(long, value_name = "S")]
    time: f64,
    /// Scan step for bracketing the gradient sign change [m].
    #[arg(long, default_value_t = 100.0, value_name = "M")]
    grid_step: f64,
}

#[derive(Args, Debug)]
struct PressureArgs {
    /// Position along the ring [m], 0..=L.
    #[arg(long, value_name = "M", allow_negative_numbers = true)]
    x: f64,
    /// Time [s].
    #[arg(long, value_name = "S")]
    time: f64,
}

#[derive(Args, Debug)]
struct GradientArgs {
    /// Comma-separated times [s].
    #[arg(long, value_delimiter = ',', default_value = "100,200", value_name = "S,..")]
    times: Vec<f64>,
    /// Position step [m].
    #[arg(long, default_value_t = 1000.0, value_name = "M")]
    dx: f64,
}

#[derive(Args, Debug)]
struct DrawdownArgs {
    /// Comma-separated total withdrawal levels at the tap [Pa*s/m]; default 1.1..1.4 x base flow.
    #[arg(long, value_delimiter = ',', value_name = "G,..")]
    levels: Option<Vec<f64>>,
    /// Comma-separated times [s].
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0,50,100,150,200,250,300",
        value_name = "S,.."
    )]
    times: Vec<f64>,
    /// Tap position [m]; default the first scenario withdrawal.
    #[arg(long, value_name = "M")]
    x_new: Option<f64>,
}

#[derive(Args, Debug)]
struct MaxDrawArgs {
    /// Minimum admissible inlet pressure [Pa].
    #[arg(long, value_name = "PA")]
    pmin: f64,
    /// Horizon over which the floor must hold [s].
    #[arg(long, value_name = "S")]
    horizon: f64,
    /// Cap on the total withdrawal [Pa*s/m]; default unbounded.
    #[arg(long, value_name = "G")]
    gmax: Option<f64>,
    /// Tap position [m]; default the first scenario withdrawal.
    #[arg(long, value_name = "M")]
    x_new: Option<f64>,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    /// Nominal (reference) pressure [Pa].
    #[arg(long, value_name = "PA")]
    nominal: f64,
    /// Current pressure [Pa].
    #[arg(long, value_name = "PA")]
    current: f64,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Number of grid cells around the ring.
    #[arg(long, default_value_t = 3000, value_name = "N")]
    cells: usize,
    /// Time step [s].
    #[arg(long, default_value_t = 0.05, value_name = "S")]
    dt: f64,
    /// Comma-separated comparison times [s].
    #[arg(long, value_delimiter = ',', default_value = "50,300", value_name = "S,..")]
    times: Vec<f64>,
    /// Largest accepted relative L2 error [-].
    #[arg(long, default_value_t = 0.01, value_name = "FRACTION")]
    tolerance: f64,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Tap position [m]; default the first scenario withdrawal.
    #[arg(long, value_name = "M")]
    x_new: Option<f64>,
}

enum Failure {
    Usage(String),
    Model(Error),
    Io(String),
    Tolerance(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Model(e)
    }
}

impl Failure {
    fn report(&self) -> ExitCode {
        let (kind, message, code) = match self {
            Failure::Usage(m) => ("UsageError", m.clone(), 1),
            Failure::Io(m) => ("IoError", m.clone(), 2),
            Failure::Model(e) => (e.kind(), e.to_string(), if e.is_numerical() { 3 } else { 2 }),
            Failure::Tolerance(m) => ("ToleranceExceeded", m.clone(), 3),
        };
        eprintln!(
            "{}",
            json!({ "error": kind, "message": message, "exit_code": code })
        );
        ExitCode::from(code)
    }
}

fn load(cli: &Cli) -> Result<Scenario, Failure> {
    let path = cli
        .scenario
        .as_ref()
        .ok_or_else(|| Failure::Usage("no scenario given (use --scenario or RINGFLOW_SCENARIO)".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(Scenario::from_toml(&text)?)
}

fn tap(scenario: &Scenario, explicit: Option<f64>) -> Result<f64, Failure> {
    match explicit {
        Some(x) => Ok(x),
        None => Ok(ReportSettings::standard(scenario)?.x_new),
    }
}

fn record(name: &str, scenario: Option<&Scenario>, fields: Vec<(&str, Value)>) -> Table {
    let metadata = scenario.map_or_else(
        || TableMetadata {
            scenario_hash: "none".into(),
            series: SeriesOptions::default(),
        },
        Scenario::metadata,
    );
    let columns: Vec<&str> = fields.iter().map(|f| f.0).collect();
    let mut table = Table::new(name, ScanAxis::Record, &columns, metadata);
    table.push(fields.into_iter().map(|f| f.1).collect());
    table
}

fn run(cli: &Cli) -> Result<Option<Failure>, Failure> {
    let format: Format = cli.format.into();
    let (text, late_failure) = match &cli.command {
        Command::Node(a) => {
            let s = load(cli)?;
            (coupling_table(&s, &[a.time], a.grid_step)?.emit(format), None)
        }
        Command::Pressure(a) => {
            let s = load(cli)?;
            let sample = s.solver()?.sample(a.x, a.time, &s.schedule)?;
            let table = record(
                "pressure",
                Some(&s),
                vec![
                    ("x_m", a.x.into()),
                    ("t_s", a.time.into()),
                    ("pressure_pa", sample.pressure_pa.into()),
                    (
                        "dP_dx_pa_per_m",
                        sample.gradient_pa_per_m.unwrap_or(f64::NAN).into(),
                    ),
                ],
            );
            (table.emit(format), None)
        }
        Command::GradientTable(a) => {
            let s = load(cli)?;
            (gradient_table(&s, &a.times, a.dx)?.emit(format), None)
        }
        Command::Drawdown(a) => {
            let s = load(cli)?;
            let x_new = tap(&s, a.x_new)?;
            let g0 = s.config.base_flow();
            let levels = a
                .levels
                .clone()
                .unwrap_or_else(|| [1.1, 1.2, 1.3, 1.4].iter().map(|f| f * g0).collect());
            (
                drawdown_table(&s, &[0.0, x_new], &a.times, &levels, x_new)?.emit(format),
                None,
            )
        }
        Command::MaxDraw(a) => {
            let s = load(cli)?;
            let x_new = tap(&s, a.x_new)?;
            let solver = s.solver()?;
            let gmax = a.gmax.unwrap_or(f64::INFINITY);
            let adm = max_admissible_withdrawal(&solver, a.horizon, a.pmin, gmax, x_new)?;
            let nominal = s.config.nominal_pressure();
            let class = classify_pressure_drop(nominal, adm.inlet_pressure_pa, &s.thresholds)?;
            let method = match adm.method {
                ringflow::optimizer::AdmissibleMethod::AffineInversion => "affine_inversion",
                ringflow::optimizer::AdmissibleMethod::Bisection => "bisection",
            };
            let table = record(
                "max_draw",
                Some(&s),
                vec![
                    ("x_new_m", x_new.into()),
                    ("horizon_s", a.horizon.into()),
                    ("p_min_pa", a.pmin.into()),
                    ("g_total", adm.g_total.into()),
                    ("g_new", (adm.g_total - s.config.base_flow()).into()),
                    ("method", method.into()),
                    (
                        "binding_time_s",
                        adm.binding_time_s.map_or(Value::from(""), Value::from),
                    ),
                    ("cap_binding", adm.cap_binding.into()),
                    ("inlet_pressure_pa", adm.inlet_pressure_pa.into()),
                    ("drop_fraction", class.drop_fraction.into()),
                    ("band", class.band.as_str().into()),
                ],
            );
            (table.emit(format), None)
        }
        Command::Classify(a) => {
            let s = if cli.scenario.is_some() {
                Some(load(cli)?)
            } else {
                None
            };
            let thresholds = s
                .as_ref()
                .map_or_else(SafetyThresholds::default, |s| s.thresholds);
            let class = classify_pressure_drop(a.nominal, a.current, &thresholds)?;
            let table = record(
                "classification",
                s.as_ref(),
                vec![
                    ("nominal_pa", a.nominal.into()),
                    ("current_pa", a.current.into()),
                    ("drop_fraction", class.drop_fraction.into()),
                    ("band", class.band.as_str().into()),
                ],
            );
            (table.emit(format), None)
        }
        Command::Validate(a) => validate(cli, a, format)?,
        Command::Report(a) => {
            let s = load(cli)?;
            let mut settings = ReportSettings::standard(&s)?;
            if let Some(x) = a.x_new {
                settings.x_new = x;
            }
            (Report::build(&s, &settings)?.emit(format), None)
        }
        Command::EchoConfig => {
            let s = load(cli)?;
            let text = match format {
                Format::Json => {
                    let mut t = serde_json::to_string_pretty(&s.to_file()).expect("scenario serializes");
                    t.push('\n');
                    t
                }
                Format::Csv => s.to_toml(),
            };
            (text, None)
        }
    };
    match &cli.output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?
        }
        None => print!("{text}"),
    }
    Ok(late_failure)
}

fn validate(cli: &Cli, a: &ValidateArgs, format: Format) -> Result<(String, Option<Failure>), Failure> {
    let s = load(cli)?;
    let horizon = a.times.iter().cloned().fold(0.0, f64::max);
    let grid = OracleGrid::new(a.cells, a.dt, horizon)?;
    let mut run = oracle::simulate(&s.config, &s.schedule, grid, &a.times)?;
    let metrics = oracle::compare_with_series(&mut run, &s.config, &s.schedule, &s.options)?;

    let c2 = s.config.sound_speed_m_s().powi(2);
    let total = s.schedule.total();
    let mut table = Table::new(
        "validation",
        ScanAxis::TimeScan,
        &[
            "t_s",
            "relative_l2",
            "max_abs_pa",
            "compared_cells",
            "mean_drop_rel_error",
            "within_tolerance",
        ],
        s.metadata(),
    );
    let mut worst: f64 = 0.0;
    for m in &metrics {
        let mean = run
            .mean_pressure_series
            .iter()
            .find(|(t, _)| (t - m.time_s).abs() <= 0.5 * a.dt)
            .map_or(f64::NAN, |p| p.1);
        let expected = c2 * m.time_s / s.config.length_m() * total;
        let drop = run.nominal_pa - mean;
        let mean_err = if expected == 0.0 {
            drop.abs()
        } else {
            (drop - expected).abs() / expected
        };
        worst = worst.max(m.relative_l2);
        table.push(vec![
            m.time_s.into(),
            m.relative_l2.into(),
            m.max_abs_pa.into(),
            (m.compared_cells as f64).into(),
            mean_err.into(),
            (m.relative_l2 <= a.tolerance).into(),
        ]);
    }
    table.notes.push(format!(
        "cells={} dt_s={} tolerance={}",
        a.cells,
        format_sig6(a.dt),
        format_sig6(a.tolerance)
    ));
    let failure = (worst > a.tolerance).then(|| {
        Failure::Tolerance(format!(
            "relative L2 error {} exceeds tolerance {}",
            format_sig6(worst),
            format_sig6(a.tolerance)
        ))
    });
    Ok((table.emit(format), failure))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let rendered = e.render().to_string();
            let message = rendered
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ")
                .to_string();
            return Failure::Usage(message).report();
        }
    };
    match run(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(f)) | Err(f) => f.report(),
    }
}
