//! Batch front-end: load a scenario config and its CSV inputs, run
//! simulate / fit / compare, emit CSV artifacts.
//!
//! Exit codes: 0 success (including boundary-minimum warnings), 1 bad input
//! or I/O, 2 numerical failure.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use roadno_core::fit::{fit_gamma, fit_kappa, scan_objective as scan_fit, SearchInterval};
use roadno_core::{
    average_seasonal_window, build_measurement_curve, build_solar_factor, build_traffic_density,
    read_measurements_csv, read_solar_csv, read_traffic_csv, run_day, run_day_observed,
    DailySignal, DiscrepancyReport, ModelParam, ScanScale, ScenarioConfig, ScenarioTag,
    SimulationResult,
};

use output::{fmt_float, write_lines};

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "ROADNO_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "roadno",
    version,
    about = "Roadside NO simulation and parameter identification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one averaged day and write probe.csv / mass.csv
    Simulate(SimulateArgs),
    /// Identify the reaction rate or the asphalt reactivity from measurements
    Fit(FitArgs),
    /// Run the pre/post scenarios side by side and write comparison tables
    Compare(CompareArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Output directory (default: $ROADNO_OUT_DIR, then the working directory)
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Override the number of time steps per day
    #[arg(long)]
    steps: Option<usize>,
    /// Override the time-scheme parameter (1 = implicit Euler, 0.5 = trapezoid)
    #[arg(long)]
    theta: Option<f64>,
    /// Override the mesh resolution
    #[arg(long, num_args = 2, value_names = ["NX", "NY"])]
    mesh: Option<Vec<usize>>,
    /// Run one unrecorded day first and start from its final state
    #[arg(long)]
    warm_start: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario configuration file
    #[arg(long)]
    config: PathBuf,
    /// Also write field snapshots every steps/N levels, endpoints included
    /// (field_####.csv)
    #[arg(long, default_value_t = 0)]
    snapshots: usize,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Stage {
    Kappa,
    Gamma,
}

#[derive(Args)]
struct FitArgs {
    /// Scenario configuration file
    #[arg(long)]
    config: PathBuf,
    /// Which parameter to identify
    #[arg(long, value_enum)]
    stage: Stage,
    /// Measurement CSV (default: the config's measurements path)
    #[arg(long)]
    measurements: Option<PathBuf>,
    /// Search interval as lo:hi (defaults: 1e2:1e6 for kappa, 0:0.1 for gamma)
    #[arg(long)]
    interval: Option<String>,
    /// Scan spacing (default: log for kappa, linear for gamma)
    #[arg(long, value_enum)]
    scale: Option<CliScale>,
    /// Fixed kappa for the gamma stage (default: read fit_summary.csv)
    #[arg(long)]
    kappa: Option<f64>,
    /// Write the scan curve only, skip the refinement
    #[arg(long)]
    scan_only: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum CliScale {
    Linear,
    Log,
}

#[derive(Args)]
struct CompareArgs {
    /// Pre-installation scenario config
    #[arg(long)]
    config_pre: PathBuf,
    /// Post-installation scenario config
    #[arg(long)]
    config_post: PathBuf,
    /// Reaction rate applied to both scenarios
    #[arg(long)]
    kappa: Option<f64>,
    /// Asphalt reactivity applied to the post scenario
    #[arg(long)]
    gamma: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

enum CliError {
    Input(String),
    Numeric(String),
}

impl From<roadno_core::Error> for CliError {
    fn from(e: roadno_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: input: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("error: numeric: {msg}");
            ExitCode::from(2)
        }
    }
}

fn out_dir(common: &CommonArgs) -> Result<PathBuf, CliError> {
    let dir = common
        .out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Load a config and apply the command-line overrides, then rescale.
fn load_config(path: &Path, common: &CommonArgs) -> Result<ScenarioConfig, CliError> {
    let mut cfg = ScenarioConfig::load(path).map_err(input_err)?;
    if let Some(steps) = common.steps {
        cfg.numerics.steps_per_day = steps;
    }
    if let Some(theta) = common.theta {
        cfg.numerics.theta = theta;
    }
    if let Some(mesh) = &common.mesh {
        cfg.numerics.nx = mesh[0];
        cfg.numerics.ny = mesh[1];
    }
    if common.warm_start {
        cfg.numerics.warm_start = true;
    }
    cfg.validate().map_err(input_err)?;
    cfg.nondimensionalize().map_err(input_err)
}

/// The traffic and solar forcing signals named by a config.
fn load_signals(cfg: &ScenarioConfig) -> Result<(DailySignal, DailySignal), CliError> {
    let traffic_path = cfg
        .paths
        .traffic
        .as_ref()
        .ok_or_else(|| CliError::Input("config names no traffic CSV".into()))?;
    let solar_path = cfg
        .paths
        .solar
        .as_ref()
        .ok_or_else(|| CliError::Input("config names no solar CSV".into()))?;
    let ts = read_traffic_csv(traffic_path).map_err(input_err)?;
    let m = build_traffic_density(&ts).map_err(input_err)?;
    let events = read_solar_csv(solar_path).map_err(input_err)?;
    let s = build_solar_factor(events).map_err(input_err)?;
    Ok((m, s))
}

/// Measurement curve: per-day series averaged over the config's window.
fn load_measurements(
    cfg: &ScenarioConfig,
    explicit: Option<&PathBuf>,
) -> Result<DailySignal, CliError> {
    let path = explicit
        .or(cfg.paths.measurements.as_ref())
        .ok_or_else(|| CliError::Input("no measurement CSV given (flag or config)".into()))?;
    let days = read_measurements_csv(path).map_err(input_err)?;
    if days.is_empty() {
        return Err(CliError::Input(format!(
            "{} holds no measurements",
            path.display()
        )));
    }
    let window = (
        cfg.paths
            .window_start
            .or_else(|| days.iter().filter_map(|d| d.date).min())
            .unwrap(),
        cfg.paths
            .window_end
            .or_else(|| days.iter().filter_map(|d| d.date).max())
            .unwrap(),
    );
    let averaged = average_seasonal_window(&days, window).map_err(input_err)?;
    build_measurement_curve(&averaged.series).map_err(input_err)
}

fn run_scenario(
    cfg: &ScenarioConfig,
    snapshots: usize,
    dir: &Path,
) -> Result<SimulationResult, CliError> {
    let (m, s) = load_signals(cfg)?;
    if snapshots == 0 {
        return run_day(cfg, &m, &s).map_err(|e| roadno_core::Error::from(e).into());
    }
    let steps = cfg.numerics.steps_per_day;
    let every = (steps / snapshots).max(1);
    let mesh = roadno_core::fem::build_mesh(&cfg.geometry, cfg.numerics.nx, cfg.numerics.ny)
        .map_err(roadno_core::Error::from)?;
    let mut level = 0usize;
    let mut written = Vec::new();
    let result = run_day_observed(cfg, &m, &s, |field| {
        if level.is_multiple_of(every) || level == steps {
            written.push((level, field.clone()));
        }
        level += 1;
    })
    .map_err(roadno_core::Error::from)?;
    for (level, field) in &written {
        let path = dir.join(format!("field_{level:04}.csv"));
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        roadno_core::fem::write_field_csv(&mesh, field, &mut file)?;
    }
    Ok(result)
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let dir = out_dir(&args.common)?;
    let cfg = load_config(&args.config, &args.common)?;
    let result = run_scenario(&cfg, args.snapshots, &dir)?;

    write_lines(
        &dir.join("probe.csv"),
        "t,no_ugm3",
        result
            .probe_series
            .iter()
            .map(|&(t, v)| format!("{},{}", fmt_float(t), fmt_float(v))),
    )?;
    write_lines(
        &dir.join("mass.csv"),
        "t,mass",
        result
            .mass_history
            .iter()
            .map(|&(t, v)| format!("{},{}", fmt_float(t), fmt_float(v))),
    )?;

    let (peak_t, peak_v) = result.peak();
    let mass_change = result.mass_history.last().unwrap().1 - result.mass_history[0].1;
    println!("peak_no_ugm3 = {peak_v:.6}");
    println!("peak_time = {peak_t:.6}");
    println!("mass_change = {mass_change:.6e}");
    Ok(())
}

fn parse_interval(raw: &str, scale: ScanScale) -> Result<SearchInterval, CliError> {
    let (lo, hi) = raw
        .split_once(':')
        .ok_or_else(|| CliError::Input(format!("interval `{raw}` is not lo:hi")))?;
    let lo: f64 = lo
        .parse()
        .map_err(|_| CliError::Input(format!("bad interval bound `{lo}`")))?;
    let hi: f64 = hi
        .parse()
        .map_err(|_| CliError::Input(format!("bad interval bound `{hi}`")))?;
    SearchInterval::new(lo, hi, scale).map_err(input_err)
}

/// Pick up a previously fitted kappa from fit_summary.csv in the output dir.
fn kappa_from_artifact(dir: &Path) -> Option<f64> {
    let text = std::fs::read_to_string(dir.join("fit_summary.csv")).ok()?;
    for line in text.lines().skip(1) {
        let mut fields = line.split(',');
        if fields.next() == Some("kappa") {
            return fields.next()?.parse().ok();
        }
    }
    None
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    let dir = out_dir(&args.common)?;
    let mut cfg = load_config(&args.config, &args.common)?;
    let (m, s) = load_signals(&cfg)?;
    let meas = load_measurements(&cfg, args.measurements.as_ref())?;

    let scale = match (args.scale, args.stage) {
        (Some(CliScale::Linear), _) => ScanScale::Linear,
        (Some(CliScale::Log), _) => ScanScale::Log,
        (None, Stage::Kappa) => ScanScale::Log,
        (None, Stage::Gamma) => ScanScale::Linear,
    };
    let interval = match (&args.interval, args.stage) {
        (Some(raw), _) => parse_interval(raw, scale)?,
        (None, Stage::Kappa) => SearchInterval::default_kappa(),
        (None, Stage::Gamma) => SearchInterval::default_gamma(),
    };

    let (stage_name, fit) = match args.stage {
        Stage::Kappa => {
            if args.scan_only {
                let scan = scan_fit(
                    &cfg,
                    &m,
                    &s,
                    &meas,
                    ModelParam::Kappa,
                    &interval.grid(roadno_core::fit::DEFAULT_SCAN_POINTS),
                )
                .map_err(roadno_core::Error::from)?;
                return finish_scan_only(&dir, "kappa", &scan);
            }
            let fit =
                fit_kappa(&cfg, &m, &s, &meas, &interval).map_err(roadno_core::Error::from)?;
            ("kappa", fit)
        }
        Stage::Gamma => {
            let kappa = args
                .kappa
                .or_else(|| kappa_from_artifact(&dir))
                .ok_or_else(|| {
                    CliError::Input(
                        "gamma stage needs --kappa or a prior kappa fit_summary.csv".into(),
                    )
                })?;
            cfg.scenario_tag = ScenarioTag::PostAsphalt;
            if args.scan_only {
                cfg.physical.kappa = kappa;
                let scan = scan_fit(
                    &cfg,
                    &m,
                    &s,
                    &meas,
                    ModelParam::Gamma,
                    &interval.grid(roadno_core::fit::DEFAULT_SCAN_POINTS),
                )
                .map_err(roadno_core::Error::from)?;
                return finish_scan_only(&dir, "gamma", &scan);
            }
            let fit = fit_gamma(&cfg, &m, &s, &meas, kappa, &interval)
                .map_err(roadno_core::Error::from)?;
            ("gamma", fit)
        }
    };

    write_lines(
        &dir.join("scan.csv"),
        "value,discrepancy",
        fit.scan_points
            .iter()
            .map(|&(v, d)| format!("{},{}", fmt_float(v), fmt_float(d))),
    )?;
    write_lines(
        &dir.join("fit_summary.csv"),
        "stage,best_value,best_discrepancy,refinement_iterations,converged,boundary_minimum",
        std::iter::once(format!(
            "{},{},{},{},{},{}",
            stage_name,
            fmt_float(fit.best_value),
            fmt_float(fit.best_discrepancy),
            fit.refinement_iterations,
            fit.converged,
            fit.boundary_minimum
        )),
    )?;
    println!("best_{stage_name} = {:.6e}", fit.best_value);
    println!("best_discrepancy = {:.6e}", fit.best_discrepancy);
    if fit.boundary_minimum {
        println!("WARN: scan minimum sits on the interval boundary; not refined");
    }
    Ok(())
}

fn finish_scan_only(dir: &Path, stage: &str, scan: &[(f64, f64)]) -> Result<(), CliError> {
    write_lines(
        &dir.join("scan.csv"),
        "value,discrepancy",
        scan.iter()
            .map(|&(v, d)| format!("{},{}", fmt_float(v), fmt_float(d))),
    )?;
    let best = scan.iter().fold((f64::NAN, f64::INFINITY), |acc, &(v, d)| {
        if d < acc.1 {
            (v, d)
        } else {
            acc
        }
    });
    println!("scan_minimum_{stage} = {:.6e}", best.0);
    println!("scan_discrepancy = {:.6e}", best.1);
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let dir = out_dir(&args.common)?;
    let mut cfg_pre = load_config(&args.config_pre, &args.common)?;
    let mut cfg_post = load_config(&args.config_post, &args.common)?;
    if let Some(kappa) = args.kappa {
        cfg_pre.physical.kappa = kappa;
        cfg_post.physical.kappa = kappa;
    }
    if let Some(gamma) = args.gamma {
        if cfg_post.scenario_tag == ScenarioTag::PreAsphalt {
            return Err(CliError::Input(
                "--gamma applies to the post scenario, but config_post is tagged pre_asphalt"
                    .into(),
            ));
        }
        cfg_post.physical.gamma = gamma;
    }
    if cfg_pre.numerics.steps_per_day != cfg_post.numerics.steps_per_day {
        return Err(CliError::Input(
            "pre and post scenarios must share steps_per_day for a joined table".into(),
        ));
    }

    let meas_pre = load_measurements(&cfg_pre, None)?;
    let meas_post = load_measurements(&cfg_post, None)?;
    let (m_pre, s_pre) = load_signals(&cfg_pre)?;
    let (m_post, s_post) = load_signals(&cfg_post)?;
    let sim_pre = run_day(&cfg_pre, &m_pre, &s_pre).map_err(roadno_core::Error::from)?;
    let sim_post = run_day(&cfg_post, &m_post, &s_post).map_err(roadno_core::Error::from)?;

    write_lines(
        &dir.join("compare.csv"),
        "t,sim_pre,sim_post,meas_pre,meas_post",
        sim_pre
            .probe_series
            .iter()
            .zip(&sim_post.probe_series)
            .map(|(&(t, pre), &(_, post))| {
                format!(
                    "{},{},{},{},{}",
                    fmt_float(t),
                    fmt_float(pre),
                    fmt_float(post),
                    fmt_float(meas_pre.eval(t)),
                    fmt_float(meas_post.eval(t))
                )
            }),
    )?;

    let report_pre = DiscrepancyReport::new(
        cfg_pre.physical.kappa,
        cfg_pre.physical.gamma,
        &sim_pre.probe_series,
        &meas_pre,
    )
    .map_err(roadno_core::Error::from)?;
    let report_post = DiscrepancyReport::new(
        cfg_post.physical.kappa,
        cfg_post.physical.gamma,
        &sim_post.probe_series,
        &meas_post,
    )
    .map_err(roadno_core::Error::from)?;
    write_lines(
        &dir.join("metrics.csv"),
        &format!("scenario,{}", DiscrepancyReport::CSV_HEADER),
        [
            format!("pre,{}", report_pre.csv_row()),
            format!("post,{}", report_post.csv_row()),
        ]
        .into_iter(),
    )?;

    println!("relative_l2_pre = {:.6e}", report_pre.relative_l2);
    println!("relative_l2_post = {:.6e}", report_post.relative_l2);
    println!("mass_error_pre = {:.6e}", report_pre.mass_error);
    println!("mass_error_post = {:.6e}", report_post.mass_error);
    Ok(())
}
