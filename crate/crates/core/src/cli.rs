//! Command-line front end: `validate`, `run` and `sweep`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{
    run, EngineError, GameTraceRecord, RunOptions, SimulationLog, TrajectoryOutput, TrajectoryRecord, TripRecord,
};
use crate::metrics::{aggregate, summarize, tabulate, GroupSummary, MetricsError, ResultTable, SeedLabel, SweepPoint};
use crate::scenario::{parse_scenario, ScenarioConfig};

pub const OUT_ENV: &str = "RAMPMERGE_OUT";

pub const TRIPS_HEADER: &str = "id,class,origin,depart_s,arrival_s,distance_m,fuel_g";
pub const TRAJECTORIES_HEADER: &str = "id,t_s,lane,pos_m,speed_mps,accel_mps2,role,target_id";
pub const GAMES_HEADER: &str = "t_s,ego_id,comp_id,kind,ego_role,ego_cost_lead,ego_cost_follow,comp_cost_lead,comp_cost_follow,risk1,risk_d2e,mobility";
pub const TABLE_HEADER: &str =
    "group,demand_vph,penetration,avg_speed_mps,improvement_pct,fuel_g_per_mile,reduction_pct,seed";
pub const RESULTS_HEADER: &str = "group,vehicles,avg_speed_mps,fuel_g_per_mile";

#[derive(Debug, Parser)]
#[command(name = "rampmerge", version, about = "On-ramp merge simulator for mixed CAV/legacy traffic")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a scenario file and print the resolved configuration.
    Validate { config: PathBuf },
    /// Run one scenario.
    Run(RunArgs),
    /// Run a demand x penetration x seed grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = OUT_ENV, default_value = "out")]
    pub out: PathBuf,
    /// none, full, or N to keep every N-th step.
    #[arg(long, default_value = "none")]
    pub trajectories: TrajectoryArg,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Base scenario; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1400.0, 2400.0, 3400.0])]
    pub demands: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.3, 0.7, 1.0])]
    pub penetrations: Vec<f64>,
    /// Defaults to the base scenario's seed.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    #[arg(long, env = OUT_ENV, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajectoryArg(pub TrajectoryOutput);

impl FromStr for TrajectoryArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Self(TrajectoryOutput::None)),
            "full" => Ok(Self(TrajectoryOutput::Every(1))),
            n => match n.parse::<u64>() {
                Ok(k) if k > 0 => Ok(Self(TrajectoryOutput::Every(k))),
                _ => Err(format!("expected none, full or a positive step count, got {n:?}")),
            },
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Abort(EngineError),
    #[error("{failed} of {total} sweep cells failed")]
    PartialSweep { failed: usize, total: usize },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Metrics(_) => 1,
            CliError::Abort(_) => 2,
            CliError::PartialSweep { .. } => 3,
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Config(c) => CliError::Config(c.to_string()),
            other => CliError::Abort(other),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => CliError::Config(format!("file not found: {}", path.display())),
        _ => CliError::Config(format!("{}: {e}", path.display())),
    })?;
    let config = parse_scenario(&text).map_err(|e| CliError::Config(e.to_string()))?;
    config.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(config)
}

/// Formats a float with 9 significant digits in plain decimal notation,
/// trailing zeros removed.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { x.to_string() };
    }
    let sci = format!("{x:.8e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    let decimals = (8 - exp).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.truncate(s.trim_end_matches('0').trim_end_matches('.').len());
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn opt_float(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub fn trips_csv(trips: &[TripRecord]) -> String {
    let mut s = format!("{TRIPS_HEADER}\n");
    for t in trips {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            t.id,
            t.vehicle_class.as_str(),
            t.origin.as_str(),
            fmt_float(t.depart_time),
            opt_float(t.arrival_time),
            fmt_float(t.distance_traveled),
            fmt_float(t.fuel_grams)
        );
    }
    s
}

pub fn trajectories_csv(rows: &[TrajectoryRecord]) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(TRAJECTORIES_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.id,
            fmt_float(r.time),
            r.lane.as_str(),
            fmt_float(r.position),
            fmt_float(r.speed),
            fmt_float(r.accel),
            r.role.as_str(),
            r.target_id.map(|t| t.to_string()).unwrap_or_default()
        );
    }
    s
}

pub fn games_csv(rows: &[GameTraceRecord]) -> String {
    let mut s = format!("{GAMES_HEADER}\n");
    for g in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_float(g.time),
            g.ego_id,
            g.comp_id,
            g.kind.as_str(),
            g.ego_role.as_str(),
            fmt_float(g.ego_cost_lead),
            fmt_float(g.ego_cost_follow),
            opt_float(g.comp_cost_lead),
            opt_float(g.comp_cost_follow),
            fmt_float(g.risk1),
            fmt_float(g.risk_d2e),
            fmt_float(g.mobility)
        );
    }
    s
}

pub fn results_csv(groups: &[GroupSummary]) -> String {
    let mut s = format!("{RESULTS_HEADER}\n");
    for g in groups {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            g.group.as_str(),
            g.vehicles,
            opt_float(g.avg_speed),
            opt_float(g.fuel_g_per_mile)
        );
    }
    s
}

pub fn table_csv(table: &ResultTable) -> String {
    let mut s = format!("{TABLE_HEADER}\n");
    for r in &table.rows {
        let seed = match r.seed {
            SeedLabel::Seed(n) => n.to_string(),
            SeedLabel::Mean => "mean".into(),
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.group.as_str(),
            fmt_float(r.demand_vph),
            fmt_float(r.penetration),
            opt_float(r.avg_speed),
            opt_float(r.improvement_pct),
            opt_float(r.fuel_g_per_mile),
            opt_float(r.reduction_pct),
            seed
        );
    }
    s
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(io_err(&path))
}

pub fn summary_line(config: &ScenarioConfig, groups: &[GroupSummary]) -> String {
    let mut s = format!(
        "demand={} ({}) penetration={} seed={}",
        fmt_float(config.demand_vph),
        config.congestion_label(),
        fmt_float(config.penetration_rate),
        config.seed
    );
    for g in groups {
        let _ = write!(
            s,
            " | {}: n={} speed={} m/s fuel={} g/mile",
            g.group.as_str(),
            g.vehicles,
            g.avg_speed.map_or("-".into(), |v| format!("{v:.2}")),
            g.fuel_g_per_mile.map_or("-".into(), |v| format!("{v:.2}"))
        );
    }
    s
}

/// Runs one scenario and writes its CSV files into `out`.
pub fn run_to_dir(
    config: &ScenarioConfig,
    options: RunOptions,
    out: &Path,
) -> Result<(SimulationLog, Vec<GroupSummary>), CliError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let log = run(config, options)?;
    let groups = summarize(&log.trips)?;
    write(out, "trips.csv", &trips_csv(&log.trips))?;
    write(out, "results.csv", &results_csv(&groups))?;
    if options.game_trace {
        write(out, "games.csv", &games_csv(&log.games))?;
    }
    if options.trajectories != TrajectoryOutput::None {
        write(out, "trajectories.csv", &trajectories_csv(&log.trajectories))?;
    }
    Ok((log, groups))
}

pub fn cmd_validate(path: &Path) -> Result<String, CliError> {
    Ok(load_config(path)?.to_string())
}

pub fn cmd_run(args: &RunArgs) -> Result<String, CliError> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let options = RunOptions {
        trajectories: args.trajectories.0,
        game_trace: true,
    };
    let (_, groups) = run_to_dir(&config, options, &args.out)?;
    Ok(summary_line(&config, &groups))
}

/// One grid cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub demand_vph: f64,
    pub penetration: f64,
    pub seed: u64,
}

impl SweepCell {
    pub fn dir_name(&self) -> String {
        format!(
            "d{}_p{}_s{}",
            fmt_float(self.demand_vph),
            fmt_float(self.penetration),
            self.seed
        )
    }
}

pub fn sweep_cells(demands: &[f64], penetrations: &[f64], seeds: &[u64]) -> Vec<SweepCell> {
    let mut cells = Vec::with_capacity(demands.len() * penetrations.len() * seeds.len());
    for &seed in seeds {
        for &demand_vph in demands {
            for &penetration in penetrations {
                cells.push(SweepCell {
                    demand_vph,
                    penetration,
                    seed,
                });
            }
        }
    }
    cells
}

/// Outcome of a sweep: the table plus per-cell failures.
#[derive(Debug)]
pub struct SweepReport {
    pub table: ResultTable,
    pub points: Vec<SweepPoint>,
    pub failures: Vec<(SweepCell, CliError)>,
    pub cells: usize,
}

pub fn run_sweep(
    base: &ScenarioConfig,
    cells: &[SweepCell],
    out: &Path,
    jobs: Option<usize>,
) -> Result<SweepReport, CliError> {
    if cells.is_empty() {
        return Err(CliError::Config("empty sweep grid".into()));
    }
    for c in cells {
        let mut cfg = base.clone();
        cfg.demand_vph = c.demand_vph;
        cfg.penetration_rate = c.penetration;
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    }
    fs::create_dir_all(out).map_err(io_err(out))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let results: Vec<Result<SweepPoint, CliError>> = pool.install(|| {
        cells
            .par_iter()
            .map(|c| {
                let mut cfg = base.clone();
                cfg.demand_vph = c.demand_vph;
                cfg.penetration_rate = c.penetration;
                cfg.seed = c.seed;
                let options = RunOptions {
                    trajectories: TrajectoryOutput::None,
                    game_trace: false,
                };
                let dir = out.join(c.dir_name());
                let (_, groups) = run_to_dir(&cfg, options, &dir).inspect_err(|e| {
                    let _ = fs::create_dir_all(&dir);
                    let _ = fs::write(dir.join("error.txt"), format!("{e}\n"));
                })?;
                Ok(SweepPoint {
                    demand_vph: c.demand_vph,
                    penetration: c.penetration,
                    seed: c.seed,
                    groups,
                })
            })
            .collect()
    });
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (c, r) in cells.iter().zip(results) {
        match r {
            Ok(p) => points.push(p),
            Err(e) => failures.push((c.clone(), e)),
        }
    }
    let table = match aggregate(&points) {
        Ok(t) => t,
        Err(MetricsError::MissingBaseline { .. }) => tabulate(&points),
        Err(e) => return Err(e.into()),
    };
    write(out, "table.csv", &table_csv(&table))?;
    Ok(SweepReport {
        table,
        points,
        failures,
        cells: cells.len(),
    })
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<String, CliError> {
    let base = match &args.config {
        Some(p) => load_config(p)?,
        None => ScenarioConfig::default(),
    };
    let seeds = if args.seeds.is_empty() {
        vec![base.seed]
    } else {
        args.seeds.clone()
    };
    let cells = sweep_cells(&args.demands, &args.penetrations, &seeds);
    let report = run_sweep(&base, &cells, &args.out, args.jobs)?;
    for (c, e) in &report.failures {
        eprintln!("cell {} failed: {e}", c.dir_name());
    }
    if !report.failures.is_empty() {
        return Err(CliError::PartialSweep {
            failed: report.failures.len(),
            total: report.cells,
        });
    }
    Ok(format!(
        "{} cells, table written to {}",
        report.cells,
        args.out.join("table.csv").display()
    ))
}

/// Parses `args` and runs the command. Returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Validate { config } => cmd_validate(config),
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(msg) => {
            println!("{msg}");
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
