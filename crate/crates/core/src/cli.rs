//! Command-line surface.
//!
//! Exit codes: 0 success, 1 validation failure, 2 input error, 3 solver failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::capacity::{capacity_with, CapacityError};
use crate::format::sig6;
use crate::occupancy_sim::{simulate_with_trace, write_trace_csv, SimConfig, SimError};
use crate::pairwise::{solve_all_pairs_with, PairError, SolverOptions};
use crate::scenario::{load_scenario_file, validate, AirspaceScenario, ScenarioError, Violation};
use crate::sensitivity::{percent_grid, run_sweep_with, scale_speeds, write_sweep_csv, Regime, SensitivityError, SweepSpec};
use crate::trajectory_stats::{build_tables, group_flights, read_points, ExtractError, GateSet, DEFAULT_CAPTURE_RADIUS_NM};

#[derive(Debug, Parser)]
#[command(name = "tma-cap", version, about = "Terminal airspace arrival capacity from arrival path structure")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Write output here instead of stdout (a directory for `extract`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Override the in-TMA separation S, NM.
    #[arg(long = "s", global = true)]
    pub s_tma: Option<f64>,
    /// Override the threshold separation S_thr, NM.
    #[arg(long = "sthr", global = true)]
    pub s_thr: Option<f64>,
    /// Scale entry and MP_iap speeds by 1 + this fraction before evaluating.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub speed_scale: Option<f64>,
    /// Bisection tolerance on t0, minutes.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scenario file and list violations.
    Validate { scenario: PathBuf },
    /// Temporal flight distance, average time separation and capacity.
    Capacity {
        scenario: PathBuf,
        /// Also report floor(lambda).
        #[arg(long)]
        floor: bool,
    },
    /// Minimal spacing for every leading/trailing combination.
    Pairs { scenario: PathBuf },
    /// Speed-scale by separation-regime sweep.
    Sweep {
        scenario: PathBuf,
        /// Comma-separated S:S_thr pairs in NM.
        #[arg(long, default_value = "5:8,5:5,3:5,3:3")]
        regimes: String,
        /// Largest speed change in whole percent (grid spans -range..=+range).
        #[arg(long, default_value_t = 10)]
        range_pct: u32,
        /// Grid step in whole percent.
        #[arg(long, default_value_t = 1)]
        step_pct: u32,
        /// Scale threshold speeds too.
        #[arg(long)]
        scale_thr: bool,
    },
    /// Saturated-stream occupancy simulation.
    Simulate {
        scenario: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        warmup: f64,
        /// Per-aircraft event trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Gate statistics from pre-cleaned trajectory points.
    Extract {
        points: PathBuf,
        gates: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CAPTURE_RADIUS_NM)]
        radius: f64,
        #[arg(long, default_value = "extracted")]
        name: String,
        #[arg(long, default_value = "")]
        runway: String,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{} violation(s)", .0.len())]
    Validation(Vec<Violation>),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Invalid(v) => CliError::Validation(v),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<CapacityError> for CliError {
    fn from(e: CapacityError) -> Self {
        if e.is_solver_failure() {
            CliError::Solver(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<PairError> for CliError {
    fn from(e: PairError) -> Self {
        match e {
            PairError::Combination { .. } => CliError::Solver(e.to_string()),
            PairError::MissingGeometry(..) => CliError::Input(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ExtractError> for CliError {
    fn from(e: ExtractError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SensitivityError> for CliError {
    fn from(e: SensitivityError) -> Self {
        match e {
            SensitivityError::NonMonotone { violations, .. } => CliError::Validation(violations),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("write failed: {e}"))
}

impl CommonArgs {
    fn solver_options(&self) -> Result<SolverOptions, CliError> {
        let mut o = SolverOptions::default();
        if let Some(t) = self.tolerance {
            if !(t > 0.0) {
                return Err(CliError::Input("--tolerance must be > 0".into()));
            }
            o.tolerance = t;
        }
        Ok(o)
    }

    /// Load the scenario and apply separation and speed overrides.
    fn scenario(&self, path: &Path) -> Result<AirspaceScenario, CliError> {
        let mut s = load_scenario_file(path)?;
        if self.s_tma.is_some() || self.s_thr.is_some() {
            if let Some(x) = self.s_tma {
                s.separation.s_tma = x;
            }
            if let Some(x) = self.s_thr {
                s.separation.s_thr = x;
            }
            let v = validate(&s);
            if !v.is_empty() {
                return Err(CliError::Validation(v));
            }
        }
        if let Some(f) = self.speed_scale {
            s = scale_speeds(&s, f, false)?;
        }
        Ok(s)
    }
}

pub fn parse_regimes(text: &str) -> Result<Vec<Regime>, CliError> {
    text.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|pair| {
            let (a, b) = pair
                .split_once(':')
                .ok_or_else(|| CliError::Input(format!("regime '{pair}' is not S:S_thr")))?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Input(format!("regime '{pair}' has a non-numeric value")))
            };
            Ok(Regime::new(parse(a)?, parse(b)?))
        })
        .collect()
}

/// Run one invocation, writing the primary artifact to `--out` or `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let common = &cli.common;
    let mut buf: Vec<u8> = Vec::new();
    match &cli.command {
        Command::Validate { scenario } => {
            let violations = match load_scenario_file(scenario) {
                Ok(s) => validate(&s),
                Err(ScenarioError::Invalid(v)) => v,
                Err(e) => return Err(CliError::Input(e.to_string())),
            };
            write_violations(&mut buf, &violations, common.format.unwrap_or(Format::Table)).map_err(io_err)?;
            emit(common, &buf, stdout)?;
            if !violations.is_empty() {
                return Err(CliError::Validation(violations));
            }
            return Ok(());
        }
        Command::Capacity { scenario, floor } => {
            let s = common.scenario(scenario)?;
            let report = capacity_with(&s, &common.solver_options()?)?;
            match common.format.unwrap_or(Format::Table) {
                Format::Table => buf.extend_from_slice(report.to_table(*floor).as_bytes()),
                Format::Csv => report.write_csv(&mut buf, *floor).map_err(io_err)?,
                Format::Json => {
                    buf.extend_from_slice(report.to_json(*floor).as_bytes());
                    buf.push(b'\n');
                }
            }
        }
        Command::Pairs { scenario } => {
            let s = common.scenario(scenario)?;
            let table = solve_all_pairs_with(&s, &common.solver_options()?)?;
            match common.format.unwrap_or(Format::Csv) {
                Format::Csv => table.write_csv(&mut buf).map_err(io_err)?,
                Format::Json => {
                    let rows: Vec<_> = table
                        .iter()
                        .map(|(_, e)| {
                            serde_json::json!({
                                "lead_path": e.lead_path,
                                "lead_class": e.lead_class,
                                "trail_path": e.trail_path,
                                "trail_class": e.trail_class,
                                "probability": crate::format::round6(e.probability),
                                "t0_min": crate::format::round6(e.solution.t0_star),
                                "delta_t_min": crate::format::round6(e.solution.delta_t),
                                "binding": e.solution.binding.to_string(),
                            })
                        })
                        .collect();
                    buf.extend_from_slice(serde_json::to_string_pretty(&rows).expect("json").as_bytes());
                    buf.push(b'\n');
                }
                Format::Table => {
                    writeln!(buf, "{:<16} {:<16} {:>10} {:>8} {:>8}  binding", "lead", "trail", "prob", "t0", "dT")
                        .map_err(io_err)?;
                    for (_, e) in table.iter() {
                        writeln!(
                            buf,
                            "{:<16} {:<16} {:>10.5} {:>8.2} {:>8.2}  {}",
                            format!("{}/{}", e.lead_class, e.lead_path),
                            format!("{}/{}", e.trail_class, e.trail_path),
                            e.probability,
                            e.solution.t0_star,
                            e.solution.delta_t,
                            e.solution.binding
                        )
                        .map_err(io_err)?;
                    }
                }
            }
        }
        Command::Sweep {
            scenario,
            regimes,
            range_pct,
            step_pct,
            scale_thr,
        } => {
            let s = common.scenario(scenario)?;
            if *step_pct == 0 {
                return Err(CliError::Input("--step-pct must be > 0".into()));
            }
            let range = *range_pct as i32;
            let speed_scales = percent_grid(-range, range)
                .into_iter()
                .enumerate()
                .filter(|(k, _)| *k as u32 % step_pct == 0)
                .map(|(_, f)| f)
                .collect();
            let spec = SweepSpec {
                speed_scales,
                regimes: parse_regimes(regimes)?,
                scale_thr_speeds: *scale_thr,
            };
            let rows = run_sweep_with(&s, &spec, &common.solver_options()?)?;
            match common.format.unwrap_or(Format::Csv) {
                Format::Json => {
                    let out: Vec<_> = rows
                        .iter()
                        .map(|r| {
                            serde_json::json!({
                                "regime_s_nm": r.regime.s_tma,
                                "regime_sthr_nm": r.regime.s_thr,
                                "speed_scale": r.speed_scale,
                                "d_temp_min": r.d_temp.map(crate::format::round6),
                                "t_bar_thr_min": r.t_bar_thr.map(crate::format::round6),
                                "lambda": r.lambda.map(crate::format::round6),
                                "status": r.status.label(),
                            })
                        })
                        .collect();
                    buf.extend_from_slice(serde_json::to_string_pretty(&out).expect("json").as_bytes());
                    buf.push(b'\n');
                }
                Format::Csv => write_sweep_csv(&rows, &mut buf).map_err(io_err)?,
                Format::Table => {
                    writeln!(buf, "{:>5} {:>5} {:>7} {:>8} {:>7} {:>7}  status", "S", "S_thr", "scale", "D_temp", "T_thr", "lambda")
                        .map_err(io_err)?;
                    for r in &rows {
                        let f2 = |x: Option<f64>| x.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
                        writeln!(
                            buf,
                            "{:>5} {:>5} {:>+7.2} {:>8} {:>7} {:>7}  {}",
                            r.regime.s_tma,
                            r.regime.s_thr,
                            r.speed_scale,
                            f2(r.d_temp),
                            f2(r.t_bar_thr),
                            r.lambda.map(|v| format!("{v:.1}")).unwrap_or_else(|| "-".into()),
                            r.status.label()
                        )
                        .map_err(io_err)?;
                    }
                }
            }
        }
        Command::Simulate {
            scenario,
            seed,
            n,
            warmup,
            trace,
        } => {
            let s = common.scenario(scenario)?;
            let report = capacity_with(&s, &common.solver_options()?)?;
            let cfg = SimConfig {
                n_aircraft: *n,
                rng_seed: *seed,
                warmup_fraction: *warmup,
            };
            let (result, events) = simulate_with_trace(&s, &report.pair_table, &cfg)?;
            if let Some(path) = trace {
                let f = fs::File::create(path).map_err(io_err)?;
                write_trace_csv(&events, f).map_err(io_err)?;
            }
            match common.format.unwrap_or(Format::Table) {
                Format::Json => {
                    buf.extend_from_slice(result.to_json().as_bytes());
                    buf.push(b'\n');
                }
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(&mut buf);
                    w.write_record(["seed", "n_aircraft", "time_avg_occupancy", "mean_occupancy", "max_occupancy", "realized_mean_thr_spacing_min", "lambda"])
                        .map_err(io_err)?;
                    w.write_record([
                        result.rng_seed.to_string(),
                        result.n_aircraft.to_string(),
                        sig6(result.time_avg_occupancy),
                        sig6(result.mean_occupancy),
                        result.max_occupancy.to_string(),
                        sig6(result.realized_mean_thr_spacing),
                        sig6(report.lambda),
                    ])
                    .map_err(io_err)?;
                    w.flush().map_err(io_err)?;
                }
                Format::Table => {
                    writeln!(
                        buf,
                        "seed {}  n {}\ntime-avg occupancy {:.3}  (analytic lambda {:.3}, diff {:+.2}%)\nmean occupancy at landing {:.3}  max occupancy {}\nrealized mean threshold spacing {:.3} min",
                        result.rng_seed,
                        result.n_aircraft,
                        result.time_avg_occupancy,
                        report.lambda,
                        100.0 * (result.time_avg_occupancy - report.lambda) / report.lambda,
                        result.mean_occupancy,
                        result.max_occupancy,
                        result.realized_mean_thr_spacing
                    )
                    .map_err(io_err)?;
                }
            }
        }
        Command::Extract {
            points,
            gates,
            radius,
            name,
            runway,
        } => {
            let pf = fs::File::open(points).map_err(|e| CliError::Input(format!("{}: {e}", points.display())))?;
            let gate_text = fs::read_to_string(gates).map_err(|e| CliError::Input(format!("{}: {e}", gates.display())))?;
            let gate_set = GateSet::from_json(&gate_text, *radius)?;
            let flights = group_flights(read_points(pf)?);
            let tables = build_tables(&flights, &gate_set)?;
            let skeleton = serde_json::to_string_pretty(&tables.scenario_skeleton(name, runway)).expect("json") + "\n";
            if let Some(dir) = &common.out {
                fs::create_dir_all(dir).map_err(io_err)?;
                let file = |n: &str| fs::File::create(dir.join(n)).map_err(io_err);
                tables.write_proportions_csv(file("proportions.csv")?).map_err(io_err)?;
                tables.write_class_mix_csv(file("class_mix.csv")?).map_err(io_err)?;
                tables.write_speeds_csv(file("speeds.csv")?).map_err(io_err)?;
                fs::write(dir.join("scenario_skeleton.json"), skeleton).map_err(io_err)?;
                log::info!("{} unmatched flight(s) dropped", tables.unmatched);
                return Ok(());
            }
            writeln!(buf, "# proportions").map_err(io_err)?;
            tables.write_proportions_csv(&mut buf).map_err(io_err)?;
            writeln!(buf, "# class_mix").map_err(io_err)?;
            tables.write_class_mix_csv(&mut buf).map_err(io_err)?;
            writeln!(buf, "# speeds").map_err(io_err)?;
            tables.write_speeds_csv(&mut buf).map_err(io_err)?;
            writeln!(buf, "# scenario_skeleton").map_err(io_err)?;
            buf.extend_from_slice(skeleton.as_bytes());
        }
    }
    emit(common, &buf, stdout)
}

fn write_violations(buf: &mut Vec<u8>, violations: &[Violation], format: Format) -> io::Result<()> {
    match format {
        Format::Table => {
            if violations.is_empty() {
                writeln!(buf, "ok")?;
            }
            for v in violations {
                writeln!(buf, "{v}")?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(buf);
            w.write_record(["entity", "message"])?;
            for v in violations {
                w.write_record([&v.entity, &v.message])?;
            }
            w.flush()?;
        }
        Format::Json => {
            let list: Vec<_> = violations
                .iter()
                .map(|v| serde_json::json!({"entity": v.entity, "message": v.message}))
                .collect();
            let doc = serde_json::json!({ "violations": list });
            writeln!(buf, "{}", serde_json::to_string_pretty(&doc).expect("json"))?;
        }
    }
    Ok(())
}

fn emit(common: &CommonArgs, buf: &[u8], stdout: &mut dyn Write) -> Result<(), CliError> {
    match &common.out {
        Some(path) => fs::write(path, buf).map_err(io_err),
        None => stdout.write_all(buf).map_err(io_err),
    }
}
