//! Temporal flight distance, average threshold time separation and capacity.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::format::{round6, sig6};
use crate::kinematics::{path_flight_time, KinematicsError};
use crate::pairwise::{solve_all_pairs_with, PairError, PairKey, PairTable, SolverOptions};
use crate::scenario::{AirspaceScenario, ArrivalPath};

#[derive(Debug, Error)]
pub enum CapacityError {
    #[error("scenario has no path with nonzero proportion")]
    NoActivePaths,
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Pairs(#[from] PairError),
    #[error("pair table has no entry for {0}")]
    MissingCombination(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CapacityError {
    /// True for solver failures, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            CapacityError::Pairs(PairError::Combination { .. }) | CapacityError::Internal(_)
        )
    }
}

/// Class-mix weighted flight time of one path, minutes.
pub fn path_mean_time(path: &ArrivalPath) -> Result<f64, KinematicsError> {
    path.classes.iter().try_fold(0.0, |acc, c| {
        Ok(acc + c.proportion * path_flight_time(path, &c.profile)?)
    })
}

/// Evaluates the extended-path double sum over paths sorted by ascending mean time.
///
/// `sorted` holds `(proportion, mean_time)` pairs in ascending time order.
pub fn extended_path_sum(sorted: &[(f64, f64)]) -> f64 {
    let Some(&(_, t_first)) = sorted.first() else {
        return 0.0;
    };
    let base: f64 = sorted.iter().map(|(rho, _)| rho * t_first).sum();
    let increments: f64 = (1..sorted.len())
        .map(|r| {
            let tail: f64 = sorted[r..].iter().map(|(rho, _)| rho).sum();
            tail * (sorted[r].1 - sorted[r - 1].1)
        })
        .sum();
    base + increments
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathMeanTime {
    pub path: String,
    pub proportion: f64,
    pub mean_time_min: f64,
}

/// Active paths sorted ascending by mean flight time, ties broken by entry label.
pub fn sorted_path_times(scenario: &AirspaceScenario) -> Result<Vec<PathMeanTime>, CapacityError> {
    let mut rows = scenario
        .active_paths()
        .map(|(_, p)| {
            Ok(PathMeanTime {
                path: p.entry.clone(),
                proportion: p.proportion,
                mean_time_min: path_mean_time(p)?,
            })
        })
        .collect::<Result<Vec<_>, CapacityError>>()?;
    if rows.is_empty() {
        return Err(CapacityError::NoActivePaths);
    }
    rows.sort_by(|a, b| {
        a.mean_time_min
            .total_cmp(&b.mean_time_min)
            .then_with(|| a.path.cmp(&b.path))
    });
    Ok(rows)
}

fn d_temp_checked(rows: &[PathMeanTime]) -> Result<f64, CapacityError> {
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.proportion, r.mean_time_min)).collect();
    let literal = extended_path_sum(&pairs);
    let weighted: f64 = pairs.iter().map(|(rho, t)| rho * t).sum();
    if (literal - weighted).abs() > 1e-9 * weighted.abs().max(1.0) {
        return Err(CapacityError::Internal(format!(
            "temporal flight distance mismatch: double sum {literal} vs weighted mean {weighted}"
        )));
    }
    Ok(literal)
}

/// Temporal flight distance D_temp, minutes.
pub fn temporal_flight_distance(scenario: &AirspaceScenario) -> Result<f64, CapacityError> {
    d_temp_checked(&sorted_path_times(scenario)?)
}

/// Probability-weighted mean of ΔT over all combinations, minutes.
pub fn average_time_separation(scenario: &AirspaceScenario, table: &PairTable) -> Result<f64, CapacityError> {
    let mut weighted = 0.0;
    let mut total_weight = 0.0;
    for (k, lead) in scenario.active_paths() {
        for (i, ci) in lead.classes.iter().enumerate() {
            for (l, trail) in scenario.active_paths() {
                for (j, cj) in trail.classes.iter().enumerate() {
                    let w = lead.proportion * trail.proportion * ci.proportion * cj.proportion;
                    if w <= 0.0 {
                        continue;
                    }
                    let key = PairKey {
                        lead_path: k,
                        lead_class: i,
                        trail_path: l,
                        trail_class: j,
                    };
                    let entry = table.get(&key).ok_or_else(|| {
                        CapacityError::MissingCombination(format!(
                            "{}/{} -> {}/{}",
                            ci.class, lead.entry, cj.class, trail.entry
                        ))
                    })?;
                    weighted += w * entry.solution.delta_t;
                    total_weight += w;
                }
            }
        }
    }
    if total_weight <= 0.0 {
        return Err(CapacityError::NoActivePaths);
    }
    Ok(weighted / total_weight)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityReport {
    pub name: String,
    pub runway: String,
    pub d_temp: f64,
    pub t_bar_thr: f64,
    pub lambda: f64,
    /// Ascending by mean time.
    pub per_path_mean_times: Vec<PathMeanTime>,
    pub pair_table: PairTable,
}

pub fn capacity(scenario: &AirspaceScenario) -> Result<CapacityReport, CapacityError> {
    capacity_with(scenario, &SolverOptions::default())
}

pub fn capacity_with(scenario: &AirspaceScenario, opts: &SolverOptions) -> Result<CapacityReport, CapacityError> {
    let per_path_mean_times = sorted_path_times(scenario)?;
    let d_temp = d_temp_checked(&per_path_mean_times)?;
    let pair_table = solve_all_pairs_with(scenario, opts)?;
    let t_bar_thr = average_time_separation(scenario, &pair_table)?;
    Ok(CapacityReport {
        name: scenario.name.clone(),
        runway: scenario.runway.clone(),
        d_temp,
        t_bar_thr,
        lambda: d_temp / t_bar_thr,
        per_path_mean_times,
        pair_table,
    })
}

/// Capacity as reported in summary tables: one decimal place.
pub fn lambda_display(lambda: f64) -> String {
    format!("{lambda:.1}")
}

#[derive(Serialize)]
struct ReportJson<'a> {
    name: &'a str,
    runway: &'a str,
    d_temp_min: f64,
    t_bar_thr_min: f64,
    lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_floor: Option<u64>,
    per_path_mean_times: Vec<PathMeanTime>,
}

impl CapacityReport {
    pub fn lambda_floor(&self) -> u64 {
        self.lambda.floor() as u64
    }

    pub fn to_json(&self, floor: bool) -> String {
        let doc = ReportJson {
            name: &self.name,
            runway: &self.runway,
            d_temp_min: round6(self.d_temp),
            t_bar_thr_min: round6(self.t_bar_thr),
            lambda: round6(self.lambda),
            lambda_floor: floor.then(|| self.lambda_floor()),
            per_path_mean_times: self
                .per_path_mean_times
                .iter()
                .map(|p| PathMeanTime {
                    path: p.path.clone(),
                    proportion: round6(p.proportion),
                    mean_time_min: round6(p.mean_time_min),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("report serializes")
    }

    pub fn write_csv<W: Write>(&self, out: W, floor: bool) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["runway", "d_temp_min", "t_bar_thr_min", "lambda"];
        let mut row = vec![
            self.runway.clone(),
            sig6(self.d_temp),
            sig6(self.t_bar_thr),
            sig6(self.lambda),
        ];
        if floor {
            header.push("lambda_floor");
            row.push(self.lambda_floor().to_string());
        }
        w.write_record(&header)?;
        w.write_record(&row)?;
        w.flush()?;
        Ok(())
    }

    /// Human-readable summary: minutes to two decimals, capacity to one.
    pub fn to_table(&self, floor: bool) -> String {
        let mut s = format!(
            "{:<8} {:>10} {:>12} {:>8}\n{:<8} {:>10.2} {:>12.2} {:>8}\n",
            "RWY",
            "D_temp",
            "T_thr",
            "lambda",
            self.runway,
            self.d_temp,
            self.t_bar_thr,
            lambda_display(self.lambda)
        );
        if floor {
            s.push_str(&format!("floor(lambda) = {}\n", self.lambda_floor()));
        }
        s
    }
}
