//! Speed-scale and separation-regime sweeps.

use std::io::Write;

use log::debug;
use thiserror::Error;

use crate::capacity::{capacity_with, CapacityError};
use crate::format::sig6;
use crate::pairwise::SolverOptions;
use crate::scenario::{validate, AirspaceScenario, SeparationPolicy, Violation};

#[derive(Debug, Error)]
pub enum SensitivityError {
    #[error("speed scale {fraction:+} breaks a speed profile: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    NonMonotone {
        fraction: f64,
        violations: Vec<Violation>,
    },
    #[error("sweep has an empty speed grid or regime list")]
    EmptySweep,
    #[error("invalid separation regime S={s} NM, S_thr={s_thr} NM")]
    InvalidRegime { s: f64, s_thr: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    pub s_tma: f64,
    pub s_thr: f64,
}

impl Regime {
    pub fn new(s_tma: f64, s_thr: f64) -> Self {
        Self { s_tma, s_thr }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub speed_scales: Vec<f64>,
    pub regimes: Vec<Regime>,
    /// Also scale the threshold gate speed (held fixed by default).
    pub scale_thr_speeds: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            speed_scales: percent_grid(-10, 10),
            regimes: vec![
                Regime::new(5.0, 8.0),
                Regime::new(5.0, 5.0),
                Regime::new(3.0, 5.0),
                Regime::new(3.0, 3.0),
            ],
            scale_thr_speeds: false,
        }
    }
}

/// Whole-percent fractions from `lo`% to `hi`% inclusive.
pub fn percent_grid(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|p| p as f64 / 100.0).collect()
}

/// Scale entry and MP_iap gate speeds by `1 + fraction` (and threshold speeds if asked).
pub fn scale_speeds(
    scenario: &AirspaceScenario,
    fraction: f64,
    scale_thr_speeds: bool,
) -> Result<AirspaceScenario, SensitivityError> {
    let factor = 1.0 + fraction;
    let mut out = scenario.clone();
    if fraction != 0.0 {
        for c in out.paths.iter_mut().flat_map(|p| p.classes.iter_mut()) {
            c.profile.v_entry *= factor;
            c.profile.v_mpiap *= factor;
            if scale_thr_speeds {
                c.profile.v_thr *= factor;
            }
        }
    }
    let violations: Vec<Violation> = validate(&out)
        .into_iter()
        .filter(|v| v.message.contains("accelerating") || v.message.contains("speeds"))
        .collect();
    if violations.is_empty() {
        Ok(out)
    } else {
        Err(SensitivityError::NonMonotone { fraction, violations })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok,
    /// Scaled profile is no longer decelerating.
    Skipped(String),
    Failed(String),
}

impl RowStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Skipped(_) => "skipped",
            RowStatus::Failed(_) => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub regime: Regime,
    pub speed_scale: f64,
    pub d_temp: Option<f64>,
    pub t_bar_thr: Option<f64>,
    pub lambda: Option<f64>,
    pub status: RowStatus,
}

impl SweepRow {
    fn empty(regime: Regime, speed_scale: f64, status: RowStatus) -> Self {
        Self {
            regime,
            speed_scale,
            d_temp: None,
            t_bar_thr: None,
            lambda: None,
            status,
        }
    }
}

/// Regime-major, scale-minor sweep; a failing row never aborts the rest.
pub fn run_sweep(scenario: &AirspaceScenario, spec: &SweepSpec) -> Result<Vec<SweepRow>, SensitivityError> {
    run_sweep_with(scenario, spec, &SolverOptions::default())
}

pub fn run_sweep_with(
    scenario: &AirspaceScenario,
    spec: &SweepSpec,
    opts: &SolverOptions,
) -> Result<Vec<SweepRow>, SensitivityError> {
    if spec.speed_scales.is_empty() || spec.regimes.is_empty() {
        return Err(SensitivityError::EmptySweep);
    }
    let policies = spec
        .regimes
        .iter()
        .map(|r| {
            let policy = SeparationPolicy {
                s_tma: r.s_tma,
                s_thr: r.s_thr,
                ..scenario.separation.clone()
            };
            let mut v = Vec::new();
            policy.violations(&mut v);
            if v.is_empty() {
                Ok(policy)
            } else {
                Err(SensitivityError::InvalidRegime { s: r.s_tma, s_thr: r.s_thr })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;

    let scaled: Vec<Result<AirspaceScenario, SensitivityError>> = spec
        .speed_scales
        .iter()
        .map(|f| scale_speeds(scenario, *f, spec.scale_thr_speeds))
        .collect();

    let mut rows = Vec::with_capacity(policies.len() * scaled.len());
    for (regime, policy) in spec.regimes.iter().zip(&policies) {
        for (fraction, base) in spec.speed_scales.iter().zip(&scaled) {
            let row = match base {
                Err(e) => SweepRow::empty(*regime, *fraction, RowStatus::Skipped(e.to_string())),
                Ok(base) => match capacity_with(&base.with_separation(policy.clone()), opts) {
                    Ok(r) => SweepRow {
                        regime: *regime,
                        speed_scale: *fraction,
                        d_temp: Some(r.d_temp),
                        t_bar_thr: Some(r.t_bar_thr),
                        lambda: Some(r.lambda),
                        status: RowStatus::Ok,
                    },
                    Err(e) => SweepRow::empty(*regime, *fraction, RowStatus::Failed(failure_text(&e))),
                },
            };
            debug!("sweep row {:?} {:+.3}: {:?}", regime, fraction, row.status);
            rows.push(row);
        }
    }
    Ok(rows)
}

fn failure_text(e: &CapacityError) -> String {
    e.to_string()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "regime_s_nm",
        "regime_sthr_nm",
        "speed_scale",
        "d_temp_min",
        "t_bar_thr_min",
        "lambda",
        "status",
    ])?;
    let opt = |x: Option<f64>| x.map(sig6).unwrap_or_default();
    for r in rows {
        w.write_record([
            sig6(r.regime.s_tma),
            sig6(r.regime.s_thr),
            sig6(r.speed_scale),
            opt(r.d_temp),
            opt(r.t_bar_thr),
            opt(r.lambda),
            r.status.label().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
