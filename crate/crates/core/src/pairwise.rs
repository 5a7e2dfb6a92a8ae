//! Minimal initial spacing between a leading and a trailing arrival.
//!
//! Time origin is the leader passing MP_kl (start of the common path); the
//! leader crosses the threshold at `lead_com1 + lead_com2`. The trailer
//! passes MP_kl at `t0`. Over that window the along-path gap is piecewise
//! quadratic, with breakpoints at the two MP_iap crossings. The solver finds
//! the smallest `t0` keeping the gap at or above S throughout and at or above
//! S_thr when the leader crosses the threshold.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use log::warn;
use thiserror::Error;

use crate::format::sig6;
use crate::kinematics::{KinematicsError, PathKinematics};
use crate::scenario::{AirspaceScenario, OrientedGeometry, SeparationPolicy};

/// Accelerations closer than this are treated as equal (linear gap).
const EQUAL_ACCEL_EPS: f64 = 1e-12;
/// Breakpoints closer than this are merged.
const BREAKPOINT_EPS: f64 = 1e-12;
/// Tolerance for the dense-replay guard, NM.
const GUARD_TOLERANCE_NM: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("initial spacing {t0} min violates the feasibility bound {lower_bound} min")]
    Infeasible { t0: f64, lower_bound: f64 },
    #[error("pair geometry does not match the path kinematics: {0}")]
    GeometryMismatch(String),
    #[error("solver did not bracket a feasible spacing after {iterations} expansions (last upper {upper} min)")]
    NoFeasibleUpperBound { iterations: usize, upper: f64 },
    #[error("bisection did not converge after {iterations} iterations (bracket [{lo}, {hi}] min)")]
    NonConvergence { iterations: usize, lo: f64, hi: f64 },
    #[error("dense replay rejected t0 {t0} min (min gap {min_gap} NM, threshold gap {end_gap} NM) and grid fallback found no spacing")]
    GuardFailed { t0: f64, min_gap: f64, end_gap: f64 },
    #[error("time {t} outside subinterval [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

#[derive(Debug, Error)]
pub enum PairError {
    #[error("combination {lead} -> {trail}: {source}")]
    Combination {
        lead: String,
        trail: String,
        #[source]
        source: SolveError,
    },
    #[error("no pair geometry for paths {0} and {1}")]
    MissingGeometry(String, String),
}

/// One ordered (leader, trailer) combination on the common path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCombination {
    pub geometry: OrientedGeometry,
    pub lead: PathKinematics,
    pub trail: PathKinematics,
}

impl PairCombination {
    pub fn new(
        geometry: OrientedGeometry,
        lead: PathKinematics,
        trail: PathKinematics,
    ) -> Result<Self, SolveError> {
        let tol = 1e-9;
        let checks = [
            (geometry.lead_entry_to_mpkl + geometry.d_common1, lead.approach.length, "leader entry→MP_iap"),
            (geometry.trail_entry_to_mpkl + geometry.d_common1, trail.approach.length, "trailer entry→MP_iap"),
            (geometry.d_common2, lead.final_segment.length, "leader MP_iap→THR"),
            (geometry.d_common2, trail.final_segment.length, "trailer MP_iap→THR"),
        ];
        for (got, want, what) in checks {
            if (got - want).abs() > tol {
                return Err(SolveError::GeometryMismatch(format!("{what}: {got} vs {want} NM")));
            }
        }
        if geometry.d_common1 < 0.0 || geometry.lead_entry_to_mpkl < -tol || geometry.trail_entry_to_mpkl < -tol {
            return Err(SolveError::GeometryMismatch("negative subpath length".into()));
        }
        Ok(Self { geometry, lead, trail })
    }

    /// Same path, same class.
    pub fn identical(kin: PathKinematics) -> Self {
        Self {
            geometry: OrientedGeometry {
                d_common1: kin.approach.length,
                d_common2: kin.final_segment.length,
                lead_entry_to_mpkl: 0.0,
                trail_entry_to_mpkl: 0.0,
            },
            lead: kin,
            trail: kin,
        }
    }
}

/// Flight times along the two common subpaths, with the speeds at MP_kl.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommonTimes {
    pub lead_com1: f64,
    pub lead_com2: f64,
    pub trail_com1: f64,
    pub trail_com2: f64,
    pub lead_v_mpkl: f64,
    pub trail_v_mpkl: f64,
}

impl CommonTimes {
    pub fn lead_total(&self) -> f64 {
        self.lead_com1 + self.lead_com2
    }

    /// Lower bound on `t0`: the trailer must reach MP_iap and the threshold after the leader.
    pub fn feasibility_bound(&self) -> f64 {
        0.0f64
            .max(self.lead_com1 - self.trail_com1)
            .max(self.lead_total() - (self.trail_com1 + self.trail_com2))
    }

    /// Threshold-crossing time difference for a given initial spacing.
    pub fn delta_t(&self, t0: f64) -> f64 {
        (self.trail_com1 - self.lead_com1) + (self.trail_com2 - self.lead_com2) + t0
    }
}

pub fn common_subpath_times(combo: &PairCombination) -> CommonTimes {
    let g = &combo.geometry;
    let lead_v_mpkl = combo.lead.approach.speed_at(g.lead_entry_to_mpkl);
    let trail_v_mpkl = combo.trail.approach.speed_at(g.trail_entry_to_mpkl);
    let com1 = |v_mpkl: f64, v_mpiap: f64| {
        if g.d_common1 > 0.0 {
            g.d_common1 / (0.5 * (v_mpkl + v_mpiap))
        } else {
            0.0
        }
    };
    let com2 = |k: &PathKinematics| g.d_common2 / (0.5 * (k.final_segment.v_start + k.final_segment.v_end));
    CommonTimes {
        lead_com1: com1(lead_v_mpkl, combo.lead.approach.v_end),
        lead_com2: com2(&combo.lead),
        trail_com1: com1(trail_v_mpkl, combo.trail.approach.v_end),
        trail_com2: com2(&combo.trail),
        lead_v_mpkl,
        trail_v_mpkl,
    }
}

/// Stretch of the window over which both aircraft hold constant accelerations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subinterval {
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// Gap at `t_start`, NM.
    pub s_start: f64,
    pub lead_accel: f64,
    pub trail_accel: f64,
    pub lead_v_start: f64,
    pub trail_v_start: f64,
}

impl Subinterval {
    fn quadratic_coeff(&self) -> f64 {
        let diff = self.lead_accel.abs() - self.trail_accel.abs();
        if diff.abs() < EQUAL_ACCEL_EPS {
            0.0
        } else {
            -0.5 * diff
        }
    }

    fn value(&self, t: f64) -> f64 {
        let tau = t - self.t_start;
        self.s_start + (self.lead_v_start - self.trail_v_start) * tau + self.quadratic_coeff() * tau * tau
    }

    pub fn gap_at(&self, t: f64) -> Result<f64, SolveError> {
        let slack = 1e-12 * (1.0 + self.t_end.abs());
        if t < self.t_start - slack || t > self.t_end + slack {
            return Err(SolveError::OutOfRange {
                t,
                start: self.t_start,
                end: self.t_end,
            });
        }
        Ok(self.value(t))
    }

    pub fn gap_at_end(&self) -> f64 {
        self.value(self.t_end)
    }

    /// Smallest gap over the subinterval, with the time it occurs.
    pub fn min_gap(&self) -> (f64, f64) {
        let mut best = (self.t_start, self.s_start);
        let end = (self.t_end, self.gap_at_end());
        if end.1 < best.1 {
            best = end;
        }
        let c2 = self.quadratic_coeff();
        if c2 > 0.0 {
            let vertex = self.t_start - (self.lead_v_start - self.trail_v_start) / (2.0 * c2);
            if vertex > self.t_start && vertex < self.t_end {
                let v = self.value(vertex);
                if v < best.1 {
                    best = (vertex, v);
                }
            }
        }
        best
    }
}

/// Partition the leader's common-path window for initial spacing `t0`.
pub fn build_subintervals(combo: &PairCombination, t0: f64) -> Result<Vec<Subinterval>, SolveError> {
    let times = common_subpath_times(combo);
    let lower_bound = times.feasibility_bound();
    if !(t0 > lower_bound) {
        return Err(SolveError::Infeasible { t0, lower_bound });
    }
    Ok(subintervals_unchecked(combo, &times, t0))
}

/// Same as [`build_subintervals`] but accepts `t0` at the feasibility bound.
fn subintervals_unchecked(combo: &PairCombination, times: &CommonTimes, t0: f64) -> Vec<Subinterval> {
    let window_end = times.lead_total();
    let lead_switch = times.lead_com1;
    let trail_switch = t0 + times.trail_com1;

    let mut cuts = vec![0.0, window_end];
    for b in [lead_switch, trail_switch] {
        if b > 0.0 && b < window_end {
            cuts.push(b);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= BREAKPOINT_EPS);

    let lead_a = (combo.lead.approach.accel, combo.lead.final_segment.accel);
    let trail_a = (combo.trail.approach.accel, combo.trail.final_segment.accel);

    let mut out: Vec<Subinterval> = Vec::with_capacity(3);
    for (n, w) in cuts.windows(2).enumerate() {
        let (t_start, t_end) = (w[0], w[1]);
        let mid = 0.5 * (t_start + t_end);
        let lead_accel = if mid < lead_switch { lead_a.0 } else { lead_a.1 };
        let trail_accel = if mid < trail_switch { trail_a.0 } else { trail_a.1 };
        let (s_start, lead_v_start, trail_v_start) = match out.last() {
            None => {
                let a1 = trail_a.0.abs();
                (
                    (times.trail_v_mpkl + 0.5 * a1 * t0) * t0,
                    times.lead_v_mpkl,
                    times.trail_v_mpkl + a1 * t0,
                )
            }
            Some(prev) => {
                let dur = prev.t_end - prev.t_start;
                (
                    prev.value(t_start),
                    prev.lead_v_start - prev.lead_accel.abs() * dur,
                    prev.trail_v_start - prev.trail_accel.abs() * dur,
                )
            }
        };
        out.push(Subinterval {
            index: n + 1,
            t_start,
            t_end,
            s_start,
            lead_accel,
            trail_accel,
            lead_v_start,
            trail_v_start,
        });
    }
    out
}

/// Smallest gap over the window and the gap as the leader crosses the threshold.
fn gap_summary(subs: &[Subinterval]) -> (f64, f64) {
    let min = subs.iter().map(|s| s.min_gap().1).fold(f64::INFINITY, f64::min);
    let end = subs.last().map(Subinterval::gap_at_end).unwrap_or(f64::NEG_INFINITY);
    (min, end)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Binding {
    InPath,
    Threshold,
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Binding::InPath => "in-path",
            Binding::Threshold => "threshold",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacingSolution {
    pub t0_star: f64,
    pub binding: Binding,
    pub delta_t: f64,
    pub com_times: CommonTimes,
    /// Smallest `t0` meeting the in-path separation alone.
    pub t0_in_path: f64,
    /// Smallest `t0` meeting the threshold separation alone.
    pub t0_threshold: f64,
    pub min_gap: f64,
    pub threshold_gap: f64,
    pub subintervals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Bisection bracket width at termination, minutes.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Time step of the post-solve safety replay, minutes.
    pub guard_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 200,
            guard_step: 1e-3,
        }
    }
}

/// Separation distances that apply to one combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationMinima {
    pub in_path: f64,
    pub threshold: f64,
}

impl SeparationMinima {
    pub fn new(in_path: f64, threshold: f64) -> Self {
        Self { in_path, threshold }
    }
}

pub fn solve_min_t0(combo: &PairCombination, policy: &SeparationPolicy) -> Result<SpacingSolution, SolveError> {
    solve_with(combo, SeparationMinima::new(policy.s_tma, policy.s_thr), &SolverOptions::default())
}

/// Smallest `t0` with the gap ≥ `minima.in_path` on the window and ≥ `minima.threshold` at its end.
pub fn solve_with(
    combo: &PairCombination,
    minima: SeparationMinima,
    opts: &SolverOptions,
) -> Result<SpacingSolution, SolveError> {
    let times = common_subpath_times(combo);
    let lb = times.feasibility_bound();

    let min_margin = |t0: f64| gap_summary(&subintervals_unchecked(combo, &times, t0)).0 - minima.in_path;
    let end_margin = |t0: f64| gap_summary(&subintervals_unchecked(combo, &times, t0)).1 - minima.threshold;

    let v_floor = combo.lead.final_segment.v_end.min(combo.trail.final_segment.v_end);
    let span = combo.geometry.d_common1 + combo.geometry.d_common2;
    let first_step = (minima.in_path.max(minima.threshold) + span) / v_floor;

    let t0_in_path = smallest_feasible(lb, first_step, &min_margin, opts)?;
    let t0_threshold = smallest_feasible(lb, first_step, &end_margin, opts)?;
    let (t0_star, binding) = if t0_threshold >= t0_in_path {
        (t0_threshold, Binding::Threshold)
    } else {
        (t0_in_path, Binding::InPath)
    };

    let subs = subintervals_unchecked(combo, &times, t0_star);
    let (min_gap, threshold_gap) = gap_summary(&subs);
    let mut solution = SpacingSolution {
        t0_star,
        binding,
        delta_t: times.delta_t(t0_star),
        com_times: times,
        t0_in_path,
        t0_threshold,
        min_gap,
        threshold_gap,
        subintervals: subs.len(),
    };

    let check = replay(combo, t0_star, opts.guard_step);
    if !check.satisfies(minima, GUARD_TOLERANCE_NM) {
        warn!(
            "dense replay rejected t0 {t0_star} (min gap {}, threshold gap {}); falling back to grid scan",
            check.min_gap, check.end_gap
        );
        let t0 = brute_force_t0(combo, minima, 1e-4, opts.guard_step).ok_or(SolveError::GuardFailed {
            t0: t0_star,
            min_gap: check.min_gap,
            end_gap: check.end_gap,
        })?;
        let replayed = replay(combo, t0, opts.guard_step);
        solution.t0_star = t0;
        solution.delta_t = times.delta_t(t0);
        solution.min_gap = replayed.min_gap;
        solution.threshold_gap = replayed.end_gap;
        solution.binding = if replayed.end_gap - minima.threshold <= replayed.min_gap - minima.in_path {
            Binding::Threshold
        } else {
            Binding::InPath
        };
    }
    Ok(solution)
}

/// Bisection for the smallest `t0 >= lb` with `margin(t0) >= 0`; `margin` must be non-decreasing.
fn smallest_feasible(
    lb: f64,
    first_step: f64,
    margin: &dyn Fn(f64) -> f64,
    opts: &SolverOptions,
) -> Result<f64, SolveError> {
    if margin(lb) >= 0.0 {
        return Ok(lb);
    }
    let mut step = first_step.max(opts.tolerance);
    let mut hi = lb + step;
    let mut expansions = 0;
    while margin(hi) < 0.0 {
        expansions += 1;
        if expansions > 60 {
            return Err(SolveError::NoFeasibleUpperBound {
                iterations: expansions,
                upper: hi,
            });
        }
        step *= 2.0;
        hi = lb + step;
    }
    let mut lo = lb;
    for _ in 0..opts.max_iterations {
        if hi - lo <= opts.tolerance {
            return Ok(hi);
        }
        let mid = 0.5 * (lo + hi);
        if margin(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(SolveError::NonConvergence {
        iterations: opts.max_iterations,
        lo,
        hi,
    })
}

/// Result of sampling the gap on a uniform time grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplayCheck {
    pub min_gap: f64,
    pub end_gap: f64,
}

impl ReplayCheck {
    pub fn satisfies(&self, minima: SeparationMinima, tol: f64) -> bool {
        self.min_gap >= minima.in_path - tol && self.end_gap >= minima.threshold - tol
    }
}

/// Along-common-path position of one aircraft, `tau` minutes after it passes MP_kl.
///
/// Negative `tau` continues the approach deceleration backwards.
fn position_after_mpkl(v_mpkl: f64, approach_accel: f64, final_accel: f64, t_com1: f64, d_common1: f64, tau: f64) -> f64 {
    if tau <= t_com1 {
        v_mpkl * tau + 0.5 * approach_accel * tau * tau
    } else {
        let v_mpiap = v_mpkl + approach_accel * t_com1;
        let dt = tau - t_com1;
        d_common1 + v_mpiap * dt + 0.5 * final_accel * dt * dt
    }
}

/// Sample both aircraft positions every `step` minutes over the leader's window.
pub fn replay(combo: &PairCombination, t0: f64, step: f64) -> ReplayCheck {
    let times = common_subpath_times(combo);
    let g = &combo.geometry;
    let lead = |t: f64| {
        position_after_mpkl(
            times.lead_v_mpkl,
            combo.lead.approach.accel,
            combo.lead.final_segment.accel,
            times.lead_com1,
            g.d_common1,
            t,
        )
    };
    let trail = |t: f64| {
        position_after_mpkl(
            times.trail_v_mpkl,
            combo.trail.approach.accel,
            combo.trail.final_segment.accel,
            times.trail_com1,
            g.d_common1,
            t - t0,
        )
    };
    let end = times.lead_total();
    let n = (end / step).ceil().max(1.0) as usize;
    let mut min_gap = f64::INFINITY;
    for k in 0..=n {
        let t = (k as f64 * step).min(end);
        min_gap = min_gap.min(lead(t) - trail(t));
    }
    ReplayCheck {
        min_gap,
        end_gap: lead(end) - trail(end),
    }
}

/// Grid scan over `t0` with the dense replay as the constraint check.
///
/// Scans coarsely (100 grid cells at a time) and then refines inside the
/// first feasible coarse cell.
pub fn brute_force_t0(combo: &PairCombination, minima: SeparationMinima, grid: f64, replay_step: f64) -> Option<f64> {
    let times = common_subpath_times(combo);
    let lb = times.feasibility_bound();
    let start = (lb / grid).floor() * grid;
    let ok = |t0: f64| t0 > lb && replay(combo, t0, replay_step).satisfies(minima, 0.0);
    let coarse = 100.0 * grid;
    let limit = 1e5 * coarse;
    let mut hi = start;
    while !ok(hi) {
        hi += coarse;
        if hi - start > limit {
            return None;
        }
    }
    let mut t0 = (hi - coarse).max(start);
    while !ok(t0) {
        t0 += grid;
    }
    Some(t0)
}

/// Ordered combination key: indices into the scenario's paths and each path's classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairKey {
    pub lead_path: usize,
    pub lead_class: usize,
    pub trail_path: usize,
    pub trail_class: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairEntry {
    pub lead_path: String,
    pub lead_class: String,
    pub trail_path: String,
    pub trail_class: String,
    /// ρ_k · ρ_l · p_i/k · p_j/l
    pub probability: f64,
    pub solution: SpacingSolution,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairTable {
    pub entries: BTreeMap<PairKey, PairEntry>,
}

impl PairTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &PairKey) -> Option<&PairEntry> {
        self.entries.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PairKey, &PairEntry)> {
        self.entries.iter()
    }

    pub fn min_delta_t(&self) -> f64 {
        self.entries
            .values()
            .map(|e| e.solution.delta_t)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "lead_path",
            "lead_class",
            "trail_path",
            "trail_class",
            "probability",
            "t0_min",
            "delta_t_min",
            "binding",
        ])?;
        for e in self.entries.values() {
            w.write_record([
                e.lead_path.clone(),
                e.lead_class.clone(),
                e.trail_path.clone(),
                e.trail_class.clone(),
                sig6(e.probability),
                sig6(e.solution.t0_star),
                sig6(e.solution.delta_t),
                e.solution.binding.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Kinematics for every (path, class) in the scenario, indexed like the scenario.
pub fn path_class_kinematics(scenario: &AirspaceScenario) -> Result<Vec<Vec<PathKinematics>>, KinematicsError> {
    scenario
        .paths
        .iter()
        .map(|p| p.classes.iter().map(|c| PathKinematics::for_path(p, &c.profile)).collect())
        .collect()
}

pub fn solve_all_pairs(scenario: &AirspaceScenario) -> Result<PairTable, PairError> {
    solve_all_pairs_with(scenario, &SolverOptions::default())
}

pub fn solve_all_pairs_with(scenario: &AirspaceScenario, opts: &SolverOptions) -> Result<PairTable, PairError> {
    let mut items = Vec::new();
    for (k, path) in scenario.active_paths() {
        for (i, class) in path.classes.iter().enumerate() {
            if class.proportion > 0.0 {
                items.push((k, i, path.proportion * class.proportion));
            }
        }
    }

    let label = |k: usize, i: usize| format!("{}/{}", scenario.paths[k].classes[i].class, scenario.paths[k].entry);
    let mut table = PairTable::default();
    for &(k, i, w_lead) in &items {
        for &(l, j, w_trail) in &items {
            let combo_err = |source: SolveError| PairError::Combination {
                lead: label(k, i),
                trail: label(l, j),
                source,
            };
            let geometry = scenario
                .geometry(k, l)
                .ok_or_else(|| PairError::MissingGeometry(scenario.paths[k].entry.clone(), scenario.paths[l].entry.clone()))?;
            let (lead_path, trail_path) = (&scenario.paths[k], &scenario.paths[l]);
            let (lead_class, trail_class) = (&lead_path.classes[i], &trail_path.classes[j]);
            let lead = PathKinematics::for_path(lead_path, &lead_class.profile).map_err(|e| combo_err(e.into()))?;
            let trail = PathKinematics::for_path(trail_path, &trail_class.profile).map_err(|e| combo_err(e.into()))?;
            let combo = PairCombination::new(geometry, lead, trail).map_err(combo_err)?;
            let minima = SeparationMinima::new(
                scenario.separation.in_tma_for(&lead_class.class, &trail_class.class),
                scenario.separation.s_thr,
            );
            let solution = solve_with(&combo, minima, opts).map_err(combo_err)?;
            table.entries.insert(
                PairKey {
                    lead_path: k,
                    lead_class: i,
                    trail_path: l,
                    trail_class: j,
                },
                PairEntry {
                    lead_path: lead_path.entry.clone(),
                    lead_class: lead_class.class.clone(),
                    trail_path: trail_path.entry.clone(),
                    trail_class: trail_class.class.clone(),
                    probability: w_lead * w_trail,
                    solution,
                },
            );
        }
    }
    Ok(table)
}
