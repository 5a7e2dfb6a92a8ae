//! Saturated arrival-stream simulator used to cross-check capacity.
//!
//! Aircraft are drawn i.i.d. by path and class proportions and land at
//! minimal spacing behind their immediate predecessor. Each aircraft is in
//! the TMA for its path flight time before landing. The time-averaged number
//! of aircraft inside converges to D_temp / T̄_thr.

use std::io::Write;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::format::{round6, sig6};
use crate::kinematics::{path_flight_time, KinematicsError};
use crate::pairwise::{PairKey, PairTable};
use crate::scenario::AirspaceScenario;

pub const MIN_AIRCRAFT: usize = 100;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("n_aircraft must be at least {MIN_AIRCRAFT}, got {0}")]
    TooFewAircraft(usize),
    #[error("warmup fraction must be in [0, 1), got {0}")]
    BadWarmup(f64),
    #[error("scenario has no path/class with nonzero probability")]
    EmptyMix,
    #[error("pair table has no entry for {0}")]
    MissingPair(String),
    #[error("stream too short for the observation window: need aircraft beyond the longest flight time")]
    WindowTooShort,
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_aircraft: usize,
    pub rng_seed: u64,
    /// Leading share of the stream excluded from statistics.
    pub warmup_fraction: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_aircraft: 100_000,
            rng_seed: 1,
            warmup_fraction: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub rng_seed: u64,
    pub n_aircraft: usize,
    /// Aircraft inside just before each landing in the window, averaged over landings.
    pub mean_occupancy: f64,
    pub max_occupancy: usize,
    pub time_avg_occupancy: f64,
    pub realized_mean_thr_spacing: f64,
    pub window_start_min: f64,
    pub window_end_min: f64,
}

impl SimResult {
    pub fn to_json(&self) -> String {
        let rounded = SimResult {
            mean_occupancy: round6(self.mean_occupancy),
            time_avg_occupancy: round6(self.time_avg_occupancy),
            realized_mean_thr_spacing: round6(self.realized_mean_thr_spacing),
            window_start_min: round6(self.window_start_min),
            window_end_min: round6(self.window_end_min),
            ..self.clone()
        };
        serde_json::to_string_pretty(&rounded).expect("sim result serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AircraftEvent {
    pub entry_time: f64,
    pub thr_time: f64,
    pub path: String,
    pub class: String,
}

pub fn write_trace_csv<W: Write>(events: &[AircraftEvent], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["entry_time", "thr_time", "path", "class"])?;
    for e in events {
        w.write_record([sig6(e.entry_time), sig6(e.thr_time), e.path.clone(), e.class.clone()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn simulate(scenario: &AirspaceScenario, table: &PairTable, config: &SimConfig) -> Result<SimResult, SimError> {
    Ok(run(scenario, table, config, false)?.0)
}

pub fn simulate_with_trace(
    scenario: &AirspaceScenario,
    table: &PairTable,
    config: &SimConfig,
) -> Result<(SimResult, Vec<AircraftEvent>), SimError> {
    run(scenario, table, config, true)
}

struct StreamItem {
    path: usize,
    class: usize,
    weight: f64,
    flight_time: f64,
}

fn run(
    scenario: &AirspaceScenario,
    table: &PairTable,
    config: &SimConfig,
    keep_trace: bool,
) -> Result<(SimResult, Vec<AircraftEvent>), SimError> {
    let n = config.n_aircraft;
    if n < MIN_AIRCRAFT {
        return Err(SimError::TooFewAircraft(n));
    }
    if !(0.0..1.0).contains(&config.warmup_fraction) {
        return Err(SimError::BadWarmup(config.warmup_fraction));
    }

    let mut items = Vec::new();
    for (k, p) in scenario.active_paths() {
        for (i, c) in p.classes.iter().enumerate() {
            let weight = p.proportion * c.proportion;
            if weight > 0.0 {
                items.push(StreamItem {
                    path: k,
                    class: i,
                    weight,
                    flight_time: path_flight_time(p, &c.profile)?,
                });
            }
        }
    }
    if items.is_empty() {
        return Err(SimError::EmptyMix);
    }

    // ΔT between consecutive draws, indexed [prev][cur].
    let mut spacing = vec![vec![0.0; items.len()]; items.len()];
    for (a, lead) in items.iter().enumerate() {
        for (b, trail) in items.iter().enumerate() {
            let key = PairKey {
                lead_path: lead.path,
                lead_class: lead.class,
                trail_path: trail.path,
                trail_class: trail.class,
            };
            let entry = table.get(&key).ok_or_else(|| {
                let name = |it: &StreamItem| {
                    let p = &scenario.paths[it.path];
                    format!("{}/{}", p.classes[it.class].class, p.entry)
                };
                SimError::MissingPair(format!("{} -> {}", name(lead), name(trail)))
            })?;
            spacing[a][b] = entry.solution.delta_t;
        }
    }

    let dist = WeightedIndex::new(items.iter().map(|it| it.weight)).map_err(|_| SimError::EmptyMix)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let draws: Vec<usize> = (0..n).map(|_| dist.sample(&mut rng)).collect();

    let mut thr = Vec::with_capacity(n);
    let mut t = 0.0;
    thr.push(t);
    for w in draws.windows(2) {
        t += spacing[w[0]][w[1]];
        thr.push(t);
    }

    let longest = items.iter().map(|it| it.flight_time).fold(0.0, f64::max);
    let first = ((config.warmup_fraction * n as f64).ceil() as usize).min(n - 1);
    let horizon = thr[n - 1] - longest;
    // Last landing whose window end still has every overlapping aircraft in the stream.
    let last = thr.partition_point(|x| *x <= horizon).saturating_sub(1);
    if last <= first {
        return Err(SimError::WindowTooShort);
    }
    let (start, end) = (thr[first], thr[last]);

    let mut occupied = 0.0;
    let mut events: Vec<(f64, i32)> = Vec::new();
    for (m, &d) in draws.iter().enumerate() {
        let exit = thr[m];
        let entry = exit - items[d].flight_time;
        let overlap = exit.min(end) - entry.max(start);
        if overlap > 0.0 {
            occupied += overlap;
        }
        if exit > start && entry < end {
            events.push((entry, 1));
            events.push((exit, -1));
        }
    }
    // Half-open presence [entry, exit): departures sort before arrivals at equal times.
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut level: i64 = 0;
    let mut max_level: i64 = 0;
    let mut in_window = false;
    for (time, delta) in &events {
        if !in_window && *time > start {
            max_level = max_level.max(level);
            in_window = true;
        }
        level += *delta as i64;
        if *time >= start && *time < end {
            max_level = max_level.max(level);
        }
    }

    // Occupancy seen just before each landing, landing aircraft included.
    let mut sampled = 0.0;
    for m in first..=last {
        let tm = thr[m];
        let inside = draws[m..]
            .iter()
            .zip(&thr[m..])
            .take_while(|(_, x)| **x <= tm + longest)
            .filter(|(d, x)| **x - items[**d].flight_time < tm)
            .count()
            + draws[..m]
                .iter()
                .zip(&thr[..m])
                .rev()
                .take_while(|(_, x)| **x >= tm)
                .count();
        sampled += inside as f64;
    }

    let trace = if keep_trace {
        draws
            .iter()
            .zip(&thr)
            .map(|(d, x)| {
                let p = &scenario.paths[items[*d].path];
                AircraftEvent {
                    entry_time: x - items[*d].flight_time,
                    thr_time: *x,
                    path: p.entry.clone(),
                    class: p.classes[items[*d].class].class.clone(),
                }
            })
            .collect()
    } else {
        Vec::new()
    };

    let result = SimResult {
        rng_seed: config.rng_seed,
        n_aircraft: n,
        mean_occupancy: sampled / (last - first + 1) as f64,
        max_occupancy: max_level.max(0) as usize,
        time_avg_occupancy: occupied / (end - start),
        realized_mean_thr_spacing: (end - start) / (last - first) as f64,
        window_start_min: start,
        window_end_min: end,
    };
    Ok((result, trace))
}
