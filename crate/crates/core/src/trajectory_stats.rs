//! Path proportions, class mixes and gate speeds from pre-cleaned track points.
//!
//! A flight is assigned to a path when it passes that path's entry fix, then
//! its MP_iap fix, then its threshold fix, each within the capture radius.
//! The speed at a gate is the ground speed of the point of closest approach.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::format::sig6;

pub const EARTH_RADIUS_NM: f64 = 3440.065;
pub const DEFAULT_CAPTURE_RADIUS_NM: f64 = 3.0;

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("trajectory CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("gate file: {0}")]
    Gates(#[from] serde_json::Error),
    #[error("invalid gate set: {0}")]
    InvalidGates(String),
    #[error("flight {0} never passes within the capture radius of the fix")]
    NoPassage(String),
    #[error("no flight matched any path")]
    NoMatchedFlights,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TrajectoryPoint {
    pub flight_id: String,
    #[serde(rename = "timestamp_unix_s")]
    pub timestamp: f64,
    #[serde(rename = "lat_deg")]
    pub lat: f64,
    #[serde(rename = "lon_deg")]
    pub lon: f64,
    #[serde(rename = "ground_speed_kt")]
    pub ground_speed: f64,
    pub aircraft_class: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fix {
    pub lat: f64,
    pub lon: f64,
    #[serde(default)]
    pub capture_radius_nm: Option<f64>,
}

impl Fix {
    pub fn new(lat: f64, lon: f64) -> Self {
        Self {
            lat,
            lon,
            capture_radius_nm: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathGates {
    pub path: String,
    pub entry: Fix,
    pub mpiap: Fix,
    pub threshold: Fix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateSet {
    pub paths: Vec<PathGates>,
    pub default_radius_nm: f64,
}

impl GateSet {
    pub fn new(paths: Vec<PathGates>, default_radius_nm: f64) -> Result<Self, ExtractError> {
        let set = Self {
            paths,
            default_radius_nm,
        };
        set.check()?;
        Ok(set)
    }

    pub fn from_json(text: &str, default_radius_nm: f64) -> Result<Self, ExtractError> {
        Self::new(serde_json::from_str(text)?, default_radius_nm)
    }

    pub fn radius(&self, fix: &Fix) -> f64 {
        fix.capture_radius_nm.unwrap_or(self.default_radius_nm)
    }

    fn check(&self) -> Result<(), ExtractError> {
        if self.paths.is_empty() {
            return Err(ExtractError::InvalidGates("no paths".into()));
        }
        for g in &self.paths {
            for (name, f) in [("entry", &g.entry), ("mpiap", &g.mpiap), ("threshold", &g.threshold)] {
                if !(self.radius(f) > 0.0) {
                    return Err(ExtractError::InvalidGates(format!("{} {name}: capture radius must be > 0", g.path)));
                }
            }
            let same = |a: &Fix, b: &Fix| a.lat == b.lat && a.lon == b.lon;
            if same(&g.entry, &g.mpiap) || same(&g.mpiap, &g.threshold) || same(&g.entry, &g.threshold) {
                return Err(ExtractError::InvalidGates(format!("{}: gate fixes must be distinct", g.path)));
            }
        }
        Ok(())
    }
}

/// Great-circle distance in NM.
pub fn haversine_nm(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_NM * h.sqrt().min(1.0).asin()
}

/// Points of one flight, ordered by time.
#[derive(Debug, Clone, PartialEq)]
pub struct Flight {
    pub id: String,
    pub class: String,
    pub points: Vec<TrajectoryPoint>,
}

/// Group points by flight id and sort each flight by timestamp.
pub fn group_flights(points: Vec<TrajectoryPoint>) -> Vec<Flight> {
    let mut by_id: BTreeMap<String, Vec<TrajectoryPoint>> = BTreeMap::new();
    for p in points {
        by_id.entry(p.flight_id.clone()).or_default().push(p);
    }
    by_id
        .into_iter()
        .map(|(id, mut pts)| {
            pts.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
            Flight {
                class: pts[0].aircraft_class.clone(),
                id,
                points: pts,
            }
        })
        .collect()
}

pub fn read_points<R: Read>(input: R) -> Result<Vec<TrajectoryPoint>, ExtractError> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<Vec<_>, _>>()?)
}

/// Index of the closest point within `radius` of `fix`, searching from `from`.
///
/// Only the first contiguous visit inside the radius is considered, and ties keep the earlier point.
fn first_passage(points: &[TrajectoryPoint], fix: &Fix, radius: f64, from: usize) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in points.iter().enumerate().skip(from) {
        let d = haversine_nm(p.lat, p.lon, fix.lat, fix.lon);
        if d <= radius {
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        } else if best.is_some() {
            break;
        }
    }
    best.map(|(i, _)| i)
}

/// Path whose gate sequence the flight satisfies with the earliest entry passage.
pub fn assign_path<'a>(flight: &[TrajectoryPoint], gates: &'a GateSet) -> Option<&'a str> {
    if flight.len() < 2 {
        return None;
    }
    let mut best: Option<(f64, &str)> = None;
    for g in &gates.paths {
        let Some(e) = first_passage(flight, &g.entry, gates.radius(&g.entry), 0) else {
            continue;
        };
        let Some(m) = first_passage(flight, &g.mpiap, gates.radius(&g.mpiap), e + 1) else {
            continue;
        };
        if first_passage(flight, &g.threshold, gates.radius(&g.threshold), m + 1).is_none() {
            continue;
        }
        let t = flight[e].timestamp;
        if best.map_or(true, |(bt, _)| t < bt) {
            best = Some((t, g.path.as_str()));
        }
    }
    best.map(|(_, p)| p)
}

/// Ground speed at the point of closest approach to `fix`.
pub fn gate_speed(flight: &[TrajectoryPoint], fix: &Fix, radius: f64) -> Result<f64, ExtractError> {
    let mut best: Option<(f64, &TrajectoryPoint)> = None;
    for p in flight {
        let d = haversine_nm(p.lat, p.lon, fix.lat, fix.lon);
        if d <= radius && best.map_or(true, |(bd, _)| d < bd) {
            best = Some((d, p));
        }
    }
    best.map(|(_, p)| p.ground_speed).ok_or_else(|| {
        ExtractError::NoPassage(flight.first().map(|p| p.flight_id.clone()).unwrap_or_default())
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProportionRow {
    pub path: String,
    pub flights: usize,
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassMixRow {
    pub path: String,
    pub class: String,
    pub flights: usize,
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedRow {
    pub path: String,
    pub class: String,
    pub v_entry_kt: f64,
    pub v_mpiap_kt: f64,
    pub v_thr_kt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedTables {
    pub proportions: Vec<ProportionRow>,
    pub class_mix: Vec<ClassMixRow>,
    pub speeds: Vec<SpeedRow>,
    pub unmatched: usize,
}

pub fn build_tables(flights: &[Flight], gates: &GateSet) -> Result<ExtractedTables, ExtractError> {
    // path -> class -> per-flight gate speeds
    let mut matched: BTreeMap<String, BTreeMap<String, Vec<[f64; 3]>>> = BTreeMap::new();
    let mut unmatched = 0;
    for f in flights {
        let Some(path) = assign_path(&f.points, gates) else {
            unmatched += 1;
            continue;
        };
        let g = gates.paths.iter().find(|g| g.path == path).expect("assigned path exists");
        let speeds = [
            gate_speed(&f.points, &g.entry, gates.radius(&g.entry))?,
            gate_speed(&f.points, &g.mpiap, gates.radius(&g.mpiap))?,
            gate_speed(&f.points, &g.threshold, gates.radius(&g.threshold))?,
        ];
        matched
            .entry(path.to_string())
            .or_default()
            .entry(f.class.clone())
            .or_default()
            .push(speeds);
    }
    let total: usize = matched.values().flat_map(|m| m.values()).map(Vec::len).sum();
    if total == 0 {
        return Err(ExtractError::NoMatchedFlights);
    }

    let mut tables = ExtractedTables {
        proportions: Vec::new(),
        class_mix: Vec::new(),
        speeds: Vec::new(),
        unmatched,
    };
    // Gate-file order for paths, lexicographic for classes.
    for g in &gates.paths {
        let Some(classes) = matched.get(&g.path) else {
            continue;
        };
        let on_path: usize = classes.values().map(Vec::len).sum();
        tables.proportions.push(ProportionRow {
            path: g.path.clone(),
            flights: on_path,
            proportion: on_path as f64 / total as f64,
        });
        for (class, rows) in classes {
            tables.class_mix.push(ClassMixRow {
                path: g.path.clone(),
                class: class.clone(),
                flights: rows.len(),
                proportion: rows.len() as f64 / on_path as f64,
            });
            let n = rows.len() as f64;
            let mean = |k: usize| rows.iter().map(|r| r[k]).sum::<f64>() / n;
            tables.speeds.push(SpeedRow {
                path: g.path.clone(),
                class: class.clone(),
                v_entry_kt: mean(0),
                v_mpiap_kt: mean(1),
                v_thr_kt: mean(2),
            });
        }
    }
    Ok(tables)
}

impl ExtractedTables {
    pub fn write_proportions_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["path", "flights", "proportion"])?;
        for r in &self.proportions {
            w.write_record([r.path.clone(), r.flights.to_string(), sig6(r.proportion)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_class_mix_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["path", "class", "flights", "proportion"])?;
        for r in &self.class_mix {
            w.write_record([r.path.clone(), r.class.clone(), r.flights.to_string(), sig6(r.proportion)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_speeds_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["path", "class", "v_entry_kt", "v_mpiap_kt", "v_thr_kt"])?;
        for r in &self.speeds {
            w.write_record([
                r.path.clone(),
                r.class.clone(),
                sig6(r.v_entry_kt),
                sig6(r.v_mpiap_kt),
                sig6(r.v_thr_kt),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Scenario document with proportions and speeds filled in and lengths left null.
    pub fn scenario_skeleton(&self, name: &str, runway: &str) -> serde_json::Value {
        let paths: Vec<_> = self
            .proportions
            .iter()
            .map(|p| {
                let classes: Vec<_> = self
                    .class_mix
                    .iter()
                    .zip(&self.speeds)
                    .filter(|(m, _)| m.path == p.path)
                    .map(|(m, s)| {
                        json!({
                            "class": m.class,
                            "proportion": m.proportion,
                            "v_entry_kt": s.v_entry_kt,
                            "v_mpiap_kt": s.v_mpiap_kt,
                            "v_thr_kt": s.v_thr_kt,
                        })
                    })
                    .collect();
                json!({
                    "entry": p.path,
                    "proportion": p.proportion,
                    "d_entry_mpiap_nm": null,
                    "d_mpiap_thr_nm": null,
                    "classes": classes,
                })
            })
            .collect();
        json!({
            "name": name,
            "runway": runway,
            "separation": {"s_tma_nm": 5.0, "s_thr_nm": 8.0},
            "paths": paths,
            "pair_geometry": [],
        })
    }
}
