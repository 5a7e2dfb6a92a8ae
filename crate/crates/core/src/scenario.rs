//! Structural description of one runway's arrival airspace.
//!
//! A scenario is loaded from a JSON document (speeds in knots, distances in
//! NM) and converted to canonical internal units: NM, minutes, NM/min. Every
//! other module consumes the validated [`AirspaceScenario`] and never sees the
//! document types.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Knots per NM/min.
pub const KT_PER_NM_PER_MIN: f64 = 60.0;

/// Tolerance used for proportion sums and length additivity.
pub const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario schema violation: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("scenario invalid: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// One broken invariant, naming the offending entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub entity: String,
    pub message: String,
}

impl Violation {
    fn new(entity: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            entity: entity.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.message)
    }
}

/// Gate speeds of one aircraft class on one path, in NM/min.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedProfile {
    pub v_entry: f64,
    pub v_mpiap: f64,
    pub v_thr: f64,
}

impl SpeedProfile {
    pub fn new(v_entry: f64, v_mpiap: f64, v_thr: f64) -> Self {
        Self {
            v_entry,
            v_mpiap,
            v_thr,
        }
    }

    pub fn from_knots(v_entry_kt: f64, v_mpiap_kt: f64, v_thr_kt: f64) -> Self {
        Self::new(
            v_entry_kt / KT_PER_NM_PER_MIN,
            v_mpiap_kt / KT_PER_NM_PER_MIN,
            v_thr_kt / KT_PER_NM_PER_MIN,
        )
    }

    pub fn to_knots(&self) -> [f64; 3] {
        [
            self.v_entry * KT_PER_NM_PER_MIN,
            self.v_mpiap * KT_PER_NM_PER_MIN,
            self.v_thr * KT_PER_NM_PER_MIN,
        ]
    }

    fn violations(&self, entity: &str, out: &mut Vec<Violation>) {
        let all = [self.v_entry, self.v_mpiap, self.v_thr];
        if all.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            out.push(Violation::new(entity, "speeds must be finite and strictly positive"));
            return;
        }
        if self.v_mpiap > self.v_entry {
            out.push(Violation::new(entity, "accelerating segment entry→MP_iap"));
        }
        if self.v_thr > self.v_mpiap {
            out.push(Violation::new(entity, "accelerating segment MP_iap→THR"));
        }
    }
}

/// Share of one aircraft class on a path together with its speed profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassShare {
    pub class: String,
    pub proportion: f64,
    pub profile: SpeedProfile,
}

/// Named fix with its along-path distance from the entry point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub fix: String,
    pub along_nm: f64,
}

/// One entry-to-threshold route, split at the IAP merging point.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalPath {
    pub entry: String,
    pub proportion: f64,
    pub d_entry_to_mpiap: f64,
    pub d_mpiap_to_thr: f64,
    pub classes: Vec<ClassShare>,
    /// Optional polyline used only to derive missing pair geometry.
    pub waypoints: Vec<Waypoint>,
    pub notes: Option<String>,
}

impl ArrivalPath {
    pub fn is_active(&self) -> bool {
        self.proportion > 0.0
    }

    pub fn total_length(&self) -> f64 {
        self.d_entry_to_mpiap + self.d_mpiap_to_thr
    }
}

/// Common-path decomposition for an unordered pair of paths `(a, b)`.
///
/// `d_entry_to_mpkl_a` belongs to the lower-indexed path of the pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGeometry {
    pub d_common1: f64,
    pub d_common2: f64,
    pub d_entry_to_mpkl_a: f64,
    pub d_entry_to_mpkl_b: f64,
}

impl PairGeometry {
    /// Geometry consistent with paths `a` and `b` sharing `d_common1` NM before MP_iap.
    pub fn from_common1(a: &ArrivalPath, b: &ArrivalPath, d_common1: f64) -> Self {
        Self {
            d_common1,
            d_common2: a.d_mpiap_to_thr,
            d_entry_to_mpkl_a: a.d_entry_to_mpiap - d_common1,
            d_entry_to_mpkl_b: b.d_entry_to_mpiap - d_common1,
        }
    }
}

/// Oriented view of a pair geometry for a (lead path, trail path) ordering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedGeometry {
    pub d_common1: f64,
    pub d_common2: f64,
    pub lead_entry_to_mpkl: f64,
    pub trail_entry_to_mpkl: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationPolicy {
    /// In-TMA longitudinal separation S, NM.
    pub s_tma: f64,
    /// Separation required when the leader crosses the threshold, NM.
    pub s_thr: f64,
    /// Per (lead class, trail class) replacement for `s_tma`.
    pub class_overrides: BTreeMap<(String, String), f64>,
    pub allow_sthr_below_s: bool,
}

impl SeparationPolicy {
    pub fn uniform(s_tma: f64, s_thr: f64) -> Self {
        Self {
            s_tma,
            s_thr,
            class_overrides: BTreeMap::new(),
            allow_sthr_below_s: false,
        }
    }

    pub fn in_tma_for(&self, lead_class: &str, trail_class: &str) -> f64 {
        self.class_overrides
            .get(&(lead_class.to_string(), trail_class.to_string()))
            .copied()
            .unwrap_or(self.s_tma)
    }

    pub fn violations(&self, out: &mut Vec<Violation>) {
        if !(self.s_tma.is_finite() && self.s_tma > 0.0) {
            out.push(Violation::new("separation", "s_tma must be > 0"));
        }
        if !(self.s_thr.is_finite() && self.s_thr > 0.0) {
            out.push(Violation::new("separation", "s_thr must be > 0"));
        } else if !self.allow_sthr_below_s && self.s_thr < self.s_tma {
            out.push(Violation::new(
                "separation",
                format!(
                    "s_thr {} below s_tma {} (set allow_sthr_below_s to permit)",
                    self.s_thr, self.s_tma
                ),
            ));
        }
        for ((lead, trail), s) in &self.class_overrides {
            if !(s.is_finite() && *s > 0.0) {
                out.push(Violation::new(
                    format!("separation override {lead}->{trail}"),
                    "s_nm must be > 0",
                ));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AirspaceScenario {
    pub name: String,
    pub runway: String,
    pub paths: Vec<ArrivalPath>,
    pub separation: SeparationPolicy,
    /// Keyed by `(a, b)` with `a <= b`, indices into `paths`.
    pub pair_geometry: BTreeMap<(usize, usize), PairGeometry>,
    pub provenance: Vec<String>,
}

impl AirspaceScenario {
    pub fn active_paths(&self) -> impl Iterator<Item = (usize, &ArrivalPath)> {
        self.paths.iter().enumerate().filter(|(_, p)| p.is_active())
    }

    pub fn path_index(&self, entry: &str) -> Option<usize> {
        self.paths.iter().position(|p| p.entry == entry)
    }

    pub fn geometry(&self, lead: usize, trail: usize) -> Option<OrientedGeometry> {
        let key = (lead.min(trail), lead.max(trail));
        let g = self.pair_geometry.get(&key)?;
        let (lead_mpkl, trail_mpkl) = if lead <= trail {
            (g.d_entry_to_mpkl_a, g.d_entry_to_mpkl_b)
        } else {
            (g.d_entry_to_mpkl_b, g.d_entry_to_mpkl_a)
        };
        Some(OrientedGeometry {
            d_common1: g.d_common1,
            d_common2: g.d_common2,
            lead_entry_to_mpkl: lead_mpkl,
            trail_entry_to_mpkl: trail_mpkl,
        })
    }

    /// Copy of the scenario with a different separation policy.
    pub fn with_separation(&self, separation: SeparationPolicy) -> Self {
        let mut s = self.clone();
        s.separation = separation;
        s
    }

    /// Copy of the scenario with zero-proportion paths removed and pair keys reindexed.
    pub fn without_inactive_paths(&self) -> Self {
        let keep: Vec<usize> = self.active_paths().map(|(i, _)| i).collect();
        let remap: BTreeMap<usize, usize> =
            keep.iter().enumerate().map(|(new, old)| (*old, new)).collect();
        let pair_geometry = self
            .pair_geometry
            .iter()
            .filter_map(|((a, b), g)| Some(((*remap.get(a)?, *remap.get(b)?), *g)))
            .collect();
        Self {
            paths: keep.iter().map(|i| self.paths[*i].clone()).collect(),
            pair_geometry,
            ..self.clone()
        }
    }
}

/// Check every scenario invariant, returning one entry per breach.
pub fn validate(scenario: &AirspaceScenario) -> Vec<Violation> {
    let mut out = Vec::new();
    if scenario.paths.is_empty() {
        out.push(Violation::new("paths", "scenario has no arrival paths"));
        return out;
    }

    let mut seen = BTreeSet::new();
    for p in &scenario.paths {
        if p.entry.is_empty() {
            out.push(Violation::new("paths", "path with empty entry label"));
        } else if !seen.insert(p.entry.as_str()) {
            out.push(Violation::new(format!("path {}", p.entry), "duplicate entry label"));
        }
    }

    let total: f64 = scenario.paths.iter().map(|p| p.proportion).sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        out.push(Violation::new("paths", format!("proportions sum to {total}")));
    }
    if scenario.active_paths().next().is_none() {
        out.push(Violation::new("paths", "no path with nonzero proportion"));
    }

    let d2_ref = scenario.paths[0].d_mpiap_to_thr;
    for p in &scenario.paths {
        path_violations(p, &mut out);
        if (p.d_mpiap_to_thr - d2_ref).abs() > SUM_TOLERANCE {
            out.push(Violation::new(
                format!("path {}", p.entry),
                format!(
                    "d_mpiap_thr {} differs from {} on path {}; all paths share MP_iap",
                    p.d_mpiap_to_thr, d2_ref, scenario.paths[0].entry
                ),
            ));
        }
    }

    scenario.separation.violations(&mut out);
    geometry_violations(scenario, &mut out);
    out
}

fn path_violations(p: &ArrivalPath, out: &mut Vec<Violation>) {
    let entity = format!("path {}", p.entry);
    if !(0.0..=1.0).contains(&p.proportion) {
        out.push(Violation::new(&entity, "proportion outside [0, 1]"));
    }
    if !(p.d_entry_to_mpiap.is_finite() && p.d_entry_to_mpiap > 0.0) {
        out.push(Violation::new(&entity, "d_entry_mpiap must be > 0"));
    }
    if !(p.d_mpiap_to_thr.is_finite() && p.d_mpiap_to_thr > 0.0) {
        out.push(Violation::new(&entity, "d_mpiap_thr must be > 0"));
    }
    if p.classes.is_empty() {
        if p.is_active() {
            out.push(Violation::new(&entity, "active path has no aircraft classes"));
        }
        return;
    }
    let mut names = BTreeSet::new();
    for c in &p.classes {
        let ce = format!("{entity} class {}", c.class);
        if !names.insert(c.class.as_str()) {
            out.push(Violation::new(&ce, "duplicate class"));
        }
        if !(0.0..=1.0).contains(&c.proportion) {
            out.push(Violation::new(&ce, "class proportion outside [0, 1]"));
        }
        c.profile.violations(&ce, out);
    }
    let mix: f64 = p.classes.iter().map(|c| c.proportion).sum();
    if (mix - 1.0).abs() > SUM_TOLERANCE {
        out.push(Violation::new(&entity, format!("class mix sums to {}", round_for_message(mix))));
    }
}

fn round_for_message(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

fn geometry_violations(s: &AirspaceScenario, out: &mut Vec<Violation>) {
    let n = s.paths.len();
    for (&(a, b), g) in &s.pair_geometry {
        if a > b || b >= n {
            out.push(Violation::new("pair_geometry", format!("bad pair key ({a}, {b})")));
            continue;
        }
        let (pa, pb) = (&s.paths[a], &s.paths[b]);
        let entity = format!("pair {}/{}", pa.entry, pb.entry);
        if !(g.d_common1.is_finite() && g.d_common1 >= 0.0) {
            out.push(Violation::new(&entity, "d_common1 must be >= 0"));
        }
        if (g.d_common2 - pa.d_mpiap_to_thr).abs() > SUM_TOLERANCE {
            out.push(Violation::new(&entity, "d_common2 differs from d_mpiap_thr"));
        }
        for (p, mpkl) in [(pa, g.d_entry_to_mpkl_a), (pb, g.d_entry_to_mpkl_b)] {
            if mpkl < -SUM_TOLERANCE {
                out.push(Violation::new(
                    &entity,
                    format!("d_common1 {} exceeds entry→MP_iap length of {}", g.d_common1, p.entry),
                ));
            } else if (mpkl + g.d_common1 - p.d_entry_to_mpiap).abs() > SUM_TOLERANCE {
                out.push(Violation::new(
                    &entity,
                    format!(
                        "geometry inconsistency: d_entry_mpkl {} + d_common1 {} != d_entry_mpiap {} on {}",
                        mpkl, g.d_common1, p.d_entry_to_mpiap, p.entry
                    ),
                ));
            }
        }
        if a == b && (g.d_common1 - pa.d_entry_to_mpiap).abs() > SUM_TOLERANCE {
            out.push(Violation::new(
                &entity,
                "same-path common subpath 1 must equal its entry→MP_iap length",
            ));
        }
    }
    let active: Vec<usize> = s.active_paths().map(|(i, _)| i).collect();
    for (x, &a) in active.iter().enumerate() {
        for &b in &active[x..] {
            if !s.pair_geometry.contains_key(&(a, b)) {
                out.push(Violation::new(
                    format!("pair {}/{}", s.paths[a].entry, s.paths[b].entry),
                    "missing pair geometry",
                ));
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Document schema

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub name: String,
    pub runway: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub provenance: Vec<String>,
    pub separation: SeparationDocument,
    pub paths: Vec<PathDocument>,
    #[serde(default)]
    pub pair_geometry: Vec<PairDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationDocument {
    pub s_tma_nm: f64,
    pub s_thr_nm: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_sthr_below_s: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub s_tma_matrix: Vec<ClassPairSeparation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassPairSeparation {
    pub lead_class: String,
    pub trail_class: String,
    pub s_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathDocument {
    pub entry: String,
    pub proportion: f64,
    pub d_entry_mpiap_nm: f64,
    pub d_mpiap_thr_nm: f64,
    pub classes: Vec<ClassDocument>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub waypoints: Vec<Waypoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassDocument {
    pub class: String,
    pub proportion: f64,
    pub v_entry_kt: f64,
    pub v_mpiap_kt: f64,
    pub v_thr_kt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairDocument {
    pub path_a: String,
    pub path_b: String,
    pub d_common1_nm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

/// Parse and validate a scenario document.
pub fn load_scenario(source: &str) -> Result<AirspaceScenario, ScenarioError> {
    let doc: ScenarioDocument = serde_json::from_str(source)?;
    from_document(&doc)
}

pub fn load_scenario_file(path: impl AsRef<Path>) -> Result<AirspaceScenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_scenario(&text)
}

/// Build a scenario from an already-parsed document, without validating it.
///
/// Structural problems (unknown path names, duplicate pair entries) are
/// returned as violations alongside the partially built scenario.
pub fn build_unchecked(doc: &ScenarioDocument) -> (AirspaceScenario, Vec<Violation>) {
    let mut out = Vec::new();
    let paths: Vec<ArrivalPath> = doc
        .paths
        .iter()
        .map(|p| ArrivalPath {
            entry: p.entry.clone(),
            proportion: p.proportion,
            d_entry_to_mpiap: p.d_entry_mpiap_nm,
            d_mpiap_to_thr: p.d_mpiap_thr_nm,
            classes: p
                .classes
                .iter()
                .map(|c| ClassShare {
                    class: c.class.clone(),
                    proportion: c.proportion,
                    profile: SpeedProfile::from_knots(c.v_entry_kt, c.v_mpiap_kt, c.v_thr_kt),
                })
                .collect(),
            waypoints: p.waypoints.clone(),
            notes: p.notes.clone(),
        })
        .collect();

    let mut class_overrides = BTreeMap::new();
    for o in &doc.separation.s_tma_matrix {
        let key = (o.lead_class.clone(), o.trail_class.clone());
        if class_overrides.insert(key, o.s_nm).is_some() {
            out.push(Violation::new(
                format!("separation override {}->{}", o.lead_class, o.trail_class),
                "duplicate entry",
            ));
        }
    }
    let separation = SeparationPolicy {
        s_tma: doc.separation.s_tma_nm,
        s_thr: doc.separation.s_thr_nm,
        class_overrides,
        allow_sthr_below_s: doc.separation.allow_sthr_below_s,
    };

    let index = |name: &str| paths.iter().position(|p| p.entry == name);
    let mut pair_geometry = BTreeMap::new();
    for pd in &doc.pair_geometry {
        let entity = format!("pair {}/{}", pd.path_a, pd.path_b);
        let (Some(a), Some(b)) = (index(&pd.path_a), index(&pd.path_b)) else {
            out.push(Violation::new(entity, "references an unknown path"));
            continue;
        };
        let key = (a.min(b), a.max(b));
        let g = PairGeometry::from_common1(&paths[key.0], &paths[key.1], pd.d_common1_nm);
        if pair_geometry.insert(key, g).is_some() {
            out.push(Violation::new(entity, "duplicate pair geometry entry"));
        }
    }

    for (i, p) in paths.iter().enumerate() {
        pair_geometry
            .entry((i, i))
            .or_insert_with(|| PairGeometry::from_common1(p, p, p.d_entry_to_mpiap));
    }
    for a in 0..paths.len() {
        for b in (a + 1)..paths.len() {
            if pair_geometry.contains_key(&(a, b)) {
                continue;
            }
            match geometry_from_waypoints(&paths[a], &paths[b]) {
                Some(Ok(g)) => {
                    pair_geometry.insert((a, b), g);
                }
                Some(Err(v)) => out.push(v),
                None => {}
            }
        }
    }

    let scenario = AirspaceScenario {
        name: doc.name.clone(),
        runway: doc.runway.clone(),
        paths,
        separation,
        pair_geometry,
        provenance: doc.provenance.clone(),
    };
    (scenario, out)
}

pub fn from_document(doc: &ScenarioDocument) -> Result<AirspaceScenario, ScenarioError> {
    let (scenario, mut violations) = build_unchecked(doc);
    violations.extend(validate(&scenario));
    if violations.is_empty() {
        Ok(scenario)
    } else {
        Err(ScenarioError::Invalid(violations))
    }
}

/// Derive common-path geometry from the longest shared suffix of two polylines.
///
/// Returns `None` when either path lacks waypoints.
fn geometry_from_waypoints(
    a: &ArrivalPath,
    b: &ArrivalPath,
) -> Option<Result<PairGeometry, Violation>> {
    if a.waypoints.is_empty() || b.waypoints.is_empty() {
        return None;
    }
    let entity = format!("pair {}/{}", a.entry, b.entry);
    let shared = a
        .waypoints
        .iter()
        .rev()
        .zip(b.waypoints.iter().rev())
        .take_while(|(x, y)| x.fix == y.fix)
        .count();
    if shared == 0 {
        return Some(Err(Violation::new(entity, "waypoint polylines share no suffix")));
    }
    let wa = &a.waypoints[a.waypoints.len() - shared];
    let wb = &b.waypoints[b.waypoints.len() - shared];
    let common1_a = a.d_entry_to_mpiap - wa.along_nm;
    let common1_b = b.d_entry_to_mpiap - wb.along_nm;
    if common1_a < -SUM_TOLERANCE || common1_b < -SUM_TOLERANCE {
        return Some(Err(Violation::new(
            entity,
            format!("shared suffix starts at {} downstream of MP_iap", wa.fix),
        )));
    }
    if (common1_a - common1_b).abs() > 1e-6 {
        return Some(Err(Violation::new(
            entity,
            format!(
                "waypoint distances disagree on the common path from {} ({common1_a} vs {common1_b} NM)",
                wa.fix
            ),
        )));
    }
    Some(Ok(PairGeometry::from_common1(a, b, common1_a.max(0.0))))
}

pub fn to_document(s: &AirspaceScenario) -> ScenarioDocument {
    ScenarioDocument {
        name: s.name.clone(),
        runway: s.runway.clone(),
        provenance: s.provenance.clone(),
        separation: SeparationDocument {
            s_tma_nm: s.separation.s_tma,
            s_thr_nm: s.separation.s_thr,
            allow_sthr_below_s: s.separation.allow_sthr_below_s,
            s_tma_matrix: s
                .separation
                .class_overrides
                .iter()
                .map(|((lead, trail), s_nm)| ClassPairSeparation {
                    lead_class: lead.clone(),
                    trail_class: trail.clone(),
                    s_nm: *s_nm,
                })
                .collect(),
        },
        paths: s
            .paths
            .iter()
            .map(|p| PathDocument {
                entry: p.entry.clone(),
                proportion: p.proportion,
                d_entry_mpiap_nm: p.d_entry_to_mpiap,
                d_mpiap_thr_nm: p.d_mpiap_to_thr,
                classes: p
                    .classes
                    .iter()
                    .map(|c| {
                        let [e, m, t] = c.profile.to_knots();
                        ClassDocument {
                            class: c.class.clone(),
                            proportion: c.proportion,
                            v_entry_kt: e,
                            v_mpiap_kt: m,
                            v_thr_kt: t,
                        }
                    })
                    .collect(),
                waypoints: p.waypoints.clone(),
                notes: p.notes.clone(),
            })
            .collect(),
        pair_geometry: s
            .pair_geometry
            .iter()
            .filter(|((a, b), _)| a != b)
            .map(|((a, b), g)| PairDocument {
                path_a: s.paths[*a].entry.clone(),
                path_b: s.paths[*b].entry.clone(),
                d_common1_nm: g.d_common1,
                notes: None,
            })
            .collect(),
    }
}

pub fn to_json_string(s: &AirspaceScenario) -> String {
    serde_json::to_string_pretty(&to_document(s)).expect("scenario document serializes")
}
