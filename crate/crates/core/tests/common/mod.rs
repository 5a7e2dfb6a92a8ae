#![allow(dead_code)]

//! Test-side oracles and random fixtures.
//!
//! The trajectory oracle integrates dx/dt = v(x) with RK4 on each aircraft's
//! own path coordinate, where v(x)² is linear in x on each segment. Nothing
//! here calls the library's closed forms.

use std::path::PathBuf;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use tma_capacity::kinematics::PathKinematics;
use tma_capacity::pairwise::PairCombination;
use tma_capacity::scenario::{OrientedGeometry, SpeedProfile};

pub const KT: f64 = 60.0;

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn scenario_path(name: &str) -> PathBuf {
    workspace_root().join("scenarios").join(name)
}

/// One aircraft's decelerating profile on its own path, lengths in NM, speeds NM/min.
#[derive(Debug, Clone, Copy)]
pub struct Profile {
    pub d1: f64,
    pub d2: f64,
    pub v_entry: f64,
    pub v_mpiap: f64,
    pub v_thr: f64,
}

impl Profile {
    /// Speed at offset `x` from the entry; x < 0 continues the approach law upstream.
    pub fn speed(&self, x: f64) -> f64 {
        let sq = if x <= self.d1 {
            self.v_entry * self.v_entry + (self.v_mpiap * self.v_mpiap - self.v_entry * self.v_entry) * x / self.d1
        } else {
            let u = (x - self.d1).min(self.d2);
            self.v_mpiap * self.v_mpiap + (self.v_thr * self.v_thr - self.v_mpiap * self.v_mpiap) * u / self.d2
        };
        sq.sqrt()
    }

    /// Composite Simpson for ∫ dx / v over [a, b], split at the MP_iap kink.
    pub fn time_between(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.time_between(b, a);
        }
        let simpson = |lo: f64, hi: f64| {
            if hi <= lo {
                return 0.0;
            }
            let n = 400;
            let h = (hi - lo) / n as f64;
            let mut s = 1.0 / self.speed(lo) + 1.0 / self.speed(hi);
            for k in 1..n {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                s += w / self.speed(lo + k as f64 * h);
            }
            s * h / 3.0
        };
        if a < self.d1 && b > self.d1 {
            simpson(a, self.d1) + simpson(self.d1, b)
        } else {
            simpson(a, b)
        }
    }

    pub fn flight_time(&self) -> f64 {
        self.time_between(0.0, self.d1 + self.d2)
    }

    pub fn kinematics(&self) -> PathKinematics {
        PathKinematics::new(
            self.d1,
            self.d2,
            &SpeedProfile::new(self.v_entry, self.v_mpiap, self.v_thr),
        )
        .unwrap()
    }
}

/// Positions sampled every `h` minutes.
pub struct Trajectory {
    pub t_start: f64,
    pub h: f64,
    pub x: Vec<f64>,
}

impl Trajectory {
    /// Integrates forwards and backwards from (t_ref, x_ref) to cover [t_start, t_end].
    pub fn integrate(p: &Profile, t_ref: f64, x_ref: f64, t_start: f64, t_end: f64, h: f64) -> Self {
        let f = |x: f64| p.speed(x);
        let rk4 = |x: f64, dt: f64| {
            let k1 = f(x);
            let k2 = f(x + 0.5 * dt * k1);
            let k3 = f(x + 0.5 * dt * k2);
            let k4 = f(x + dt * k3);
            x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        };
        let back = ((t_ref - t_start) / h).ceil().max(0.0) as usize;
        let fwd = ((t_end - t_ref) / h).ceil().max(0.0) as usize;
        let mut before = Vec::with_capacity(back);
        let mut x = x_ref;
        for _ in 0..back {
            x = rk4(x, -h);
            before.push(x);
        }
        before.reverse();
        let mut xs = before;
        xs.push(x_ref);
        let mut x = x_ref;
        for _ in 0..fwd {
            x = rk4(x, h);
            xs.push(x);
        }
        Self {
            t_start: t_ref - back as f64 * h,
            h,
            x: xs,
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        let u = (t - self.t_start) / self.h;
        let k = (u.floor() as isize).clamp(0, self.x.len() as isize - 2) as usize;
        let w = u - k as f64;
        self.x[k] * (1.0 - w) + self.x[k + 1] * w
    }

    /// Time at which the monotone trajectory reaches `x`.
    pub fn time_of(&self, x: f64) -> f64 {
        let k = self.x.partition_point(|v| *v < x).clamp(1, self.x.len() - 1);
        let (a, b) = (self.x[k - 1], self.x[k]);
        let w = if b > a { (x - a) / (b - a) } else { 0.0 };
        self.t_start + (k as f64 - 1.0 + w) * self.h
    }
}

/// A random pair combination with its oracle profiles.
#[derive(Debug, Clone, Copy)]
pub struct OracleCase {
    pub lead: Profile,
    pub trail: Profile,
    /// Entry-to-MP_kl offsets.
    pub lead_mpkl: f64,
    pub trail_mpkl: f64,
    pub common1: f64,
    pub s: f64,
    pub s_thr: f64,
}

impl OracleCase {
    pub fn combination(&self) -> PairCombination {
        PairCombination::new(
            OrientedGeometry {
                d_common1: self.common1,
                d_common2: self.lead.d2,
                lead_entry_to_mpkl: self.lead_mpkl,
                trail_entry_to_mpkl: self.trail_mpkl,
            },
            self.lead.kinematics(),
            self.trail.kinematics(),
        )
        .unwrap()
    }

    fn lead_window(&self) -> f64 {
        self.lead.time_between(self.lead_mpkl, self.lead.d1 + self.lead.d2)
    }
}

pub const ORACLE_STEP: f64 = 1e-3;

/// Oracle trajectories in common-path coordinates, times relative to each aircraft's MP_kl passage.
pub struct OracleRun {
    pub window: f64,
    lead: Trajectory,
    trail: Trajectory,
    lead_mpkl: f64,
    trail_mpkl: f64,
}

impl OracleRun {
    pub fn new(c: &OracleCase, max_t0: f64) -> Self {
        let window = c.lead_window();
        let lead = Trajectory::integrate(&c.lead, 0.0, c.lead_mpkl, 0.0, window + ORACLE_STEP, ORACLE_STEP);
        let upstream = c.s.max(c.s_thr) + 1.0;
        let back = max_t0.max(-c.trail.time_between(c.trail_mpkl, c.trail_mpkl - upstream)) + 0.05;
        let fwd = c.trail.time_between(c.trail_mpkl, c.trail.d1 + c.trail.d2) + 0.05;
        let trail = Trajectory::integrate(&c.trail, 0.0, c.trail_mpkl, -back, fwd, ORACLE_STEP);
        Self {
            window,
            lead,
            trail,
            lead_mpkl: c.lead_mpkl,
            trail_mpkl: c.trail_mpkl,
        }
    }

    fn lead_y(&self, t: f64) -> f64 {
        self.lead.at(t) - self.lead_mpkl
    }

    fn trail_y(&self, s: f64) -> f64 {
        self.trail.at(s) - self.trail_mpkl
    }

    fn trail_time_of(&self, y: f64) -> f64 {
        self.trail.time_of(y + self.trail_mpkl)
    }

    /// Smallest lag keeping the gap ≥ s over the window and ≥ s_thr at its end.
    ///
    /// The trailer replays a fixed trajectory, so inverting its position
    /// gives the lag each instant requires.
    pub fn required_t0(&self, s: f64, s_thr: f64) -> f64 {
        let n = (self.window / ORACLE_STEP).ceil() as usize;
        let mut req = f64::NEG_INFINITY;
        for k in 0..=n {
            let t = (k as f64 * ORACLE_STEP).min(self.window);
            req = req.max(t - self.trail_time_of(self.lead_y(t) - s));
        }
        let end = self.window - self.trail_time_of(self.lead_y(self.window) - s_thr);
        req.max(end)
    }

    /// (min gap over the window, gap at the leader's threshold crossing).
    pub fn replay(&self, t0: f64) -> (f64, f64) {
        let n = (self.window / ORACLE_STEP).ceil() as usize;
        let mut min_gap = f64::INFINITY;
        for k in 0..=n {
            let t = (k as f64 * ORACLE_STEP).min(self.window);
            min_gap = min_gap.min(self.lead_y(t) - self.trail_y(t - t0));
        }
        (min_gap, self.lead_y(self.window) - self.trail_y(self.window - t0))
    }
}

/// Smallest point of a 1e-4 grid at or above `t0`.
pub fn ceil_to_grid(t0: f64, grid: f64) -> f64 {
    (t0 / grid - 1e-9).ceil() * grid
}

fn decelerating_triple(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> (f64, f64, f64) {
    let mut v = [rng.gen_range(lo..hi), rng.gen_range(lo..hi), rng.gen_range(lo..hi)];
    v.sort_by(|a, b| b.total_cmp(a));
    // Keep the profile strictly decelerating.
    if v[0] - v[1] < 1.0 {
        v[0] = v[1] + 1.0;
    }
    if v[1] - v[2] < 1.0 {
        v[2] = v[1] - 1.0;
    }
    (v[0], v[1], v[2])
}

pub fn random_profile_kt(rng: &mut ChaCha8Rng, d1: f64, d2: f64) -> Profile {
    let (e, m, t) = decelerating_triple(rng, 141.0, 399.0);
    Profile {
        d1,
        d2,
        v_entry: e / KT,
        v_mpiap: m / KT,
        v_thr: t / KT,
    }
}

/// Random combination: lengths 5–60 NM, speeds 140–400 kt, S ∈ {3,5}, S_thr ∈ {3,5,8}.
pub fn random_case(rng: &mut ChaCha8Rng) -> OracleCase {
    let d2 = rng.gen_range(5.0..60.0);
    let same_path = rng.gen_bool(0.25);
    let d1_lead: f64 = rng.gen_range(5.0..60.0);
    let d1_trail = if same_path { d1_lead } else { rng.gen_range(5.0..60.0) };
    let common1 = if same_path {
        d1_lead
    } else if rng.gen_bool(0.2) {
        0.0
    } else {
        rng.gen_range(0.0..d1_lead.min(d1_trail))
    };
    let s = [3.0, 5.0][rng.gen_range(0..2)];
    let s_thr = [3.0, 5.0, 8.0][rng.gen_range(0..3)];
    OracleCase {
        lead: random_profile_kt(rng, d1_lead, d2),
        trail: random_profile_kt(rng, d1_trail, d2),
        lead_mpkl: d1_lead - common1,
        trail_mpkl: d1_trail - common1,
        common1,
        s,
        s_thr,
    }
}

/// Random valid scenario document.
pub fn random_scenario_doc(rng: &mut ChaCha8Rng, max_paths: usize, max_classes: usize) -> Value {
    let n_paths = rng.gen_range(1..=max_paths);
    let d2 = rng.gen_range(5.0..20.0);
    let raw: Vec<f64> = (0..n_paths).map(|_| rng.gen_range(0.05..1.0)).collect();
    let shares = normalized(&raw);
    let mut paths = Vec::new();
    let mut d1s: Vec<f64> = Vec::new();
    for (k, share) in shares.iter().enumerate() {
        let d1: f64 = rng.gen_range(10.0..80.0);
        d1s.push(d1);
        let n_classes = rng.gen_range(1..=max_classes);
        let raw: Vec<f64> = (0..n_classes).map(|_| rng.gen_range(0.05..1.0)).collect();
        let mix = normalized(&raw);
        let classes: Vec<Value> = mix
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let (e, m, t) = decelerating_triple(rng, 141.0, 399.0);
                json!({"class": format!("C{i}"), "proportion": p,
                       "v_entry_kt": e, "v_mpiap_kt": m, "v_thr_kt": t})
            })
            .collect();
        paths.push(json!({"entry": format!("P{k}"), "proportion": share,
                          "d_entry_mpiap_nm": d1, "d_mpiap_thr_nm": d2, "classes": classes}));
    }
    let mut pairs = Vec::new();
    for a in 0..n_paths {
        for b in a + 1..n_paths {
            let c = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..d1s[a].min(d1s[b])) };
            pairs.push(json!({"path_a": format!("P{a}"), "path_b": format!("P{b}"), "d_common1_nm": c}));
        }
    }
    json!({"name": "random", "runway": "RR",
           "separation": {"s_tma_nm": 5, "s_thr_nm": 8},
           "paths": paths, "pair_geometry": pairs})
}

/// Shares summing to one, with the rounding residue on the last element.
pub fn normalized(raw: &[f64]) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    let mut out: Vec<f64> = raw.iter().map(|r| r / total).collect();
    let head: f64 = out[..out.len() - 1].iter().sum();
    *out.last_mut().unwrap() = 1.0 - head;
    out
}

pub fn random_scenario(rng: &mut ChaCha8Rng, max_paths: usize, max_classes: usize) -> tma_capacity::AirspaceScenario {
    let doc = random_scenario_doc(rng, max_paths, max_classes);
    tma_capacity::load_scenario(&doc.to_string()).expect("random scenario is valid")
}
