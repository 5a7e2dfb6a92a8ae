//! Acceptance checks, one line per criterion. Runs as a plain binary so the
//! report is always printed.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tma_capacity::capacity::{extended_path_sum, lambda_display, sorted_path_times};
use tma_capacity::occupancy_sim::{simulate, SimConfig};
use tma_capacity::pairwise::{solve_with, SeparationMinima, SolverOptions};
use tma_capacity::scenario::load_scenario_file;
use tma_capacity::sensitivity::{run_sweep, Regime, SweepRow, SweepSpec};
use tma_capacity::{capacity, AirspaceScenario};

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: u32, title: &str, ok: bool, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!("[{}] {id}. {title}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

struct Reference {
    rwy: &'static str,
    d_temp: f64,
    t_bar: f64,
    lambda: f64,
    d_temp_ends: (f64, f64),
    t_58_ends: (f64, f64),
    t_33_ends: (f64, f64),
}

const REFERENCE: [Reference; 2] = [
    Reference {
        rwy: "07",
        d_temp: 28.51,
        t_bar: 3.06,
        lambda: 9.3,
        d_temp_ends: (31.42, 26.1),
        t_58_ends: (3.18, 2.94),
        t_33_ends: (1.42, 1.31),
    },
    Reference {
        rwy: "25",
        d_temp: 21.47,
        t_bar: 3.10,
        lambda: 6.9,
        d_temp_ends: (23.57, 19.72),
        t_58_ends: (3.22, 3.00),
        t_33_ends: (1.25, 1.21),
    },
];

fn bundled(rwy: &str) -> AirspaceScenario {
    load_scenario_file(scenario_path(&format!("jeju_rwy{rwy}.json"))).expect("bundled scenario loads")
}

fn within(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want.abs()
}

fn criterion_1(r: &mut Report) {
    let a = lambda_display(28.51 / 3.06);
    let b = lambda_display(21.47 / 3.10);
    let mut ok = a == "9.3" && b == "6.9";
    for p in &REFERENCE {
        let rep = capacity(&bundled(p.rwy)).unwrap();
        ok &= rep.lambda == rep.d_temp / rep.t_bar_thr;
    }
    r.line(1, "capacity arithmetic", ok, format!("28.51/3.06 -> {a}, 21.47/3.10 -> {b}"));
}

fn endpoint(rows: &[SweepRow], regime: Regime, scale: f64) -> &SweepRow {
    rows.iter()
        .find(|x| x.regime == regime && (x.speed_scale - scale).abs() < 1e-12)
        .expect("sweep row present")
}

fn criterion_2(r: &mut Report) -> Vec<(String, Vec<SweepRow>)> {
    let spec = SweepSpec::default();
    let mut sweeps = Vec::new();
    let mut ok = true;
    let mut detail = Vec::new();
    let (r58, r33) = (Regime::new(5.0, 8.0), Regime::new(3.0, 3.0));
    for p in &REFERENCE {
        let s = bundled(p.rwy);
        let rep = capacity(&s).unwrap();
        let start = Instant::now();
        let rows = run_sweep(&s, &spec).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let checks = [
            ("D_temp", rep.d_temp, p.d_temp),
            ("T_thr", rep.t_bar_thr, p.t_bar),
            ("lambda", rep.lambda, p.lambda),
            ("D_temp@-10%", endpoint(&rows, r58, -0.1).d_temp.unwrap(), p.d_temp_ends.0),
            ("D_temp@+10%", endpoint(&rows, r58, 0.1).d_temp.unwrap(), p.d_temp_ends.1),
            ("T(5,8)@-10%", endpoint(&rows, r58, -0.1).t_bar_thr.unwrap(), p.t_58_ends.0),
            ("T(5,8)@+10%", endpoint(&rows, r58, 0.1).t_bar_thr.unwrap(), p.t_58_ends.1),
            ("T(3,3)@-10%", endpoint(&rows, r33, -0.1).t_bar_thr.unwrap(), p.t_33_ends.0),
            ("T(3,3)@+10%", endpoint(&rows, r33, 0.1).t_bar_thr.unwrap(), p.t_33_ends.1),
        ];
        let mut worst = ("", 0.0f64);
        for (name, got, want) in checks {
            let dev = (got - want) / want;
            if dev.abs() > worst.1.abs() {
                worst = (name, dev);
            }
            if !within(got, want, 0.10) {
                ok = false;
                detail.push(format!("RWY{} {name} {got:.3} vs {want} ({:+.1}%)", p.rwy, 100.0 * dev));
            }
        }
        ok &= secs < 10.0;
        detail.push(format!(
            "RWY{} D {:.2} T {:.2} l {:.2}, worst {} {:+.1}%, sweep {secs:.1}s",
            p.rwy,
            rep.d_temp,
            rep.t_bar_thr,
            rep.lambda,
            worst.0,
            100.0 * worst.1
        ));
        sweeps.push((p.rwy.to_string(), rows));
    }
    r.line(2, "regression against reference values (+/-10%)", ok, detail.join("; "));
    sweeps
}

fn criteria_3_4(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut eq_fail = 0;
    let mut safe_fail = 0;
    let mut minimal_fail = 0;
    let n = 200;
    for _ in 0..n {
        let c = random_case(&mut rng);
        let sol = match solve_with(&c.combination(), SeparationMinima::new(c.s, c.s_thr), &SolverOptions::default()) {
            Ok(s) => s,
            Err(_) => {
                eq_fail += 1;
                safe_fail += 1;
                continue;
            }
        };
        let run = OracleRun::new(&c, sol.t0_star + 0.05);
        let oracle = ceil_to_grid(run.required_t0(c.s, c.s_thr), 1e-4);
        let err = (sol.t0_star - oracle).abs();
        worst = worst.max(err);
        if err > 2e-3 {
            eq_fail += 1;
        }
        let (min_gap, end_gap) = run.replay(sol.t0_star);
        if min_gap < c.s - 1e-4 || end_gap < c.s_thr - 1e-4 {
            safe_fail += 1;
        }
        let (min_gap, end_gap) = run.replay(sol.t0_star - 0.01);
        if min_gap >= c.s && end_gap >= c.s_thr {
            minimal_fail += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    r.line(
        3,
        "solver vs grid oracle",
        eq_fail == 0 && secs < 60.0,
        format!("{}/{n} within 2e-3 min, worst {worst:.2e} min, {secs:.1}s", n - eq_fail),
    );
    r.line(
        4,
        "safety replay and minimality",
        safe_fail == 0 && minimal_fail == 0,
        format!("{safe_fail} unsafe, {minimal_fail} not minimal at t0*-0.01 of {n}"),
    );
}

fn criterion_5(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let s = random_scenario(&mut rng, 6, 3);
        let rows = sorted_path_times(&s).unwrap();
        let pairs: Vec<(f64, f64)> = rows.iter().map(|x| (x.proportion, x.mean_time_min)).collect();
        let plain: f64 = pairs.iter().map(|(a, b)| a * b).sum();
        worst = worst.max((extended_path_sum(&pairs) - plain).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    r.line(
        5,
        "telescoping identity",
        worst <= 1e-9 && secs < 5.0,
        format!("1000 scenarios, max |double sum - weighted sum| {worst:.1e} min, {secs:.2}s"),
    );
}

fn criterion_6(r: &mut Report) {
    let start = Instant::now();
    let mut scenarios: Vec<(String, AirspaceScenario)> =
        REFERENCE.iter().map(|p| (format!("RWY{}", p.rwy), bundled(p.rwy))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in 0..20 {
        scenarios.push((format!("random{k}"), random_scenario(&mut rng, 4, 2)));
    }
    let cfg = SimConfig {
        n_aircraft: 100_000,
        ..SimConfig::default()
    };
    let mut worst = (String::new(), 0.0f64);
    for (name, s) in &scenarios {
        let rep = capacity(s).unwrap();
        let sim = simulate(s, &rep.pair_table, &cfg).unwrap();
        let rel = (sim.time_avg_occupancy - rep.lambda) / rep.lambda;
        if rel.abs() > worst.1.abs() {
            worst = (name.clone(), rel);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    r.line(
        6,
        "simulated occupancy vs lambda",
        worst.1.abs() <= 0.02 && secs < 30.0,
        format!("22 scenarios, n=1e5, worst {} {:+.2}%, {secs:.1}s", worst.0, 100.0 * worst.1),
    );
}

fn criterion_7(r: &mut Report, sweeps: &[(String, Vec<SweepRow>)]) {
    let spec = SweepSpec::default();
    let start = Instant::now();
    let mut spread = 0.0f64;
    let mut order_fail = 0;
    for (_, rows) in sweeps {
        for &f in &spec.speed_scales {
            let at: Vec<&SweepRow> = rows.iter().filter(|x| (x.speed_scale - f).abs() < 1e-12).collect();
            let d: Vec<f64> = at.iter().map(|x| x.d_temp.unwrap()).collect();
            spread = spread.max(d.iter().cloned().fold(f64::MIN, f64::max) - d.iter().cloned().fold(f64::MAX, f64::min));
            for a in &at {
                for b in &at {
                    if a.regime.s_tma <= b.regime.s_tma && a.regime.s_thr <= b.regime.s_thr {
                        let (ta, tb) = (a.t_bar_thr.unwrap(), b.t_bar_thr.unwrap());
                        let (la, lb) = (a.lambda.unwrap(), b.lambda.unwrap());
                        // Both solves stop within the 1e-6 min bisection bracket.
                        if tb < ta - 2e-6 || lb > la * (1.0 + 1e-6) {
                            order_fail += 1;
                        }
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    r.line(
        7,
        "sensitivity structure",
        spread <= 1e-12 && order_fail == 0,
        format!("D_temp spread {spread:.1e} min, {order_fail} ordering violations, {secs:.2}s"),
    );
}

fn criterion_8(r: &mut Report) {
    let bin = env!("CARGO_BIN_EXE_tma-cap");
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for p in &REFERENCE {
        let s = scenario_path(&format!("jeju_rwy{}.json", p.rwy));
        let s = s.to_str().unwrap();
        let cases: [(&str, Vec<&str>); 3] = [
            ("capacity", vec!["capacity", s, "--format", "csv"]),
            ("pairs", vec!["pairs", s]),
            ("sweep", vec!["sweep", s, "--regimes", "5:8,5:5,3:5,3:3"]),
        ];
        for (kind, args) in cases {
            let file = format!("{kind}_rwy{}.csv", p.rwy);
            let first = Command::new(bin).args(&args).output().unwrap();
            let second = Command::new(bin).args(&args).output().unwrap();
            let want = std::fs::read(golden.join(&file)).unwrap_or_default();
            checked += 1;
            if !first.status.success() || first.stdout != second.stdout || first.stdout != want {
                mismatches.push(file);
            }
        }
    }
    r.line(
        8,
        "deterministic CLI output",
        mismatches.is_empty(),
        format!("{} of {checked} golden files reproduced twice {:?}", checked - mismatches.len(), mismatches),
    );
}

fn main() {
    let mut r = Report { failures: 0 };
    criterion_1(&mut r);
    let sweeps = criterion_2(&mut r);
    criteria_3_4(&mut r);
    criterion_5(&mut r);
    criterion_6(&mut r);
    criterion_7(&mut r, &sweeps);
    criterion_8(&mut r);
    println!("acceptance: {} of 8 criteria failed", r.failures);
    if r.failures > 0 {
        std::process::exit(1);
    }
}
