//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

#[path = "../../core/tests/common/oracles.rs"]
mod oracles;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use oracles::{difference_points, overlaps, random_convex, ray_distance, ray_hits_hull, sampled_distance};
use polyvo::cones::{cone_directions_polytopic, ConeDirections};
use polyvo::engine::{metrics, run, Outcome, RunResult};
use polyvo::geometry::{intersects, min_distance, world_vertices, Pose};
use polyvo::scenarios::{circle_scenario, obstacle_scenario, random_scenario, turnaround_scenario, RobotSpec};
use polyvo::trajectory::{read_log, write_log, EntityKind};
use polyvo::{Method, Polygon, RobotStatus, Scenario, VelocityCone, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn disjoint_pair(rng: &mut ChaCha8Rng) -> (Polygon, Polygon) {
    loop {
        let center = Vec2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let robot = random_convex(rng, center, 0.8);
        let at = Vec2::from_angle(rng.gen_range(0.0..std::f64::consts::TAU)) * rng.gen_range(0.5..4.0);
        let obstacle = random_convex(rng, at, 0.8);
        if !overlaps(&robot, &obstacle) && sampled_distance(&robot, &obstacle, 0.05) > 1e-3 {
            return (robot, obstacle);
        }
    }
}

fn cone_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut checked, mut mismatches) = (0usize, 0usize);
    for _ in 0..1000 {
        let (robot, obstacle) = disjoint_pair(&mut rng);
        let dirs = cone_directions_polytopic(&robot, &obstacle);
        let ConeDirections::Bounded { left, right } = dirs else {
            mismatches += 100;
            continue;
        };
        let cone = VelocityCone::from_directions(dirs, Vec2::zero());
        let points = difference_points(&obstacle, &robot);
        for _ in 0..100 {
            let v = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            if ray_distance(v, left).min(ray_distance(v, right)) < 1e-6 {
                continue;
            }
            checked += 1;
            if cone.contains(v) != ray_hits_hull(&points, v) {
                mismatches += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        mismatches == 0 && elapsed < Duration::from_secs(30),
        format!("{checked} samples, {mismatches} mismatches, {elapsed:.2?}"),
    )
}

fn distance_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut bad_intersects, mut overlapping) = (0.0f64, 0usize, 0usize);
    for _ in 0..1000 {
        let a = random_convex(&mut rng, Vec2::zero(), 1.0);
        let at = Vec2::from_angle(rng.gen_range(0.0..std::f64::consts::TAU)) * rng.gen_range(0.0..3.0);
        let b = random_convex(&mut rng, at, 1.0);
        let d = min_distance(&a, &b);
        let truth = if overlaps(&a, &b) {
            overlapping += 1;
            0.0
        } else {
            sampled_distance(&a, &b, 1e-3)
        };
        worst = worst.max((d - truth).abs());
        if intersects(&a, &b) != (d == 0.0) || intersects(&a, &b) != (truth == 0.0) {
            bad_intersects += 1;
        }
    }
    let elapsed = start.elapsed();
    check(
        worst <= 2e-3 && bad_intersects == 0 && elapsed < Duration::from_secs(30),
        format!("max error {worst:.2e} m, {overlapping} overlapping pairs, {bad_intersects} intersect mismatches, {elapsed:.2?}"),
    )
}

/// A recorded run kept for the overlap audit.
struct Audited {
    label: String,
    scenario: Scenario,
    result: RunResult<f64>,
}

fn recorded(label: impl Into<String>, scenario: Scenario) -> Audited {
    let result = run(&scenario, true).expect("scenario runs");
    Audited {
        label: label.into(),
        scenario,
        result,
    }
}

fn circle(runs: &mut Vec<Audited>) -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    for m in [Method::VoP, Method::RvoP, Method::HrvoP] {
        let start = Instant::now();
        let a = recorded(format!("circle {m}"), circle_scenario(8).with_method(m));
        let elapsed = start.elapsed();
        let done = a.result.count(Outcome::Completed);
        let hit = a.result.count(Outcome::Collided);
        ok &= done == 8 && hit == 0 && a.result.final_time <= 30.0 + 1e-9 && elapsed < Duration::from_secs(5);
        notes.push(format!("{m} {done}/8 in {:.1} s ({elapsed:.2?})", a.result.final_time));
        runs.push(a);
    }
    check(ok, notes.join(", "))
}

fn obstacles(runs: &mut Vec<Audited>) -> Verdict {
    let a = recorded("obstacles RVO_p", obstacle_scenario().with_method(Method::RvoP));
    let done = a.result.count(Outcome::Completed);
    let hit = a.result.count(Outcome::Collided);
    runs.push(a);
    check(done == 5 && hit == 0, format!("{done}/5 completed, {hit} collided"))
}

fn turnaround(runs: &mut Vec<Audited>) -> Verdict {
    let p = recorded("turnaround VO_p", turnaround_scenario().with_method(Method::VoP));
    let c = recorded("turnaround VO_c", turnaround_scenario().with_method(Method::VoC));
    let (rp, rc) = (&p.result.robots[0], &c.result.robots[0]);
    let shorter = 1.0 - rp.travel_distance / rc.travel_distance;
    let ok = rp.outcome == Outcome::Completed
        && rc.outcome != Outcome::Collided
        && shorter >= 0.10;
    let detail = format!(
        "VO_p {:.2} m ({:?}), VO_c {:.2} m ({:?}), {:.1}% shorter",
        rp.travel_distance,
        rp.outcome,
        rc.travel_distance,
        rc.outcome,
        shorter * 100.0
    );
    runs.push(p);
    runs.push(c);
    check(ok, detail)
}

fn random_runs(method: Method, ratio: f64, seeds: u64) -> Vec<Audited> {
    (0..seeds)
        .into_par_iter()
        .map(|seed| {
            let s = random_scenario(seed, ratio).expect("scenario generates").with_method(method);
            recorded(format!("random {method} ratio {ratio} seed {seed}"), s)
        })
        .collect()
}

fn completion(runs: &[Audited]) -> f64 {
    let results: Vec<RunResult<f64>> = runs.iter().map(|a| a.result.clone()).collect();
    metrics(&results).completion_rate
}

fn benchmark_trend(runs: &mut Vec<Audited>) -> Verdict {
    let start = Instant::now();
    let mut rate = |m: Method| {
        let batch = random_runs(m, 1.2, 20);
        let c = completion(&batch);
        runs.extend(batch);
        c
    };
    let (hp, hc, rp, rc) = (rate(Method::HrvoP), rate(Method::HrvoC), rate(Method::RvoP), rate(Method::RvoC));
    let elapsed = start.elapsed();
    check(
        hp - hc >= 10.0 && rp > rc && elapsed < Duration::from_secs(180),
        format!("HRVO_p {hp:.1}% vs HRVO_c {hc:.1}%, RVO_p {rp:.1}% vs RVO_c {rc:.1}% ({elapsed:.2?})"),
    )
}

fn monotone_trend(runs: &mut Vec<Audited>) -> Verdict {
    let rates: Vec<f64> = [0.6, 1.0, 1.4]
        .iter()
        .map(|&ratio| {
            let batch = random_runs(Method::HrvoP, ratio, 20);
            let c = completion(&batch);
            runs.extend(batch);
            c
        })
        .collect();
    let inversions: Vec<f64> = rates.windows(2).map(|w| w[1] - w[0]).filter(|&d| d > 0.0).collect();
    let ok = inversions.is_empty() || (inversions.len() == 1 && inversions[0] <= 5.0);
    check(ok, format!("HRVO_p completion over ratios 0.6/1.0/1.4: {rates:.1?}"))
}

fn polyvo(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_polyvo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scenario_file(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "scenarios", name].iter().collect()
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().expect("temp dir");
    let out = |name: &str| dir.path().join(name);
    let mut ok = true;
    for name in ["bench-a", "bench-b"] {
        let o = polyvo(&["bench", "--trials", "5", "--seed", "7", "--out", out(name).to_str().unwrap()]);
        ok &= o.status.success();
    }
    let circle = scenario_file("circle.toml");
    for name in ["run-a", "run-b"] {
        let o = polyvo(&["run", circle.to_str().unwrap(), "--out", out(name).to_str().unwrap()]);
        ok &= o.status.success();
    }
    if !ok {
        return Err("a CLI invocation failed".into());
    }
    let table = read(&out("bench-a").join("bench.csv")) == read(&out("bench-b").join("bench.csv"));
    let log = read(&out("run-a").join("trajectory.jsonl")) == read(&out("run-b").join("trajectory.jsonl"));
    check(table && log, format!("bench tables identical: {table}, run logs identical: {log}"))
}

/// Replays each run through the JSONL log and looks for a tick where two
/// robots not marked stopped overlap.
fn audit(runs: &[Audited]) -> Verdict {
    let violations: Vec<String> = runs
        .par_iter()
        .flat_map_iter(|a| {
            let mut buf = Vec::new();
            write_log(&mut buf, &a.scenario, &a.result).expect("log writes");
            let log = read_log(buf.as_slice()).expect("log reads");
            let mut found = Vec::new();
            for (tick, _) in log.ticks.iter().enumerate() {
                let robots: Vec<_> = log
                    .records(tick, EntityKind::Robot)
                    .filter(|r| r.status != Some(RobotStatus::Stopped))
                    .map(|r| {
                        let body = &log.header.robots[r.id].body;
                        (r.id, world_vertices(body, &Pose::new(r.position, r.heading)))
                    })
                    .collect();
                for (i, (ia, sa)) in robots.iter().enumerate() {
                    for (ib, sb) in &robots[i + 1..] {
                        if overlaps(sa, sb) {
                            found.push(format!("{} tick {tick} robots {ia},{ib}", a.label));
                        }
                    }
                }
            }
            found
        })
        .collect();
    let detail = format!("{} runs audited, {} violations", runs.len(), violations.len());
    match violations.first() {
        None => Ok(detail),
        Some(first) => Err(format!("{detail}, first: {first}")),
    }
}

fn straight_run() -> Verdict {
    let mut s = Scenario::empty();
    s.name = "straight".into();
    s.robots.push(RobotSpec::new(
        Polygon::rectangle(0.8, 0.5),
        Vec2::new(1.0, 5.0),
        Vec2::new(9.0, 5.0),
    ));
    let r = run(&s, false).expect("runs");
    let o = &r.robots[0];
    let t = o.finish_time.unwrap_or(f64::INFINITY);
    check(
        o.outcome == Outcome::Completed && (t - 8.0 / 1.5).abs() <= 0.5,
        format!("{:?} at {t:.2} s, {:.2} m travelled", o.outcome, o.travel_distance),
    )
}

fn main() {
    let mut runs = Vec::new();
    let verdicts: Vec<(u32, &str, Verdict)> = vec![
        (1, "cone membership matches Minkowski ray cast", cone_oracle()),
        (2, "distance matches boundary sampling", distance_oracle()),
        (3, "circle of 8 under polygonal methods", circle(&mut runs)),
        (4, "obstacle field under RVO_p", obstacles(&mut runs)),
        (5, "turnaround corridor path length", turnaround(&mut runs)),
        (6, "polygonal beats circular at ratio 1.2", benchmark_trend(&mut runs)),
        (7, "HRVO_p completion falls with size", monotone_trend(&mut runs)),
        (8, "CLI output is deterministic", determinism()),
        (9, "no unclassified overlaps in logs", audit(&runs)),
        (10, "single robot 8 m straight run", straight_run()),
    ];
    let mut failed = Vec::new();
    for (n, name, verdict) in &verdicts {
        match verdict {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(detail) => {
                println!("criterion {n:>2} FAIL  {name}: {detail}");
                failed.push(*n);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
