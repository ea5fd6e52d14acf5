//! One PASS/FAIL line per acceptance criterion; fails if any criterion does.

use std::time::{Duration, Instant};

use petgraph::graph::UnGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swarm_evade::forces::{cohesion_profile, escape_profile, separation_profile};
use swarm_evade::metrics::{distance_stats, extract_event_times, render_csv, EventTimes, RunRecord};
use swarm_evade::sim::{Scenario, World};
use swarm_evade::study::{calibrate, shock_study, LatticeConfig, ShockConfig};
use swarm_evade::{Mode, SwarmParams, Vec3};

const EVASION: &str = include_str!("../../../scenarios/evasion.json");
const BASELINE: &str = include_str!("../../../scenarios/baseline.json");
const REACTION: &str = include_str!("../../../scenarios/reaction.json");

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn run(sc: Scenario) -> RunRecord {
    let mut w = World::new(sc).unwrap();
    w.run();
    w.into_record()
}

fn load(text: &str) -> Scenario {
    Scenario::from_json(text).unwrap()
}

fn random_params(rng: &mut ChaCha8Rng) -> SwarmParams<f64> {
    let d_min = rng.random_range(0.0..1.0);
    let d_max = rng.random_range(1.0..6.0);
    let d_e1 = rng.random_range(2.0..10.0);
    SwarmParams {
        l: rng.random_range(0.1..1.0),
        l_min: rng.random_range(0.1..0.5),
        d_min,
        d_c: d_min + rng.random_range(0.5..3.0),
        k_1c: rng.random_range(0.0..2.0),
        k_2c: rng.random_range(0.0..2.0),
        k_3c: rng.random_range(0.1..3.0),
        d_max,
        d_s: d_max * rng.random_range(0.1..0.9),
        k_1s: rng.random_range(0.0..2.0),
        k_2s: rng.random_range(0.0..50.0),
        d_e1,
        d_e2: d_e1 + rng.random_range(0.0..5.0),
        k_e: rng.random_range(0.0..50.0),
        ..SwarmParams::default()
    }
}

fn profile_continuity() -> Outcome {
    const H: f64 = 1e-7;
    let limits = |f: &dyn Fn(f64) -> f64, b: f64| (2.0 * f(b - H) - f(b - 2.0 * H), 2.0 * f(b + H) - f(b + 2.0 * H));
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut monotone = true;
    for _ in 0..100 {
        let p = random_params(&mut rng);
        let c = |d: f64| cohesion_profile(d, &p);
        let s = |d: f64| separation_profile(d, &p);
        let e = |d: f64| escape_profile(d, &p);
        let cases: [(&dyn Fn(f64) -> f64, f64); 7] = [
            (&c, p.l + p.d_min),
            (&c, p.l + p.d_c),
            (&s, p.l + p.l_min),
            (&s, p.l + p.d_s),
            (&s, p.l + p.d_max),
            (&e, p.l + p.l_min),
            (&e, p.l + p.d_e2),
        ];
        for (f, b) in cases {
            let (l, r) = limits(f, b);
            worst = worst.max((l - r).abs());
        }
        let top = p.l + p.d_c.max(p.d_max).max(p.d_e2) + 5.0;
        let grid: Vec<f64> = (0..1000).map(|i| top * i as f64 / 999.0).collect();
        for w in grid.windows(2) {
            monotone &= c(w[1]) >= c(w[0]) && s(w[1]) <= s(w[0]) && e(w[1]) <= e(w[0]);
        }
    }
    outcome(worst < 1e-9 && monotone, format!("max jump {worst:.2e}, monotone {monotone}"))
}

fn lattice_calibration() -> Outcome {
    let r = calibrate(&LatticeConfig::default(), 2.89, 0.25).unwrap();
    let s = r.spacing;
    let pass = r.pass && s.min >= 2.3 && s.max <= 3.7;
    outcome(
        pass,
        format!("settled {}, spacing mean {:.3} min {:.3} max {:.3}", r.settled, s.mean, s.min, s.max),
    )
}

/// Hop eccentricity from an independent BFS over pairwise distances.
fn oracle_eccentricity(pos: &[Vec3<f64>], start: usize, range: f64) -> Option<usize> {
    let mut g = UnGraph::<(), ()>::new_undirected();
    let n: Vec<_> = pos.iter().map(|_| g.add_node(())).collect();
    for i in 0..pos.len() {
        for j in i + 1..pos.len() {
            if pos[i].distance(pos[j]) <= range {
                g.add_edge(n[i], n[j], ());
            }
        }
    }
    let mut bfs = petgraph::visit::Bfs::new(&g, n[start]);
    let mut hops = vec![usize::MAX; pos.len()];
    hops[start] = 0;
    while let Some(u) = bfs.next(&g) {
        for v in g.neighbors(u) {
            if hops[v.index()] == usize::MAX {
                hops[v.index()] = hops[u.index()] + 1;
            }
        }
    }
    hops.iter().all(|&h| h != usize::MAX).then(|| *hops.iter().max().unwrap())
}

fn shock_propagation() -> Outcome {
    let r = shock_study(&ShockConfig::default()).unwrap();
    let pos: Vec<Vec3<f64>> = r.lattice.positions.iter().map(|p| p.1).collect();
    let start = r.lattice.positions.iter().position(|p| p.0 == r.detector).unwrap();
    let ecc = oracle_eccentricity(&pos, start, 5.0);
    let presence = r.presence_steps;
    let clear = r.clear_steps;
    let pass = ecc == Some(r.eccentricity)
        && presence == Some(r.eccentricity as u64)
        && (4..=6).contains(&r.eccentricity)
        && clear.zip(presence).is_some_and(|(c, p)| c.abs_diff(p) <= 1);
    outcome(
        pass,
        format!("eccentricity {} (oracle {ecc:?}), presence {presence:?} steps, clear {clear:?} steps", r.eccentricity),
    )
}

fn centroid(rec: &RunRecord, k: usize) -> Vec3<f64> {
    let a = &rec.frames[k].agents;
    a.iter().map(|s| s.position).sum::<Vec3<f64>>() / a.len() as f64
}

fn frame_at(rec: &RunRecord, t: f64) -> usize {
    ((t / rec.dt).round() as usize).min(rec.frames.len() - 1)
}

fn min_intruder(rec: &RunRecord) -> Vec<(f64, f64)> {
    distance_stats(rec)
        .iter()
        .filter_map(|d| Some((d.time, d.intruder?.min)))
        .collect()
}

fn no_evasion_baseline() -> Outcome {
    let sc = load(BASELINE);
    let d_e1 = sc.params.d_e1;
    let rec = run(sc);
    let Some(t_s) = extract_event_times(&rec, d_e1).t_s else {
        return outcome(false, "interferer never came within d_E1".into());
    };
    let (a, b) = (frame_at(&rec, t_s), frame_at(&rec, t_s + 60.0));
    if rec.frames[b].time < t_s + 60.0 - 1e-9 {
        return outcome(false, "run too short".into());
    }
    let shift = centroid(&rec, a).distance(centroid(&rec, b));
    // settled: the last half of the observation window
    let tail: Vec<f64> = min_intruder(&rec)
        .into_iter()
        .filter(|(t, _)| *t >= t_s + 30.0 && *t <= t_s + 60.0)
        .map(|(_, d)| d)
        .collect();
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().copied().fold(0.0, f64::max);
    outcome(
        shift < 5.0 && lo >= 2.0 && hi <= 4.0,
        format!("encounter {t_s:.1} s, centroid shift {shift:.2} m, settled min distance [{lo:.2}, {hi:.2}] m"),
    )
}

fn evasion_run() -> Outcome {
    let sc = load(EVASION);
    let (d_e1, stop) = (sc.params.d_e1, sc.interferers[0].policy.stop_time.unwrap());
    let rec = run(sc);
    let Some(t_e) = extract_event_times(&rec, d_e1).t_e else {
        return outcome(false, "swarm never escaped".into());
    };
    let series = min_intruder(&rec);
    let after: Vec<f64> = series.iter().filter(|(t, _)| *t >= t_e + 10.0 && *t < stop).map(|p| p.1).collect();
    let held = after.iter().copied().fold(f64::INFINITY, f64::min);
    let last = series.last().unwrap().1;
    let inter = distance_stats(&rec)
        .iter()
        .filter_map(|d| d.agents.map(|s| s.min))
        .fold(f64::INFINITY, f64::min);
    outcome(
        !after.is_empty() && held > 5.0 && last > d_e1 && inter > 2.0,
        format!("t_e {t_e:.1} s, min after transient {held:.2} m, final {last:.2} m, min inter-agent {inter:.2} m"),
    )
}

fn diameter_hops(rec: &RunRecord, t: f64, range: f64) -> usize {
    let pos: Vec<Vec3<f64>> = rec.frames[frame_at(rec, t)].agents.iter().map(|a| a.position).collect();
    (0..pos.len())
        .map(|i| oracle_eccentricity(&pos, i, range).unwrap_or(usize::MAX))
        .max()
        .unwrap()
}

fn reaction() -> Outcome {
    let sc = load(REACTION);
    let (d_e1, dt, latency, range) = (sc.params.d_e1, sc.dt, sc.net.hop_latency, sc.net.comm_range);
    let mut base = sc.clone();
    base.evasion_enabled = false;
    let ev = run(sc);
    let te: EventTimes = extract_event_times(&ev, d_e1);
    let tb = extract_event_times(&run(base), d_e1);
    let (Some(t_ed), Some(t_ds), Some(t_d)) = (te.t_ed(), tb.t_ds(), te.t_d) else {
        return outcome(false, format!("evasion {te}; baseline {tb}"));
    };
    let diam = diameter_hops(&ev, t_d, range);
    let bound = (diam as f64) * latency as f64 * dt + 2.0 * dt;
    let ratio = if t_ed > 0.0 { t_ds / t_ed } else { f64::INFINITY };
    outcome(
        t_ed <= bound + 1e-9 && ratio >= 10.0,
        format!("t_ed {t_ed:.3} s (bound {bound:.3} s, diameter {diam}), t_ds {t_ds:.3} s, ratio {ratio:.1}"),
    )
}

/// One lossy trial on the FOV-limited geometry; returns the recovery time
/// and whether any agent learnt of the interferer only by relay.
fn robustness_trial(seed: u64) -> Result<(f64, bool), String> {
    let mut sc = load(REACTION);
    // leave mid-engagement, while every agent holds stored origins
    let leave = 12.0;
    sc.seed = seed;
    sc.net.seed = seed;
    sc.net.drop_probability = 0.3;
    sc.interferers[0].policy.stop_time = None;
    sc.interferers[0].policy.remove_time = Some(leave);
    sc.duration_s = leave + 10.0;
    let mut w = World::new(sc).unwrap();
    let mut reached = vec![false; w.agents().len()];
    let mut relayed = false;
    let mut quiet_at = None;
    while !w.is_finished() {
        w.step();
        let present = w.interferers().iter().any(|r| !r.removed);
        if present {
            for (seen, a) in reached.iter_mut().zip(w.agents()) {
                *seen |= a.mode() != Mode::Normal;
            }
            relayed |= w.agents().iter().any(|a| a.mode() == Mode::Passive);
        } else if quiet_at.is_none()
            && w
                .agents()
                .iter()
                .all(|a| a.mode() == Mode::Normal && a.protocol.active_origins().is_empty())
        {
            quiet_at = Some(w.time() - leave);
        }
    }
    if !reached.iter().all(|&r| r) {
        return Err(format!("seed {seed}: not every agent escaped"));
    }
    quiet_at
        .map(|t| (t, relayed))
        .ok_or_else(|| format!("seed {seed}: not back to Normal within 10 s"))
}

fn protocol_robustness() -> Outcome {
    let mut failures = Vec::new();
    let mut slowest: f64 = 0.0;
    let mut relayed = 0;
    for seed in 0..50 {
        match robustness_trial(seed) {
            Ok((t, r)) => {
                slowest = slowest.max(t);
                relayed += usize::from(r);
            }
            Err(e) => failures.push(e),
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{} failures over 50 trials ({relayed} with relayed alerts), slowest recovery {slowest:.1} s {failures:?}",
            failures.len()
        ),
    )
}

fn determinism() -> Outcome {
    let mut lossy = load(EVASION);
    lossy.net.drop_probability = 0.3;
    lossy.sensing.detection_probability = 0.7;
    let cases = [load(EVASION), load(BASELINE), load(REACTION), lossy];
    let dir = tempfile::tempdir().unwrap();
    let mut same = true;
    for (i, sc) in cases.iter().enumerate() {
        let mut bytes = Vec::new();
        for k in 0..2 {
            let path = dir.path().join(format!("{i}-{k}.csv"));
            swarm_evade::metrics::export_csv(&run(sc.clone()), &path).unwrap();
            bytes.push(std::fs::read(&path).unwrap());
        }
        same &= bytes[0] == bytes[1] && bytes[0] == render_csv(&run(sc.clone())).into_bytes();
    }
    outcome(same, format!("{} scenarios byte-identical: {same}", cases.len()))
}

#[test]
fn acceptance() {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check, Option<u64>); 8] = [
        ("profile continuity", profile_continuity, Some(5)),
        ("lattice calibration", lattice_calibration, Some(60)),
        ("shock propagation", shock_propagation, Some(10)),
        ("no-evasion baseline", no_evasion_baseline, None),
        ("evasion run", evasion_run, Some(60)),
        ("reaction speed", reaction, None),
        ("protocol robustness", protocol_robustness, None),
        ("determinism", determinism, None),
    ];
    let mut failed = Vec::new();
    for (name, check, limit) in criteria {
        let t0 = Instant::now();
        let mut o = check();
        let took = t0.elapsed();
        if let Some(s) = limit {
            if took > Duration::from_secs(s) {
                o.pass = false;
                o.detail.push_str(&format!(", over the {s} s budget"));
            }
        }
        println!("{} {name}: {} [{:.2} s]", if o.pass { "PASS" } else { "FAIL" }, o.detail, took.as_secs_f64());
        if !o.pass {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
