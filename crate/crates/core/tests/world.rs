use proptest::prelude::*;
use swarm_evade::metrics::{distance_stats, extract_event_times, render_csv, RunRecord};
use swarm_evade::sim::config::{AgentSpec, InterfererPolicy, InterfererSpec, Scenario};
use swarm_evade::sim::World;
use swarm_evade::{AgentId, Mode, Vec3};

fn scenario(offsets: &[(f64, f64)], start: (f64, f64), drop: f64, seed: u64) -> Scenario {
    let agents = offsets
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| AgentSpec {
            id: AgentId::new(format!("a{i}")),
            position: Vec3::new(x, y, 0.0),
            velocity: None,
        })
        .collect();
    let mut sc = Scenario::new(agents, 20.0);
    sc.interferers.push(InterfererSpec {
        id: AgentId::from("r"),
        position: Vec3::new(start.0, start.1, 0.0),
        policy: InterfererPolicy::pursuit(),
    });
    sc.net.drop_probability = drop;
    sc.seed = seed;
    sc
}

/// Agents on a jittered grid so no two start closer than 1.5 m.
fn layout() -> impl Strategy<Value = Vec<(f64, f64)>> {
    (2usize..7).prop_flat_map(|n| {
        prop::collection::vec((-0.5..0.5f64, -0.5..0.5f64), n).prop_map(|j| {
            j.iter()
                .enumerate()
                .map(|(i, (dx, dy))| ((i % 3) as f64 * 2.5 + dx, (i / 3) as f64 * 2.5 + dy))
                .collect()
        })
    })
}

fn start() -> impl Strategy<Value = (f64, f64)> {
    (0.0..std::f64::consts::TAU).prop_map(|a| (15.0 * a.cos(), 15.0 * a.sin()))
}

fn run(sc: Scenario) -> RunRecord {
    let mut w = World::new(sc).unwrap();
    w.run();
    w.into_record()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn listing_order_does_not_matter(pts in layout(), s in start(), drop in 0.0..0.5f64, seed in any::<u64>()) {
        let sc = scenario(&pts, s, drop, seed);
        let mut rev = sc.clone();
        rev.agents.reverse();
        prop_assert_eq!(render_csv(&run(sc)), render_csv(&run(rev)));
    }

    #[test]
    fn frozen_agents_never_move(pts in layout(), s in start()) {
        let mut sc = scenario(&pts, s, 0.0, 1);
        sc.frozen = true;
        let rec = run(sc);
        let first: Vec<_> = rec.frames[0].agents.iter().map(|a| a.position).collect();
        for f in &rec.frames {
            for (a, p) in f.agents.iter().zip(&first) {
                prop_assert_eq!(a.position, *p);
            }
        }
    }

    #[test]
    fn speeds_stay_within_limits(pts in layout(), s in start(), evade in any::<bool>()) {
        let mut sc = scenario(&pts, s, 0.0, 3);
        sc.evasion_enabled = evade;
        let v_max = sc.params.v_max;
        let r_max = sc.interferer_max_speed(&sc.interferers[0]);
        prop_assert!((r_max - 1.8).abs() < 1e-12);
        let rec = run(sc);
        for w in rec.frames.windows(2) {
            for (a, b) in w[0].agents.iter().zip(&w[1].agents) {
                prop_assert!(a.position.distance(b.position) / rec.dt <= v_max + 1e-9);
            }
            for (a, b) in w[0].interferers.iter().zip(&w[1].interferers) {
                prop_assert!(a.1.distance(b.1) / rec.dt <= r_max + 1e-9);
            }
        }
    }

    #[test]
    fn baseline_never_escapes(pts in layout(), s in start()) {
        let mut sc = scenario(&pts, s, 0.0, 1);
        sc.evasion_enabled = false;
        let rec = run(sc);
        prop_assert!(rec.frames.iter().all(|f| f.agents.iter().all(|a| a.mode == Mode::Normal)));
    }

    #[test]
    fn event_times_are_ordered(pts in layout(), s in start(), drop in 0.0..0.5f64, seed in any::<u64>()) {
        let sc = scenario(&pts, s, drop, seed);
        let d_e1 = sc.params.d_e1;
        let t = extract_event_times(&run(sc), d_e1);
        prop_assert!(t.is_ordered(), "{}", t);
    }

    #[test]
    fn distance_stats_match_brute_force(pts in layout(), s in start()) {
        let rec = run(scenario(&pts, s, 0.0, 1));
        for (f, d) in rec.frames.iter().zip(distance_stats(&rec)) {
            let p: Vec<_> = f.agents.iter().map(|a| a.position).collect();
            let mut pair = Vec::new();
            for i in 0..p.len() {
                for j in i + 1..p.len() {
                    pair.push(p[i].distance(p[j]));
                }
            }
            let s = d.agents.unwrap();
            let mean = pair.iter().sum::<f64>() / pair.len() as f64;
            prop_assert!(s.min <= s.mean && s.mean <= s.max);
            prop_assert!((s.min - pair.iter().copied().fold(f64::INFINITY, f64::min)).abs() < 1e-12);
            prop_assert!((s.max - pair.iter().copied().fold(0.0, f64::max)).abs() < 1e-12);
            prop_assert!((s.mean - mean).abs() < 1e-12);
            let r = f.interferers[0].1;
            let near = p.iter().map(|q| q.distance(r)).fold(f64::INFINITY, f64::min);
            prop_assert!((d.intruder.unwrap().min - near).abs() < 1e-12);
        }
    }
}

#[test]
fn csv_round_trips() {
    let rec = run(scenario(&[(0.0, 0.0), (-2.9, 1.5), (-2.9, -1.5)], (-15.0, 1.0), 0.3, 9));
    let text = render_csv(&rec);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("record.csv");
    swarm_evade::metrics::export_csv(&rec, &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), text);

    let mut rd = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = rd.headers().unwrap().iter().map(str::to_owned).collect();
    assert_eq!(header.join(","), swarm_evade::metrics::CSV_HEADER);
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), rec.frames.len() * 3);
    let stats = distance_stats(&rec);
    let close = |s: &str, v: f64| {
        let x: f64 = s.parse().unwrap();
        assert!((x - v).abs() <= 1e-6 * v.abs().max(1.0), "{s} vs {v}");
    };
    for (k, row) in rows.iter().enumerate() {
        let (f, d) = (&rec.frames[k / 3], &stats[k / 3]);
        let a = &f.agents[k % 3];
        close(&row[0], f.time);
        assert_eq!(&row[1], rec.agent_ids[k % 3].as_str());
        close(&row[2], a.position.x);
        close(&row[3], a.position.y);
        close(&row[4], a.position.z);
        assert_eq!(&row[5], a.mode.as_str());
        close(&row[6], d.agents.unwrap().min);
        close(&row[7], d.agents.unwrap().mean);
        close(&row[8], d.intruder.unwrap().min);
        close(&row[9], d.intruder.unwrap().mean);
    }
}
