use proptest::prelude::*;
use swarm_evade::forces::*;
use swarm_evade::{AgentId, AgentState, DirectionMemory, ForceModel, Mode, Observation, Params, Vec3};

fn params() -> impl Strategy<Value = Params> {
    (
        (0.1..1.0f64, 0.1..0.5f64, 0.0..1.0f64, 0.5..3.0f64),
        (0.0..2.0f64, 0.0..2.0f64, 0.1..3.0f64),
        (1.0..6.0f64, 0.1..0.9f64, 0.0..2.0f64, 0.0..50.0f64),
        (2.0..10.0f64, 0.0..5.0f64, 0.0..50.0f64),
        (0.0..3.0f64, 0.0..3.0f64, 1.0..2.0f64, 0.0..2.0f64),
    )
        .prop_map(|((l, l_min, d_min, dc_gap), (k_1c, k_2c, k_3c), (d_max, s_frac, k_1s, k_2s), (d_e1, e_gap, k_e), (k_f, k_v, d_f, k_a))| Params {
            l,
            l_min,
            d_min,
            d_c: d_min + dc_gap,
            k_1c,
            k_2c,
            k_3c,
            d_max,
            d_s: d_max * s_frac,
            k_1s,
            k_2s,
            d_e1,
            d_e2: d_e1 + e_gap,
            k_e,
            k_f,
            k_v,
            d_f,
            k_a,
            ..Params::default()
        })
}

const H: f64 = 1e-7;

/// One-sided limits at `b` by linear extrapolation from `b -+ h` and `b -+ 2h`.
fn limits(f: impl Fn(f64) -> f64, b: f64) -> (f64, f64) {
    let left = 2.0 * f(b - H) - f(b - 2.0 * H);
    let right = 2.0 * f(b + H) - f(b + 2.0 * H);
    (left, right)
}

fn boundaries(p: &Params) -> Vec<(&'static str, f64)> {
    vec![
        ("cohesion d_min", p.l + p.d_min),
        ("cohesion d_c", p.l + p.d_c),
        ("separation floor", p.l + p.l_min),
        ("separation d_s", p.l + p.d_s),
        ("separation d_max", p.l + p.d_max),
        ("escape floor", p.l + p.l_min),
        ("escape d_e2", p.l + p.d_e2),
    ]
}

fn profile(name: &str, p: &Params) -> impl Fn(f64) -> f64 {
    let p = *p;
    let which = name.split(' ').next().unwrap().to_owned();
    move |d| match which.as_str() {
        "cohesion" => cohesion_profile(d, &p),
        "separation" => separation_profile(d, &p),
        _ => escape_profile(d, &p),
    }
}

fn nb(rel: Vec3<f64>, vel: Vec3<f64>, id: &str) -> Observation<f64> {
    Observation::neighbor(AgentId::from(id), rel, vel)
}

fn vec3() -> impl Strategy<Value = Vec3<f64>> {
    (-10.0..10.0f64, -10.0..10.0f64, -3.0..3.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn profiles_are_continuous_at_every_branch_boundary(p in params()) {
        for (name, b) in boundaries(&p) {
            if b - 2.0 * H <= 0.0 {
                continue;
            }
            let (l, r) = limits(profile(name, &p), b);
            prop_assert!((l - r).abs() < 1e-9, "{name} at {b}: {l} vs {r}");
        }
    }

    #[test]
    fn profiles_are_monotone(p in params()) {
        let top = p.l + p.d_c.max(p.d_max).max(p.d_e2) + 5.0;
        let grid: Vec<f64> = (0..1000).map(|i| top * i as f64 / 999.0).collect();
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            prop_assert!(cohesion_profile(b, &p) >= cohesion_profile(a, &p));
            prop_assert!(separation_profile(b, &p) <= separation_profile(a, &p));
            prop_assert!(escape_profile(b, &p) <= escape_profile(a, &p));
        }
    }

    #[test]
    fn clamp_floor_is_flat(p in params(), t in 0.0..1.0f64) {
        let floor = p.l + p.l_min;
        let d = floor * t;
        prop_assert_eq!(separation_profile(d, &p), separation_profile(floor, &p));
        prop_assert_eq!(escape_profile(d, &p), escape_profile(floor, &p));
    }

    #[test]
    fn single_neighbour_signs(p in params(), rel in vec3()) {
        let o = [nb(rel, Vec3::zero(), "n")];
        prop_assert!(separation_force(&o, &p).dot(rel) <= 0.0);
        prop_assert!(cohesion_force(&o, &p).dot(rel) >= 0.0);
        let r = [Observation::interferer(AgentId::from("r"), rel, Vec3::zero())];
        prop_assert!(escape_force(&r, &p, &DirectionMemory::new()).dot(rel) <= 0.0);
    }

    #[test]
    fn two_agent_forces_are_antisymmetric(p in params(), rel in vec3()) {
        let a = [nb(rel, Vec3::zero(), "b")];
        let b = [nb(-rel, Vec3::zero(), "a")];
        let fa = cohesion_force(&a, &p) + separation_force(&a, &p);
        let fb = cohesion_force(&b, &p) + separation_force(&b, &p);
        prop_assert!((fa + fb).norm() <= 1e-12 * (1.0 + fa.norm()));
    }

    #[test]
    fn zero_force_update_is_ballistic(p in params(), pos in vec3(), vel in vec3(), dt in 0.01..1.0f64) {
        prop_assert_eq!(desired_position(pos, vel, Vec3::zero(), dt, &p), pos + vel * dt);
    }

    #[test]
    fn total_force_matches_brute_force(
        p in params(),
        others in prop::collection::vec((vec3(), vec3()), 0..5),
        intr in prop::collection::vec(vec3(), 0..2),
    ) {
        let neighbors: Vec<_> = others.iter().enumerate().map(|(i, (r, v))| nb(*r, *v, &format!("n{i}"))).collect();
        let interferers: Vec<_> = intr
            .iter()
            .enumerate()
            .map(|(i, r)| Observation::interferer(AgentId::new(format!("r{i}")), *r, Vec3::zero()))
            .collect();
        let model = ForceModel::new(p).unwrap();
        for mode in [Mode::Normal, Mode::Active, Mode::Passive] {
            let got = model.total_force(mode, &neighbors, &interferers, &DirectionMemory::new());
            let want = oracle::total(&p, mode, &others, &intr);
            prop_assert!((got - want).norm() <= 1e-12 * (1.0 + want.norm()), "{mode:?}: {got:?} vs {want:?}");
        }
    }

    #[test]
    fn single_precision_tracks_double(p in params(), others in prop::collection::vec((vec3(), vec3()), 1..5)) {
        let neighbors: Vec<_> = others.iter().enumerate().map(|(i, (r, v))| nb(*r, *v, &format!("n{i}"))).collect();
        let narrow: Vec<Observation<f32>> = others
            .iter()
            .enumerate()
            .map(|(i, (r, v))| Observation::neighbor(AgentId::new(format!("n{i}")), r.cast(), v.cast()))
            .collect();
        let wide = ForceModel::new(p).unwrap().total_force(Mode::Normal, &neighbors, &[], &DirectionMemory::new());
        let m32 = ForceModel::new(p.cast::<f32>()).unwrap();
        let thin = m32.total_force(Mode::Normal, &narrow, &[], &DirectionMemory::new()).cast::<f64>();
        prop_assert!((wide - thin).norm() <= 1e-4 * (1.0 + wide.norm()));
    }
}

#[test]
fn no_neighbours_no_force() {
    let p = Params::default();
    let mem = DirectionMemory::new();
    for f in [cohesion_force(&[], &p), separation_force(&[], &p), alignment_force(&[], &p), following_force(&[], &p), escape_force(&[], &p, &mem)] {
        assert_eq!(f, Vec3::zero());
    }
    let state = AgentState {
        id: AgentId::from("a"),
        position: Vec3::new(1.0, 2.0, 3.0),
        velocity: Vec3::new(0.5, 0.0, -0.5),
        mode: Mode::Normal,
    };
    let model = ForceModel::new(p).unwrap();
    assert_eq!(
        model.desired_position(&state, Vec3::zero(), 0.1),
        state.position + state.velocity * 0.1
    );
}

/// Straightforward re-derivation of the force law, written independently
/// of the library's branch helpers.
mod oracle {
    use super::*;

    fn gap(d: f64, p: &Params) -> f64 {
        (d - p.l).max(p.l_min)
    }

    fn cohesion(d: f64, p: &Params) -> f64 {
        let g = d - p.l;
        if g <= p.d_min {
            0.0
        } else if g <= p.d_c {
            p.k_1c * (g - p.d_min).powi(2)
        } else {
            p.k_2c * (1.0 + p.k_3c * (g - p.d_c)).ln() + p.k_1c * (p.d_c - p.d_min).powi(2)
        }
    }

    fn separation(d: f64, p: &Params) -> f64 {
        let g = gap(d, p);
        let steep = |x: f64| p.k_2s * (1.0 / x.sqrt() - 1.0 / p.d_max.sqrt());
        if g >= p.d_max {
            0.0
        } else if g > p.d_s {
            p.k_1s * (g - p.d_max).powi(2)
        } else {
            steep(g) - steep(p.d_s) + p.k_1s * (p.d_s - p.d_max).powi(2)
        }
    }

    fn escape(d: f64, p: &Params) -> f64 {
        let g = gap(d, p);
        if g < p.d_e2 {
            p.k_e * (1.0 / g.sqrt() - 1.0 / p.d_e2.sqrt())
        } else {
            0.0
        }
    }

    fn mean(v: &[Vec3<f64>]) -> Vec3<f64> {
        if v.is_empty() {
            Vec3::zero()
        } else {
            v.iter().fold(Vec3::zero(), |a, b| a + *b) / v.len() as f64
        }
    }

    pub fn total(p: &Params, mode: Mode, others: &[(Vec3<f64>, Vec3<f64>)], intr: &[Vec3<f64>]) -> Vec3<f64> {
        let g = if mode == Mode::Passive { p.passive() } else { *p };
        let unit = |r: Vec3<f64>| r / r.norm();
        let live: Vec<_> = others.iter().filter(|(r, _)| r.norm() > 0.0).collect();
        let c = mean(&live.iter().map(|(r, _)| unit(*r) * cohesion(r.norm(), &g)).collect::<Vec<_>>());
        let s = mean(&live.iter().map(|(r, _)| unit(*r) * -separation(r.norm(), &g)).collect::<Vec<_>>());
        let a = mean(&others.iter().map(|(_, v)| *v * p.k_a).collect::<Vec<_>>());
        let mut f = c + s + a;
        match mode {
            Mode::Normal => {}
            Mode::Active => {
                let e: Vec<_> = intr
                    .iter()
                    .map(|r| {
                        let u = if r.norm() > 0.0 { unit(*r) } else { Vec3::new(1.0, 0.0, 0.0) };
                        u * -escape(r.norm(), p)
                    })
                    .collect();
                f += mean(&e);
            }
            Mode::Passive => {
                let fw: Vec<_> = others
                    .iter()
                    .map(|(_, v)| {
                        let s = v.norm();
                        if s < 1e-6 {
                            Vec3::zero()
                        } else {
                            *v / s * (p.k_f * (p.k_v * s + p.d_f).ln())
                        }
                    })
                    .collect();
                f += mean(&fw);
            }
        }
        f
    }
}
