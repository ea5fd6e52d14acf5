//! Frozen-lattice studies: settle a free swarm, freeze it, and measure how
//! an interferer alert and its clear spread through the communication graph.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{lattice_spacing, Spread};
use crate::net::{hop_distances, NetConfig};
use crate::params::SwarmParams;
use crate::sim::{AgentSpec, Scenario, World};
use crate::types::{AgentId, Mode};
use crate::vec3::Vec3;

/// Reference spacing of the settled 50-agent lattice (m).
pub const REFERENCE_SPACING_MEAN: f64 = 2.89;
pub const REFERENCE_SPACING_MIN: f64 = 2.45;
pub const REFERENCE_SPACING_MAX: f64 = 3.46;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeConfig {
    pub agents: usize,
    /// Radius of the disc (or ball, when not planar) agents are spawned in (m).
    pub spawn_radius: f64,
    /// Minimum spawn separation (m).
    pub spawn_clearance: f64,
    pub seed: u64,
    /// Hold every agent at zero altitude.
    pub planar: bool,
    pub params: SwarmParams<f64>,
    pub dt: f64,
    /// Settling gives up after this much simulated time (s).
    pub max_time: f64,
    /// Every agent must stay below this speed (m/s) ...
    pub rest_speed: f64,
    /// ... for this long (s) to count as settled.
    pub rest_time: f64,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        Self {
            agents: 50,
            spawn_radius: 10.0,
            spawn_clearance: 1.0,
            seed: 1,
            planar: true,
            params: SwarmParams::default(),
            dt: 0.1,
            max_time: 300.0,
            rest_speed: 0.01,
            rest_time: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lattice {
    pub positions: Vec<(AgentId, Vec3<f64>)>,
    /// Nearest-neighbour spacing.
    pub spacing: Spread,
    pub settled: bool,
    /// Simulated settling time (s).
    pub time: f64,
}

/// Agent ids `u00`, `u01`, ... in lexical order.
pub fn lattice_ids(n: usize) -> Vec<AgentId> {
    let width = n.saturating_sub(1).to_string().len().max(2);
    (0..n).map(|i| AgentId::new(format!("u{i:0width$}"))).collect()
}

/// Uniform spawn inside a disc at zero altitude (`planar`) or a ball,
/// rejecting points closer than `clearance`.
pub fn random_spawn(n: usize, radius: f64, clearance: f64, planar: bool, seed: u64) -> Vec<Vec3<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<Vec3<f64>> = Vec::with_capacity(n);
    let mut attempts = 0u32;
    while pts.len() < n {
        let p = Vec3::new(
            rng.random_range(-radius..radius),
            rng.random_range(-radius..radius),
            if planar { 0.0 } else { rng.random_range(-radius..radius) },
        );
        attempts += 1;
        let crowded = attempts < 100_000 && pts.iter().any(|q| q.distance(p) < clearance);
        if p.norm() <= radius && !crowded {
            pts.push(p);
        }
    }
    pts
}

/// Lets a randomly spawned free swarm settle in open space.
pub fn settle_lattice(cfg: &LatticeConfig) -> Result<Lattice> {
    if cfg.agents < 2 {
        return Err(Error::Config("a lattice needs at least two agents".into()));
    }
    let agents = lattice_ids(cfg.agents)
        .into_iter()
        .zip(random_spawn(cfg.agents, cfg.spawn_radius, cfg.spawn_clearance, cfg.planar, cfg.seed))
        .map(|(id, position)| AgentSpec {
            id,
            position,
            velocity: None,
        })
        .collect();
    let mut sc = Scenario::new(agents, cfg.max_time);
    sc.params = cfg.params;
    sc.dt = cfg.dt;
    sc.planar = cfg.planar;
    sc.evasion_enabled = false;
    sc.seed = cfg.seed;
    let mut world = World::new(sc)?;
    let rest_steps = (cfg.rest_time / cfg.dt).round() as u64;
    let mut calm = 0;
    let mut settled = false;
    while !world.is_finished() {
        world.step();
        let fastest = world
            .agents()
            .iter()
            .map(|a| a.state.velocity.norm())
            .fold(0.0, f64::max);
        calm = if fastest < cfg.rest_speed { calm + 1 } else { 0 };
        if calm >= rest_steps {
            settled = true;
            break;
        }
    }
    let positions: Vec<(AgentId, Vec3<f64>)> = world
        .agents()
        .iter()
        .map(|a| (a.state.id.clone(), a.state.position))
        .collect();
    let pts: Vec<Vec3<f64>> = positions.iter().map(|p| p.1).collect();
    Ok(Lattice {
        spacing: lattice_spacing(&pts).expect("two or more agents"),
        positions,
        settled,
        time: world.time(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpreadRow {
    pub step: u64,
    pub normal: usize,
    pub active: usize,
    pub passive: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShockReport {
    pub lattice: Lattice,
    pub detector: AgentId,
    /// Hop eccentricity of the detector in the communication graph.
    pub eccentricity: usize,
    /// Steps from the detector turning Active until nobody is Normal.
    pub presence_steps: Option<u64>,
    /// Steps from the detector releasing until everybody is Normal.
    pub clear_steps: Option<u64>,
    pub spread: Vec<SpreadRow>,
}

impl ShockReport {
    pub fn spread_csv(&self) -> String {
        let mut out = String::from("step,count_normal,count_active,count_passive\n");
        for r in &self.spread {
            out.push_str(&format!("{},{},{},{}\n", r.step, r.normal, r.active, r.passive));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShockConfig {
    pub lattice: LatticeConfig,
    pub net: NetConfig,
    /// How far outside the swarm the interferer appears (m).
    pub interferer_offset: f64,
    /// Steps the detection is held before the interferer is removed.
    pub hold_steps: u64,
    /// Upper bound on steps waited for each spread phase.
    pub max_phase_steps: u64,
}

impl Default for ShockConfig {
    fn default() -> Self {
        Self {
            lattice: LatticeConfig::default(),
            net: NetConfig::default(),
            interferer_offset: 4.0,
            hold_steps: 20,
            max_phase_steps: 200,
        }
    }
}

fn count_modes(world: &World) -> SpreadRow {
    let mut row = SpreadRow {
        step: world.step_index(),
        normal: 0,
        active: 0,
        passive: 0,
    };
    for a in world.agents() {
        match a.mode() {
            Mode::Normal => row.normal += 1,
            Mode::Active => row.active += 1,
            Mode::Passive => row.passive += 1,
        }
    }
    row
}

/// Frozen world over already settled positions.
pub fn frozen_world(positions: &[(AgentId, Vec3<f64>)], params: SwarmParams<f64>, net: NetConfig, dt: f64) -> Result<World> {
    let agents = positions
        .iter()
        .map(|(id, p)| AgentSpec {
            id: id.clone(),
            position: *p,
            velocity: None,
        })
        .collect();
    let mut sc = Scenario::new(agents, f64::MAX / 4.0);
    sc.params = params;
    sc.net = net;
    sc.dt = dt;
    sc.frozen = true;
    sc.planar = false;
    World::new(sc)
}

/// Settles, freezes, injects one detection at the agent nearest to the
/// interferer's spawn point, and records presence and clear spread.
pub fn shock_study(cfg: &ShockConfig) -> Result<ShockReport> {
    cfg.net.validate()?;
    let lattice = settle_lattice(&cfg.lattice)?;
    let mut world = frozen_world(&lattice.positions, cfg.lattice.params, cfg.net.clone(), cfg.lattice.dt)?;

    let pts: Vec<Vec3<f64>> = lattice.positions.iter().map(|p| p.1).collect();
    let centroid = pts.iter().copied().sum::<Vec3<f64>>() / pts.len() as f64;
    let extent = pts.iter().map(|p| p.x - centroid.x).fold(f64::NEG_INFINITY, f64::max);
    let spawn = centroid + Vec3::new(extent + cfg.interferer_offset, 0.0, 0.0);
    let (detector, detector_pos) = lattice
        .positions
        .iter()
        .min_by(|a, b| a.1.distance(spawn).total_cmp(&b.1.distance(spawn)))
        .cloned()
        .expect("non-empty lattice");
    let mut rel = spawn - detector_pos;
    let d_e1 = cfg.lattice.params.d_e1;
    if rel.norm() >= d_e1 {
        rel = rel.normalized().unwrap_or_else(Vec3::unit_x) * (0.5 * d_e1);
    }

    let eccentricity = hop_distances(world.graph(), &detector)
        .values()
        .copied()
        .max()
        .unwrap_or(0);
    let connected = hop_distances(world.graph(), &detector).len() == pts.len();

    let mut spread = vec![count_modes(&world)];
    world.inject_detection(&detector, rel)?;
    world.step();
    spread.push(count_modes(&world));
    let start = world.step_index();
    let mut presence_steps = None;
    for _ in 0..cfg.max_phase_steps {
        if count_modes(&world).normal == 0 {
            presence_steps = Some(world.step_index() - start);
            break;
        }
        if !connected && world.step_index() - start > cfg.max_phase_steps / 2 {
            break;
        }
        world.step();
        spread.push(count_modes(&world));
    }
    while world.step_index() < start + cfg.hold_steps {
        world.step();
        spread.push(count_modes(&world));
    }

    world.clear_injection(&detector);
    world.step();
    spread.push(count_modes(&world));
    let release = world.step_index();
    let mut clear_steps = None;
    for _ in 0..cfg.max_phase_steps {
        if count_modes(&world).normal == pts.len() {
            clear_steps = Some(world.step_index() - release);
            break;
        }
        world.step();
        spread.push(count_modes(&world));
    }

    Ok(ShockReport {
        lattice,
        detector,
        eccentricity,
        presence_steps,
        clear_steps,
        spread,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub target_mean: f64,
    pub band: f64,
    pub spacing: Spread,
    pub settled: bool,
    pub pass: bool,
}

/// Settles the lattice with `cfg.params` and checks the mean
/// nearest-neighbour spacing against `target_mean +- band`.
pub fn calibrate(cfg: &LatticeConfig, target_mean: f64, band: f64) -> Result<CalibrationReport> {
    if !(band > 0.0 && band.is_finite() && target_mean > 0.0 && target_mean.is_finite()) {
        return Err(Error::Config("calibration target and band must be positive".into()));
    }
    cfg.params.validate()?;
    let lattice = settle_lattice(cfg)?;
    let pass = lattice.settled && (lattice.spacing.mean - target_mean).abs() <= band;
    Ok(CalibrationReport {
        target_mean,
        band,
        spacing: lattice.spacing,
        settled: lattice.settled,
        pass,
    })
}
