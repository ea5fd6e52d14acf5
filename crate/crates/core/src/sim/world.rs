//! Fixed-step world loop.
//!
//! Every step is split into two halves that always run in this order:
//!
//! 1. *act*: each agent turns the observations of the current time into a
//!    total force, a desired position and a tracker update (skipped when
//!    frozen); interferers then follow their policy.
//! 2. *observe*: time advances by `dt`; the communication graph is rebuilt
//!    from the new positions; every agent senses; evasion-mode transitions
//!    are applied; due messages are delivered and handled (forwards are
//!    re-broadcast); periodic re-broadcasts and stale-origin expiry run; the
//!    frame is recorded.
//!
//! Construction runs an observe half for time zero. All agents read the
//! same snapshot and are processed in id order, so the outcome does not
//! depend on the order agents were listed in the scenario.

use std::collections::{BTreeMap, BTreeSet};

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forces::{directional_mean, separation_profile, DirectionMemory, ForceModel};
use crate::metrics::{AgentSample, Event, EventKind, Frame, RunRecord};
use crate::net::{Graph, NetStats, Network};
use crate::params::SwarmParams;
use crate::protocol::{AlertMessage, ProtocolState};
use crate::sim::config::{Scenario, SensingConfig};
use crate::sim::interferer::Interferer;
use crate::sim::motion::{apply_motion, MotionLimits};
use crate::sim::sensing::{sense, Sensed, SensorState, Snapshot, Viewpoint};
use crate::types::{AgentId, AgentState, Mode, Observation};
use crate::vec3::Vec3;

/// Speeds below this (m/s) keep the previous heading.
const HEADING_SPEED_TOLERANCE: f64 = 1e-3;

/// Sensing draws use a stream separate from the network's drop stream.
const SENSING_STREAM: u64 = 0x5e45_1e55;

/// One swarm agent with its onboard state.
#[derive(Debug, Clone)]
pub struct Agent {
    pub state: AgentState<f64>,
    pub protocol: ProtocolState,
    sensor: SensorState,
    memory: DirectionMemory<f64>,
    heading: Vec3<f64>,
    detecting: bool,
    sensed: Sensed,
}

impl Agent {
    pub fn id(&self) -> &AgentId {
        &self.state.id
    }

    pub fn mode(&self) -> Mode {
        self.state.mode
    }

    pub fn heading(&self) -> Vec3<f64> {
        self.heading
    }

    /// Whether sensing currently reports an interferer inside the reaction
    /// distance.
    pub fn is_detecting(&self) -> bool {
        self.detecting
    }

    pub fn sensed(&self) -> &Sensed {
        &self.sensed
    }
}

/// A message handed to the network.
#[derive(Debug, Clone, PartialEq)]
pub struct SentMessage {
    pub step: u64,
    pub sender: AgentId,
    pub message: AlertMessage,
    /// Whether this is a forward of someone else's alert.
    pub forwarded: bool,
}

pub struct World {
    scenario: Scenario,
    model: ForceModel<f64>,
    obstacle_params: SwarmParams<f64>,
    sensing: SensingConfig,
    reaction_distance: f64,
    limits: MotionLimits,
    step: u64,
    agents: Vec<Agent>,
    interferers: Vec<Interferer>,
    net: Network,
    rng: ChaCha8Rng,
    record: RunRecord,
    sent: Vec<SentMessage>,
    injected: BTreeMap<AgentId, Vec3<f64>>,
}

impl World {
    pub fn new(scenario: Scenario) -> Result<Self> {
        scenario.validate()?;
        let model = ForceModel::new(scenario.params)?;
        let p = &scenario.params;
        let b = &scenario.baseline;
        let obstacle_params = SwarmParams {
            d_s: p.d_s * b.range_scale,
            d_max: p.d_max * b.range_scale,
            k_1s: p.k_1s * b.gain_scale,
            k_2s: p.k_2s * b.gain_scale,
            ..*p
        };
        let mut sensing = scenario.sensing.clone();
        let reaction_distance = if scenario.evasion_enabled {
            p.d_e1
        } else {
            sensing.interferer_range *= b.sensing_scale;
            p.d_e1.min(obstacle_params.l + obstacle_params.d_max)
        };
        let limits = MotionLimits {
            v_max: p.v_max,
            a_max: p.a_max,
            damping: p.tracker_damping,
            planar: scenario.planar,
        };
        let roster: BTreeSet<AgentId> = scenario.agents.iter().map(|a| a.id.clone()).collect();
        let mut agents: Vec<Agent> = scenario
            .agents
            .iter()
            .map(|spec| {
                let velocity = spec.velocity.unwrap_or_default();
                Agent {
                    state: AgentState {
                        id: spec.id.clone(),
                        position: spec.position,
                        velocity,
                        mode: Mode::Normal,
                    },
                    protocol: ProtocolState::new(spec.id.clone()).with_roster(roster.clone()),
                    sensor: SensorState::new(scenario.sensing.velocity_smoothing),
                    memory: DirectionMemory::new(),
                    heading: velocity.normalized().unwrap_or_else(Vec3::unit_x),
                    detecting: false,
                    sensed: Sensed::default(),
                }
            })
            .collect();
        agents.sort_by(|a, b| a.state.id.cmp(&b.state.id));
        let mut interferers: Vec<Interferer> = scenario
            .interferers
            .iter()
            .map(|r| {
                Interferer::new(
                    r.id.clone(),
                    r.position,
                    r.policy.clone(),
                    scenario.interferer_max_speed(r),
                )
            })
            .collect();
        interferers.sort_by(|a, b| a.id.cmp(&b.id));
        let mut net_cfg = scenario.net.clone();
        net_cfg.seed = scenario.seed ^ scenario.net.seed;
        let net = Network::new(net_cfg)?;
        let rng = ChaCha8Rng::seed_from_u64(scenario.seed ^ SENSING_STREAM);
        let record = RunRecord::new(scenario.dt, agents.iter().map(|a| a.state.id.clone()).collect());
        let mut world = Self {
            scenario,
            model,
            obstacle_params,
            sensing,
            reaction_distance,
            limits,
            step: 0,
            agents,
            interferers,
            net,
            rng,
            record,
            sent: Vec::new(),
            injected: BTreeMap::new(),
        };
        world.observe();
        Ok(world)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn model(&self) -> &ForceModel<f64> {
        &self.model
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.scenario.dt
    }

    pub fn dt(&self) -> f64 {
        self.scenario.dt
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agent(&self, id: &AgentId) -> Option<&Agent> {
        self.agents.iter().find(|a| &a.state.id == id)
    }

    pub fn interferers(&self) -> &[Interferer] {
        &self.interferers
    }

    pub fn record(&self) -> &RunRecord {
        &self.record
    }

    pub fn into_record(self) -> RunRecord {
        self.record
    }

    pub fn sent_messages(&self) -> &[SentMessage] {
        &self.sent
    }

    pub fn net_stats(&self) -> NetStats {
        self.net.stats()
    }

    pub fn graph(&self) -> &Graph {
        self.net.graph()
    }

    /// Distance below which a sensed interferer counts as a detection.
    pub fn reaction_distance(&self) -> f64 {
        self.reaction_distance
    }

    pub fn is_finished(&self) -> bool {
        self.step >= self.scenario.steps()
    }

    /// Makes `agent` sense a synthetic interferer at `relative` (from the
    /// agent) on every observe until [`World::clear_injection`].
    pub fn inject_detection(&mut self, agent: &AgentId, relative: Vec3<f64>) -> Result<()> {
        if self.agent(agent).is_none() {
            return Err(Error::Config(format!("no agent `{agent}`")));
        }
        self.injected.insert(agent.clone(), relative);
        Ok(())
    }

    pub fn clear_injection(&mut self, agent: &AgentId) {
        self.injected.remove(agent);
    }

    /// Sets the piloted velocity of an interferer; returns the clamped
    /// velocity that will be applied from the next step.
    pub fn set_interferer_velocity(&mut self, id: &AgentId, v: Vec3<f64>) -> Result<Vec3<f64>> {
        let r = self
            .interferers
            .iter_mut()
            .find(|r| &r.id == id)
            .ok_or_else(|| Error::Config(format!("no interferer `{id}`")))?;
        Ok(r.set_external_command(v))
    }

    pub fn remove_interferer(&mut self, id: &AgentId) {
        if let Some(r) = self.interferers.iter_mut().find(|r| &r.id == id) {
            r.removed = true;
            r.velocity = Vec3::zero();
        }
    }

    /// Advances one step.
    pub fn step(&mut self) {
        self.act();
        self.step += 1;
        self.observe();
    }

    /// Steps until the scenario duration is covered.
    pub fn run(&mut self) {
        while !self.is_finished() {
            self.step();
        }
    }

    pub fn run_steps(&mut self, n: u64) {
        for _ in 0..n {
            self.step();
        }
    }

    fn total_force(&self, agent: &Agent) -> Vec3<f64> {
        let s = &agent.sensed;
        let mut f = if self.scenario.evasion_enabled {
            self.model
                .total_force(agent.state.mode, &s.neighbors, &s.interferers, &agent.memory)
        } else {
            let p = self.model.params();
            let separation = -directional_mean(
                s.neighbors
                    .iter()
                    .map(|o| (o, p))
                    .chain(s.interferers.iter().map(|o| (o, &self.obstacle_params)))
                    .filter_map(|(o, params)| {
                        let d = o.relative_position.norm();
                        o.relative_position
                            .normalized()
                            .map(|u| (separation_profile(d, params), u))
                    }),
            );
            self.model.cohesion_force(&s.neighbors) + separation + self.model.alignment_force(&s.neighbors)
        };
        if self.scenario.planar {
            f.z = 0.0;
        }
        f
    }

    fn act(&mut self) {
        let dt = self.scenario.dt;
        let now = self.time();
        let snapshot: Vec<Vec3<f64>> = self.agents.iter().map(|a| a.state.position).collect();
        if !self.scenario.frozen {
            let updates: Vec<AgentState<f64>> = self
                .agents
                .iter()
                .map(|a| {
                    let force = self.total_force(a);
                    let desired = self.model.desired_position(&a.state, force, dt);
                    apply_motion(&a.state, desired, dt, &self.limits)
                })
                .collect();
            for (a, s) in self.agents.iter_mut().zip(updates) {
                debug_assert!(s.position.is_finite() && s.velocity.is_finite());
                if let Some(h) = s.velocity.normalized().filter(|_| s.velocity.norm() > HEADING_SPEED_TOLERANCE) {
                    a.heading = h;
                }
                a.state.position = s.position;
                a.state.velocity = s.velocity;
            }
        }
        for r in &mut self.interferers {
            r.advance(&snapshot, now, dt, self.scenario.planar);
        }
    }

    fn send(&mut self, sender: &AgentId, message: AlertMessage, forwarded: bool) {
        self.net.send(sender, &message, self.step);
        self.sent.push(SentMessage {
            step: self.step,
            sender: sender.clone(),
            message,
            forwarded,
        });
    }

    fn observe(&mut self) {
        let now = self.time();
        let step = self.step;
        let snapshot = Snapshot {
            agents: self
                .agents
                .iter()
                .map(|a| (a.state.id.clone(), a.state.position))
                .collect(),
            interferers: self
                .interferers
                .iter()
                .filter(|r| !r.removed)
                .map(|r| (r.id.clone(), r.position))
                .collect(),
        };
        let positions: BTreeMap<AgentId, Vec3<f64>> = snapshot.agents.iter().cloned().collect();
        self.net.rebuild(&positions);
        let modes_before: Vec<Mode> = self.agents.iter().map(|a| a.state.mode).collect();

        // sensing
        let r_b = self.model.params().r_b;
        for a in &mut self.agents {
            let vp = Viewpoint {
                id: &a.state.id,
                position: a.state.position,
                heading: a.heading,
            };
            let mut sensed = sense(vp, &snapshot, &self.sensing, r_b, &mut a.sensor, now, &mut self.rng);
            if let Some(rel) = self.injected.get(&a.state.id) {
                sensed.interferers.push(Observation::interferer(
                    AgentId::new("injected"),
                    *rel,
                    Vec3::zero(),
                ));
            }
            a.memory.record(&sensed.interferers);
            let detecting = sensed
                .interferers
                .iter()
                .any(|o| o.relative_position.norm() < self.reaction_distance);
            if detecting != a.detecting {
                self.record.events.push(Event {
                    step,
                    time: now,
                    agent: a.state.id.clone(),
                    kind: if detecting { EventKind::Detected } else { EventKind::Lost },
                });
            }
            a.detecting = detecting;
            a.sensed = sensed;
        }

        if self.scenario.evasion_enabled {
            self.run_protocol(now);
        }

        for (a, before) in self.agents.iter().zip(modes_before) {
            if a.state.mode != before {
                self.record.events.push(Event {
                    step,
                    time: now,
                    agent: a.state.id.clone(),
                    kind: EventKind::Mode(a.state.mode),
                });
            }
        }

        self.record.frames.push(Frame {
            step,
            time: now,
            agents: self
                .agents
                .iter()
                .map(|a| AgentSample {
                    position: a.state.position,
                    mode: a.state.mode,
                })
                .collect(),
            interferers: snapshot.interferers,
        });
    }

    fn run_protocol(&mut self, now: f64) {
        let p = *self.model.params();
        let mut outgoing: Vec<(AgentId, AlertMessage, bool)> = Vec::new();
        for a in &mut self.agents {
            if let Some(m) = a.protocol.on_sensor_update(&a.sensed.interferers, p.d_e1, p.d_e2, now) {
                outgoing.push((a.state.id.clone(), m, false));
            }
        }
        let index: BTreeMap<AgentId, usize> = self
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| (a.state.id.clone(), i))
            .collect();
        for m in self.net.deliver_due(self.step) {
            let Some(&i) = index.get(&m.receiver) else {
                warn!("message for unknown receiver `{}` dropped", m.receiver);
                continue;
            };
            let a = &mut self.agents[i];
            match a.protocol.on_message(&m.payload, now) {
                Ok(reaction) => {
                    if let Some(f) = reaction.forward {
                        outgoing.push((a.state.id.clone(), f, true));
                    }
                    if let Some(c) = reaction.correction {
                        outgoing.push((a.state.id.clone(), c, false));
                    }
                }
                Err(e) => warn!("agent `{}` dropped alert: {e}", a.state.id),
            }
        }
        let period = self.scenario.protocol.rebroadcast_period;
        let timeout = self.scenario.protocol.origin_timeout;
        for a in &mut self.agents {
            if let Some(m) = a.protocol.periodic_rebroadcast(now, period) {
                outgoing.push((a.state.id.clone(), m, false));
            }
            if let Some(t) = timeout {
                a.protocol.expire_stale(now, t);
            }
            a.state.mode = a.protocol.mode();
        }
        for (sender, m, fwd) in outgoing {
            self.send(&sender, m, fwd);
        }
    }
}
