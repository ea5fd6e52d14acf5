//! Synchronous owner of the live world.

use swarm_evade::metrics::Event;
use swarm_evade::sim::{PolicyKind, Scenario, World};
use swarm_evade::{AgentId, Result, Vec3};

use crate::command::{parse_command, Command, Reply};
use crate::frame::{encode_frame, frame_stride};

/// The live world plus run control. Commands are applied between steps,
/// never during one.
pub struct Session {
    scenario: Scenario,
    world: World,
    paused: bool,
    stride: u64,
    /// Ticks spent paused, for keep-alive pacing.
    idle_ticks: u64,
    /// Events already sent in a frame.
    events_sent: usize,
}

impl Session {
    pub fn new(scenario: Scenario) -> Result<Self> {
        let world = World::new(scenario.clone())?;
        Ok(Self {
            stride: frame_stride(scenario.dt),
            scenario,
            world,
            paused: false,
            idle_ticks: 0,
            events_sent: 0,
        })
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    /// The scenario the current world was built from.
    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn is_paused(&self) -> bool {
        self.paused
    }

    /// First externally piloted interferer, if the scenario has one.
    pub fn piloted(&self) -> Option<&AgentId> {
        self.world
            .interferers()
            .iter()
            .find(|r| r.policy.kind == PolicyKind::External && !r.removed)
            .map(|r| &r.id)
    }

    pub fn apply(&mut self, cmd: Command) -> Reply {
        match cmd {
            Command::IntruderVel { vx, vy } => {
                let Some(id) = self.piloted().cloned() else {
                    return Reply::error("scenario has no externally piloted interferer");
                };
                match self.world.set_interferer_velocity(&id, Vec3::new(vx, vy, 0.0)) {
                    Ok(v) => Reply::Ack {
                        command: "intruder_vel".into(),
                        applied: Some([v.x, v.y]),
                    },
                    Err(e) => Reply::error(e.to_string()),
                }
            }
            Command::Pause => {
                self.paused = true;
                self.idle_ticks = 0;
                Reply::ack(&cmd)
            }
            Command::Resume => {
                self.paused = false;
                Reply::ack(&cmd)
            }
            Command::Reset { ref scenario } => {
                let next = scenario.as_deref().cloned().unwrap_or_else(|| self.scenario.clone());
                match World::new(next.clone()) {
                    Ok(world) => {
                        self.stride = frame_stride(next.dt);
                        self.scenario = next;
                        self.world = world;
                        self.idle_ticks = 0;
                        self.events_sent = 0;
                        Reply::ack(&cmd)
                    }
                    Err(e) => Reply::error(e.to_string()),
                }
            }
        }
    }

    /// Parses and applies one client message.
    pub fn handle_text(&mut self, text: &str) -> Reply {
        match parse_command(text) {
            Ok(cmd) => self.apply(cmd),
            Err(reason) => Reply::error(reason),
        }
    }

    /// One wall-clock tick: steps the world unless paused or past the
    /// scenario duration, and returns a frame when one is due. A held world
    /// returns keep-alive frames with a constant `t` at the same rate.
    pub fn tick(&mut self) -> Option<String> {
        if self.paused || self.world.is_finished() {
            self.idle_ticks += 1;
            return self.idle_ticks.is_multiple_of(self.stride).then(|| self.frame());
        }
        self.world.step();
        self.world.step_index().is_multiple_of(self.stride).then(|| self.frame())
    }

    /// Encodes the current state with the events not yet sent.
    pub fn frame(&mut self) -> String {
        let events: &[Event] = &self.world.record().events[self.events_sent..];
        let text = encode_frame(&self.world, events);
        self.events_sent = self.world.record().events.len();
        text
    }
}
