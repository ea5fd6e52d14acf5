//! JSON state frames sent to viewers.

use serde::{Deserialize, Serialize};
use swarm_evade::metrics::Event;
use swarm_evade::sim::World;
use swarm_evade::Mode;

/// Upper bound on frames per simulated second.
pub const MAX_FRAME_RATE: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename = "state")]
pub struct StateFrame {
    pub t: f64,
    pub agents: Vec<AgentView>,
    pub interferers: Vec<InterfererView>,
    /// Events since the previous frame.
    pub events: Vec<EventView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentView {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfererView {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventView {
    pub t: f64,
    pub kind: String,
    pub agent: String,
}

impl StateFrame {
    pub fn of(world: &World, events: &[Event]) -> Self {
        Self {
            t: world.time(),
            agents: world
                .agents()
                .iter()
                .map(|a| AgentView {
                    id: a.id().to_string(),
                    x: a.state.position.x,
                    y: a.state.position.y,
                    mode: a.mode(),
                })
                .collect(),
            interferers: world
                .interferers()
                .iter()
                .filter(|r| !r.removed)
                .map(|r| InterfererView {
                    id: r.id.to_string(),
                    x: r.position.x,
                    y: r.position.y,
                })
                .collect(),
            events: events
                .iter()
                .map(|e| EventView {
                    t: e.time,
                    kind: e.kind.as_str().to_owned(),
                    agent: e.agent.to_string(),
                })
                .collect(),
        }
    }
}

pub fn encode_frame(world: &World, events: &[Event]) -> String {
    serde_json::to_string(&StateFrame::of(world, events)).expect("frame serializes")
}

pub fn decode_frame(text: &str) -> serde_json::Result<StateFrame> {
    serde_json::from_str(text)
}

/// Steps between frames so that at most [`MAX_FRAME_RATE`] frames are sent
/// per simulated second.
pub fn frame_stride(dt: f64) -> u64 {
    (1.0 / (MAX_FRAME_RATE * dt) - 1e-9).ceil().max(1.0) as u64
}
