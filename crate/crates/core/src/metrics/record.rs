use serde::{Deserialize, Serialize};

use crate::types::{AgentId, Mode};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentSample {
    pub position: Vec3<f64>,
    pub mode: Mode,
}

/// World state after one step (or the initial state, step 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub step: u64,
    pub time: f64,
    /// Index-aligned with [`RunRecord::agent_ids`].
    pub agents: Vec<AgentSample>,
    /// Interferers present in the world at this step.
    pub interferers: Vec<(AgentId, Vec3<f64>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// The agent's sensing started reporting an interferer inside its
    /// reaction distance.
    Detected,
    /// It stopped doing so.
    Lost,
    /// The agent switched to the given mode.
    Mode(Mode),
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Detected => "detected",
            EventKind::Lost => "lost",
            EventKind::Mode(Mode::Normal) => "normal",
            EventKind::Mode(Mode::Active) => "active",
            EventKind::Mode(Mode::Passive) => "passive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub step: u64,
    pub time: f64,
    pub agent: AgentId,
    pub kind: EventKind,
}

/// Everything recorded during a run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunRecord {
    pub dt: f64,
    pub agent_ids: Vec<AgentId>,
    pub frames: Vec<Frame>,
    pub events: Vec<Event>,
}

impl RunRecord {
    pub fn new(dt: f64, agent_ids: Vec<AgentId>) -> Self {
        Self {
            dt,
            agent_ids,
            frames: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn first_event(&self, kind: EventKind) -> Option<&Event> {
        self.events.iter().find(|e| e.kind == kind)
    }
}
