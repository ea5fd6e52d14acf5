use std::fmt;

use serde::{Deserialize, Serialize};

use crate::vec3::Vec3;

/// Name of a swarm agent or interferer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub String);

impl AgentId {
    pub fn new(s: impl Into<String>) -> Self {
        Self(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

/// Evasive mode of an agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Undisturbed swarming.
    #[default]
    Normal,
    /// Escaping an interferer this agent detects itself.
    Active,
    /// Escaping on the strength of reports from other agents.
    Passive,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Normal => "normal",
            Mode::Active => "active",
            Mode::Passive => "passive",
        }
    }

    pub fn is_escaping(self) -> bool {
        !matches!(self, Mode::Normal)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "normal" => Ok(Mode::Normal),
            "active" => Ok(Mode::Active),
            "passive" => Ok(Mode::Passive),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState<T> {
    pub id: AgentId,
    pub position: Vec3<T>,
    pub velocity: Vec3<T>,
    pub mode: Mode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObservationKind {
    Neighbor,
    Interferer,
}

/// One locally sensed object, expressed relative to the observing agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation<T> {
    /// Observed position minus own position.
    pub relative_position: Vec3<T>,
    pub estimated_velocity: Vec3<T>,
    pub kind: ObservationKind,
    pub source: AgentId,
}

impl<T> Observation<T> {
    pub fn neighbor(source: AgentId, relative_position: Vec3<T>, estimated_velocity: Vec3<T>) -> Self {
        Self {
            relative_position,
            estimated_velocity,
            kind: ObservationKind::Neighbor,
            source,
        }
    }

    pub fn interferer(source: AgentId, relative_position: Vec3<T>, estimated_velocity: Vec3<T>) -> Self {
        Self {
            relative_position,
            estimated_velocity,
            kind: ObservationKind::Interferer,
            source,
        }
    }
}
