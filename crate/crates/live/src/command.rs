//! Client commands and server replies.

use serde::{Deserialize, Serialize};
use swarm_evade::sim::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    /// Piloted interferer velocity (m/s); clamped server-side.
    IntruderVel { vx: f64, vy: f64 },
    Pause,
    Resume,
    /// Restart from the given scenario, or the current one.
    Reset {
        #[serde(default)]
        scenario: Option<Box<Scenario>>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::IntruderVel { .. } => "intruder_vel",
            Command::Pause => "pause",
            Command::Resume => "resume",
            Command::Reset { .. } => "reset",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Reply {
    Ack {
        command: String,
        /// Velocity actually applied, after clamping.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        applied: Option<[f64; 2]>,
    },
    Error {
        reason: String,
    },
}

impl Reply {
    pub fn ack(cmd: &Command) -> Self {
        Reply::Ack {
            command: cmd.name().to_owned(),
            applied: None,
        }
    }

    pub fn error(reason: impl Into<String>) -> Self {
        Reply::Error { reason: reason.into() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reply serializes")
    }
}

pub fn parse_command(text: &str) -> Result<Command, String> {
    let cmd: Command = serde_json::from_str(text).map_err(|e| format!("invalid command: {e}"))?;
    if let Command::IntruderVel { vx, vy } = cmd {
        if !(vx.is_finite() && vy.is_finite()) {
            return Err("invalid command: velocity must be finite".into());
        }
    }
    Ok(cmd)
}
