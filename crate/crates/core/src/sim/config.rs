//! Scenario file schema.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::NetConfig;
use crate::params::SwarmParams;
use crate::protocol::ProtocolConfig;
use crate::types::AgentId;
use crate::vec3::Vec3;

/// Pursuers may not exceed this fraction of the swarm speed limit.
pub const INTERFERER_SPEED_RATIO: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensingConfig {
    /// Teammate localization range (m).
    pub neighbor_range: f64,
    /// Interferer detection range (m).
    pub interferer_range: f64,
    /// Half-angle of the interferer detection cone about the heading (rad).
    pub fov_half_angle: f64,
    /// Per-step probability that an in-range, in-view interferer is seen.
    pub detection_probability: f64,
    /// Blend factor of the neighbour velocity filter.
    pub velocity_smoothing: f64,
    /// How long (s) an interferer acquired inside the cone stays tracked
    /// after leaving it; `None` keeps the track while it is in range.
    pub track_hold: Option<f64>,
}

impl Default for SensingConfig {
    fn default() -> Self {
        Self {
            neighbor_range: 8.0,
            interferer_range: 12.0,
            fov_half_angle: std::f64::consts::PI,
            detection_probability: 1.0,
            velocity_smoothing: 0.5,
            track_hold: None,
        }
    }
}

impl SensingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.neighbor_range > 0.0 && self.interferer_range > 0.0) {
            return Err(Error::Config("sensing ranges must be positive".into()));
        }
        if !(self.fov_half_angle > 0.0 && self.fov_half_angle <= std::f64::consts::PI) {
            return Err(Error::Config("sensing.fov_half_angle must be in (0, pi]".into()));
        }
        if !(0.0..=1.0).contains(&self.detection_probability) {
            return Err(Error::Config("sensing.detection_probability must be in [0, 1]".into()));
        }
        if !(self.velocity_smoothing > 0.0 && self.velocity_smoothing <= 1.0) {
            return Err(Error::Config("sensing.velocity_smoothing must be in (0, 1]".into()));
        }
        if self.track_hold.is_some_and(|h| !(h >= 0.0 && h.is_finite())) {
            return Err(Error::Config("sensing.track_hold must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// How the swarm treats an interferer when the evasion law is switched off:
/// as an extra neighbour in the separation term, with the separation
/// distances and gains scaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    /// Multiplier on `d_s` and `d_max` for the interferer term.
    pub range_scale: f64,
    /// Multiplier on `k_1s` and `k_2s` for the interferer term.
    pub gain_scale: f64,
    /// Multiplier on the interferer sensing range.
    pub sensing_scale: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            range_scale: 1.0,
            gain_scale: 1.0,
            sensing_scale: 1.0,
        }
    }
}

impl BaselineConfig {
    /// Stronger, longer-reaching obstacle reaction.
    pub fn enlarged() -> Self {
        Self {
            range_scale: 1.5,
            gain_scale: 2.0,
            sensing_scale: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    /// Chases the swarm.
    Pursuit,
    /// Visits waypoints in order, then holds.
    Scripted,
    /// Velocity set from outside (live piloting).
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PursuitTarget {
    #[default]
    Centroid,
    Nearest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfererPolicy {
    pub kind: PolicyKind,
    /// Speed limit (m/s); defaults to 0.9 of the swarm `v_max`.
    #[serde(default)]
    pub max_speed: Option<f64>,
    #[serde(default)]
    pub waypoints: Vec<Vec3<f64>>,
    #[serde(default)]
    pub target: PursuitTarget,
    /// The interferer holds still from this time on (s).
    #[serde(default)]
    pub stop_time: Option<f64>,
    /// The interferer is removed from the world at this time (s).
    #[serde(default)]
    pub remove_time: Option<f64>,
}

impl InterfererPolicy {
    pub fn pursuit() -> Self {
        Self {
            kind: PolicyKind::Pursuit,
            max_speed: None,
            waypoints: Vec::new(),
            target: PursuitTarget::Centroid,
            stop_time: None,
            remove_time: None,
        }
    }

    pub fn scripted(waypoints: Vec<Vec3<f64>>) -> Self {
        Self {
            kind: PolicyKind::Scripted,
            waypoints,
            ..Self::pursuit()
        }
    }

    pub fn external() -> Self {
        Self {
            kind: PolicyKind::External,
            ..Self::pursuit()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub id: AgentId,
    pub position: Vec3<f64>,
    #[serde(default)]
    pub velocity: Option<Vec3<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfererSpec {
    pub id: AgentId,
    pub position: Vec3<f64>,
    pub policy: InterfererPolicy,
}

fn default_dt() -> f64 {
    0.1
}

fn default_true() -> bool {
    true
}

/// A complete simulation setup, loadable from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub agents: Vec<AgentSpec>,
    #[serde(default)]
    pub interferers: Vec<InterfererSpec>,
    #[serde(default)]
    pub params: SwarmParams<f64>,
    #[serde(default)]
    pub net: NetConfig,
    #[serde(default)]
    pub sensing: SensingConfig,
    #[serde(default)]
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub baseline: BaselineConfig,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub duration_s: f64,
    #[serde(default = "default_true")]
    pub evasion_enabled: bool,
    #[serde(default)]
    pub frozen: bool,
    /// Hold every agent at its initial altitude.
    #[serde(default = "default_true")]
    pub planar: bool,
    #[serde(default)]
    pub seed: u64,
}

impl Scenario {
    pub fn new(agents: Vec<AgentSpec>, duration_s: f64) -> Self {
        Self {
            agents,
            interferers: Vec::new(),
            params: SwarmParams::default(),
            net: NetConfig::default(),
            sensing: SensingConfig::default(),
            protocol: ProtocolConfig::default(),
            baseline: BaselineConfig::default(),
            dt: default_dt(),
            duration_s,
            evasion_enabled: true,
            frozen: false,
            planar: true,
            seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Number of simulation steps covered by `duration_s`.
    pub fn steps(&self) -> u64 {
        (self.duration_s / self.dt).round() as u64
    }

    /// Speed limit of interferer `spec`.
    pub fn interferer_max_speed(&self, spec: &InterfererSpec) -> f64 {
        spec.policy
            .max_speed
            .unwrap_or(INTERFERER_SPEED_RATIO * self.params.v_max)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.net.validate()?;
        self.sensing.validate()?;
        self.protocol.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config("dt must be positive".into()));
        }
        if !(self.duration_s >= 0.0 && self.duration_s.is_finite()) {
            return Err(Error::Config("duration_s must be non-negative".into()));
        }
        let b = &self.baseline;
        if !(b.range_scale > 0.0 && b.gain_scale >= 0.0 && b.sensing_scale > 0.0) {
            return Err(Error::Config("baseline scales must be positive".into()));
        }
        let mut ids = BTreeSet::new();
        for a in &self.agents {
            if !ids.insert(&a.id) {
                return Err(Error::Config(format!("duplicate id `{}`", a.id)));
            }
            if !a.position.is_finite() || !a.velocity.unwrap_or_default().is_finite() {
                return Err(Error::Config(format!("agent `{}` has non-finite state", a.id)));
            }
        }
        let cap = INTERFERER_SPEED_RATIO * self.params.v_max + 1e-12;
        for r in &self.interferers {
            if !ids.insert(&r.id) {
                return Err(Error::Config(format!("duplicate id `{}`", r.id)));
            }
            if !r.position.is_finite() {
                return Err(Error::Config(format!("interferer `{}` has non-finite position", r.id)));
            }
            let v = self.interferer_max_speed(r);
            if !(v >= 0.0 && v <= cap) {
                return Err(Error::Config(format!(
                    "interferer `{}` max_speed {v} exceeds {INTERFERER_SPEED_RATIO} x v_max",
                    r.id
                )));
            }
            if r.policy.kind == PolicyKind::Scripted && r.policy.waypoints.is_empty() {
                return Err(Error::Config(format!("scripted interferer `{}` has no waypoints", r.id)));
            }
        }
        for id in &ids {
            if id.as_str().is_empty() || id.as_str().len() > crate::protocol::WIRE_ORIGIN_LEN {
                return Err(Error::Config(format!("id `{id}` must be 1..=32 bytes")));
            }
        }
        Ok(())
    }
}
