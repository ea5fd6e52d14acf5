//! Per-agent evasion mode machine and alert messaging.
//!
//! An agent that sees an interferer closer than `d_E1` turns Active and
//! floods a presence alert. Receivers store the origin, turn Passive and
//! forward the alert once. When the detecting agent loses the interferer (or
//! it recedes past `d_E2`) it floods a clear alert, which erases the origin
//! everywhere. Alerts are deduplicated on `(origin, timestamp)` with
//! monotone acceptance per origin, so a newer epoch from the same origin is
//! always propagated while replays and reordered stale copies are not.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::types::{AgentId, Mode, Observation};

/// Fixed width of the origin field in the binary wire record.
pub const WIRE_ORIGIN_LEN: usize = 32;
/// Total length of one binary wire record.
pub const WIRE_LEN: usize = WIRE_ORIGIN_LEN + 8 + 1;

/// Alert exchanged between agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertMessage {
    pub origin: AgentId,
    /// Simulation time (s) at which the origin issued the alert.
    pub timestamp: f64,
    pub interferer_present: bool,
}

impl AlertMessage {
    pub fn presence(origin: AgentId, timestamp: f64) -> Self {
        Self {
            origin,
            timestamp,
            interferer_present: true,
        }
    }

    pub fn clear(origin: AgentId, timestamp: f64) -> Self {
        Self {
            origin,
            timestamp,
            interferer_present: false,
        }
    }

    /// Binary record: origin as 32 zero-padded UTF-8 bytes, timestamp as
    /// little-endian IEEE-754 binary64, presence flag as one byte (0 or 1).
    pub fn to_wire(&self) -> Result<[u8; WIRE_LEN]> {
        let name = self.origin.as_str().as_bytes();
        if name.is_empty() || name.len() > WIRE_ORIGIN_LEN {
            return Err(Error::Wire(format!(
                "origin must be 1..={WIRE_ORIGIN_LEN} bytes, got {}",
                name.len()
            )));
        }
        if name.contains(&0) {
            return Err(Error::Wire("origin contains NUL".into()));
        }
        if !(self.timestamp.is_finite() && self.timestamp >= 0.0) {
            return Err(Error::Wire(format!("bad timestamp {}", self.timestamp)));
        }
        let mut out = [0u8; WIRE_LEN];
        out[..name.len()].copy_from_slice(name);
        out[WIRE_ORIGIN_LEN..WIRE_ORIGIN_LEN + 8].copy_from_slice(&self.timestamp.to_le_bytes());
        out[WIRE_LEN - 1] = u8::from(self.interferer_present);
        Ok(out)
    }

    pub fn from_wire(buf: &[u8]) -> Result<Self> {
        if buf.len() != WIRE_LEN {
            return Err(Error::Wire(format!("expected {WIRE_LEN} bytes, got {}", buf.len())));
        }
        let raw = &buf[..WIRE_ORIGIN_LEN];
        let end = raw.iter().position(|&b| b == 0).unwrap_or(WIRE_ORIGIN_LEN);
        if end == 0 || raw[end..].iter().any(|&b| b != 0) {
            return Err(Error::Wire("bad origin padding".into()));
        }
        let origin = std::str::from_utf8(&raw[..end]).map_err(|e| Error::Wire(e.to_string()))?;
        let mut ts = [0u8; 8];
        ts.copy_from_slice(&buf[WIRE_ORIGIN_LEN..WIRE_ORIGIN_LEN + 8]);
        let timestamp = f64::from_le_bytes(ts);
        if !(timestamp.is_finite() && timestamp >= 0.0) {
            return Err(Error::Wire(format!("bad timestamp {timestamp}")));
        }
        let interferer_present = match buf[WIRE_LEN - 1] {
            0 => false,
            1 => true,
            b => return Err(Error::Wire(format!("bad presence byte {b}"))),
        };
        Ok(Self {
            origin: AgentId::new(origin),
            timestamp,
            interferer_present,
        })
    }

    /// Parses the text log form `t=<s> origin=<id> present=<0|1>`.
    pub fn parse_log(line: &str) -> Result<Self> {
        let bad = || Error::Wire(format!("bad log line `{line}`"));
        let mut parts = line.split_whitespace();
        let t = parts.next().and_then(|s| s.strip_prefix("t=")).ok_or_else(bad)?;
        let origin = parts.next().and_then(|s| s.strip_prefix("origin=")).ok_or_else(bad)?;
        let present = parts.next().and_then(|s| s.strip_prefix("present=")).ok_or_else(bad)?;
        if parts.next().is_some() || origin.is_empty() {
            return Err(bad());
        }
        let timestamp: f64 = t.parse().map_err(|_| bad())?;
        let interferer_present = match present {
            "0" => false,
            "1" => true,
            _ => return Err(bad()),
        };
        Ok(Self {
            origin: AgentId::new(origin),
            timestamp,
            interferer_present,
        })
    }
}

/// Text log form `t=<s> origin=<id> present=<0|1>`.
impl fmt::Display for AlertMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t={} origin={} present={}",
            self.timestamp,
            self.origin,
            u8::from(self.interferer_present)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    /// Interval (s) between presence re-broadcasts while Active.
    pub rebroadcast_period: f64,
    /// A stored origin not refreshed for this long (s) is dropped. `None`
    /// keeps stored origins until an explicit clear arrives.
    pub origin_timeout: Option<f64>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            rebroadcast_period: 1.0,
            origin_timeout: Some(3.0),
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rebroadcast_period > 0.0 && self.rebroadcast_period.is_finite()) {
            return Err(Error::Config("rebroadcast_period must be positive".into()));
        }
        if let Some(t) = self.origin_timeout {
            if !(t > self.rebroadcast_period && t.is_finite()) {
                return Err(Error::Config(
                    "origin_timeout must exceed rebroadcast_period".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Seen {
    timestamp: f64,
    present: bool,
    /// Local time the entry was last accepted.
    received_at: f64,
}

/// What the agent should send after handling one incoming alert.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Reaction {
    /// Accepted alert to pass on unchanged.
    pub forward: Option<AlertMessage>,
    /// Own clear re-issued because a stale presence echo came back.
    pub correction: Option<AlertMessage>,
}

/// Mode machine of one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolState {
    id: AgentId,
    mode: Mode,
    active_origins: BTreeMap<AgentId, f64>,
    seen: BTreeMap<AgentId, Seen>,
    last_own_broadcast: Option<f64>,
    roster: Option<BTreeSet<AgentId>>,
}

impl ProtocolState {
    pub fn new(id: AgentId) -> Self {
        Self {
            id,
            mode: Mode::Normal,
            active_origins: BTreeMap::new(),
            seen: BTreeMap::new(),
            last_own_broadcast: None,
            roster: None,
        }
    }

    /// Restricts accepted origins to `roster`; alerts from anyone else are
    /// rejected as malformed traffic.
    pub fn with_roster(mut self, roster: BTreeSet<AgentId>) -> Self {
        self.roster = Some(roster);
        self
    }

    pub fn id(&self) -> &AgentId {
        &self.id
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Origins currently reported as escaping, with the accepted timestamp.
    pub fn active_origins(&self) -> &BTreeMap<AgentId, f64> {
        &self.active_origins
    }

    pub fn last_own_broadcast(&self) -> Option<f64> {
        self.last_own_broadcast
    }

    fn settle_mode(&mut self) {
        if self.mode != Mode::Active {
            self.mode = if self.active_origins.is_empty() {
                Mode::Normal
            } else {
                Mode::Passive
            };
        }
    }

    /// Feeds this step's interferer observations into the mode machine.
    ///
    /// Enters Active when any interferer is closer than `d_e1`; leaves it
    /// when none is within `d_e2`. Returns the alert to broadcast on a
    /// transition.
    pub fn on_sensor_update<T: Scalar>(
        &mut self,
        interferers: &[Observation<T>],
        d_e1: T,
        d_e2: T,
        now: f64,
    ) -> Option<AlertMessage> {
        let mut trigger = false;
        let mut hold = false;
        for o in interferers {
            let d = o.relative_position.norm();
            trigger |= d < d_e1;
            hold |= d <= d_e2;
        }
        match self.mode {
            Mode::Normal | Mode::Passive if trigger => {
                self.mode = Mode::Active;
                self.last_own_broadcast = Some(now);
                Some(AlertMessage::presence(self.id.clone(), now))
            }
            Mode::Active if !hold => {
                self.mode = Mode::Normal;
                self.settle_mode();
                self.last_own_broadcast = Some(now);
                Some(AlertMessage::clear(self.id.clone(), now))
            }
            _ => None,
        }
    }

    fn is_newer(&self, msg: &AlertMessage) -> bool {
        match self.seen.get(&msg.origin) {
            None => true,
            Some(s) if msg.timestamp > s.timestamp => true,
            // equal timestamps: clear wins over presence
            Some(s) => msg.timestamp == s.timestamp && s.present && !msg.interferer_present,
        }
    }

    /// Handles one received alert.
    pub fn on_message(&mut self, msg: &AlertMessage, now: f64) -> Result<Reaction> {
        if let Some(roster) = &self.roster {
            if !roster.contains(&msg.origin) {
                return Err(Error::UnknownOrigin(msg.origin.to_string()));
            }
        }
        let mut reaction = Reaction::default();
        if msg.origin == self.id {
            if msg.interferer_present && self.mode == Mode::Normal {
                reaction.correction = Some(AlertMessage::clear(self.id.clone(), now));
            }
            return Ok(reaction);
        }
        if !self.is_newer(msg) {
            return Ok(reaction);
        }
        self.seen.insert(
            msg.origin.clone(),
            Seen {
                timestamp: msg.timestamp,
                present: msg.interferer_present,
                received_at: now,
            },
        );
        if msg.interferer_present {
            self.active_origins.insert(msg.origin.clone(), msg.timestamp);
        } else {
            self.active_origins.remove(&msg.origin);
        }
        self.settle_mode();
        reaction.forward = Some(msg.clone());
        Ok(reaction)
    }

    /// Presence re-broadcast while Active, at most once per `period`.
    pub fn periodic_rebroadcast(&mut self, now: f64, period: f64) -> Option<AlertMessage> {
        if self.mode != Mode::Active {
            return None;
        }
        let due = self.last_own_broadcast.is_none_or(|t| now - t >= period - 1e-9);
        if due {
            self.last_own_broadcast = Some(now);
            Some(AlertMessage::presence(self.id.clone(), now))
        } else {
            None
        }
    }

    /// Drops stored origins whose last accepted presence is older than
    /// `timeout`. Returns the expired origins.
    pub fn expire_stale(&mut self, now: f64, timeout: f64) -> Vec<AgentId> {
        let expired: Vec<AgentId> = self
            .active_origins
            .keys()
            .filter(|o| {
                self.seen
                    .get(*o)
                    .is_some_and(|s| now - s.received_at > timeout)
            })
            .cloned()
            .collect();
        for o in &expired {
            self.active_origins.remove(o);
        }
        if !expired.is_empty() {
            self.settle_mode();
        }
        expired
    }

    /// Checks the mode/stored-origin consistency rule.
    pub fn is_consistent(&self, detecting: bool) -> bool {
        match self.mode {
            Mode::Active => detecting,
            Mode::Passive => !detecting && !self.active_origins.is_empty(),
            Mode::Normal => !detecting && self.active_origins.is_empty(),
        }
    }
}
