//! Synthetic onboard sensing: range limits, a detection cone for
//! interferers and per-step detection probability.

use std::collections::BTreeMap;

use rand::Rng;

use crate::estimate::VelocityEstimator;
use crate::sim::config::SensingConfig;
use crate::types::{AgentId, Observation};
use crate::vec3::Vec3;

/// Positions every agent senses against during one step.
#[derive(Debug, Clone, Default)]
pub struct Snapshot {
    pub agents: Vec<(AgentId, Vec3<f64>)>,
    pub interferers: Vec<(AgentId, Vec3<f64>)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Sensed {
    pub neighbors: Vec<Observation<f64>>,
    pub interferers: Vec<Observation<f64>>,
}

/// The observing agent as seen by the sensor model.
#[derive(Debug, Clone, Copy)]
pub struct Viewpoint<'a> {
    pub id: &'a AgentId,
    pub position: Vec3<f64>,
    /// Unit heading the detection cone is centred on.
    pub heading: Vec3<f64>,
}

/// Per-agent sensor memory: the neighbour velocity filter and the
/// interferers acquired inside the detection cone.
#[derive(Debug, Clone)]
pub struct SensorState {
    pub estimator: VelocityEstimator<f64>,
    /// Last time each tracked interferer was inside the cone.
    tracks: BTreeMap<AgentId, f64>,
}

impl SensorState {
    pub fn new(velocity_smoothing: f64) -> Self {
        Self {
            estimator: VelocityEstimator::new(velocity_smoothing),
            tracks: BTreeMap::new(),
        }
    }

    pub fn is_tracking(&self, id: &AgentId) -> bool {
        self.tracks.contains_key(id)
    }
}

/// True when `rel` lies within `half_angle` of `heading`.
pub fn in_view(heading: Vec3<f64>, rel: Vec3<f64>, half_angle: f64) -> bool {
    if half_angle >= std::f64::consts::PI {
        return true;
    }
    match rel.normalized() {
        None => true,
        Some(u) => heading.dot(u).clamp(-1.0, 1.0).acos() <= half_angle,
    }
}

/// Observations of one agent against `snapshot`.
///
/// Neighbours are seen within `neighbor_range` and strictly inside `r_b`.
/// Interferers are seen within `interferer_range` when inside the view cone
/// or still tracked from an earlier in-cone sighting (see
/// [`SensingConfig::track_hold`]), and when the detection draw succeeds.
pub fn sense<R: Rng + ?Sized>(
    me: Viewpoint<'_>,
    snapshot: &Snapshot,
    cfg: &SensingConfig,
    r_b: f64,
    sensor: &mut SensorState,
    now: f64,
    rng: &mut R,
) -> Sensed {
    let mut out = Sensed::default();
    for (id, pos) in &snapshot.agents {
        if id == me.id {
            continue;
        }
        let rel = *pos - me.position;
        let d = rel.norm();
        if d <= cfg.neighbor_range && d < r_b {
            let v = sensor.estimator.update(id, *pos, now);
            out.neighbors.push(Observation::neighbor(id.clone(), rel, v));
        }
    }
    for (id, pos) in &snapshot.interferers {
        let rel = *pos - me.position;
        if rel.norm() > cfg.interferer_range {
            sensor.tracks.remove(id);
            continue;
        }
        if in_view(me.heading, rel, cfg.fov_half_angle) {
            sensor.tracks.insert(id.clone(), now);
        } else {
            let held = sensor
                .tracks
                .get(id)
                .is_some_and(|&seen| cfg.track_hold.is_none_or(|h| now - seen <= h));
            if !held {
                sensor.tracks.remove(id);
                continue;
            }
        }
        if cfg.detection_probability < 1.0 && !rng.random_bool(cfg.detection_probability) {
            continue;
        }
        let v = sensor.estimator.update(id, *pos, now);
        out.interferers.push(Observation::interferer(id.clone(), rel, v));
    }
    out
}
