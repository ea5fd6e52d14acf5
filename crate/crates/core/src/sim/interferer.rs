//! Interferer motion policies.

use serde::Serialize;

use crate::sim::config::{InterfererPolicy, PolicyKind, PursuitTarget};
use crate::types::AgentId;
use crate::vec3::Vec3;

/// Velocity of at most `max_speed` towards `target` that does not overshoot
/// it within one step.
pub fn seek(from: Vec3<f64>, target: Vec3<f64>, max_speed: f64, dt: f64) -> Vec3<f64> {
    let gap = target - from;
    match gap.normalized() {
        None => Vec3::zero(),
        Some(dir) => dir * max_speed.min(gap.norm() / dt),
    }
}

/// Pursuit command: towards the swarm centroid (or the nearest agent),
/// zero once `stop_time` has passed.
pub fn pursuit_velocity(
    position: Vec3<f64>,
    agents: &[Vec3<f64>],
    policy: &InterfererPolicy,
    max_speed: f64,
    now: f64,
    dt: f64,
) -> Vec3<f64> {
    if policy.stop_time.is_some_and(|t| now >= t) || agents.is_empty() {
        return Vec3::zero();
    }
    let target = match policy.target {
        PursuitTarget::Centroid => {
            agents.iter().copied().sum::<Vec3<f64>>() / agents.len() as f64
        }
        PursuitTarget::Nearest => agents
            .iter()
            .copied()
            .min_by(|a, b| a.distance(position).total_cmp(&b.distance(position)))
            .expect("non-empty"),
    };
    seek(position, target, max_speed, dt)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interferer {
    pub id: AgentId,
    pub position: Vec3<f64>,
    pub velocity: Vec3<f64>,
    #[serde(skip)]
    pub policy: InterfererPolicy,
    pub max_speed: f64,
    /// Removed interferers are invisible and frozen.
    pub removed: bool,
    #[serde(skip)]
    next_waypoint: usize,
    #[serde(skip)]
    external_command: Vec3<f64>,
}

impl Interferer {
    pub fn new(id: AgentId, position: Vec3<f64>, policy: InterfererPolicy, max_speed: f64) -> Self {
        Self {
            id,
            position,
            velocity: Vec3::zero(),
            policy,
            max_speed,
            removed: false,
            next_waypoint: 0,
            external_command: Vec3::zero(),
        }
    }

    /// Sets the piloted velocity, clamped to the speed limit. Returns the
    /// value actually applied.
    pub fn set_external_command(&mut self, v: Vec3<f64>) -> Vec3<f64> {
        let v = if v.is_finite() { v.clamp_norm(self.max_speed) } else { Vec3::zero() };
        self.external_command = v;
        v
    }

    /// Advances the interferer by one step of `dt` starting at time `now`.
    pub fn advance(&mut self, agents: &[Vec3<f64>], now: f64, dt: f64, planar: bool) {
        if self.removed {
            return;
        }
        if self.policy.remove_time.is_some_and(|t| now >= t) {
            self.removed = true;
            self.velocity = Vec3::zero();
            return;
        }
        let stopped = self.policy.stop_time.is_some_and(|t| now >= t);
        let mut v = match self.policy.kind {
            _ if stopped => Vec3::zero(),
            PolicyKind::Pursuit => {
                pursuit_velocity(self.position, agents, &self.policy, self.max_speed, now, dt)
            }
            PolicyKind::Scripted => {
                while let Some(w) = self.policy.waypoints.get(self.next_waypoint) {
                    if w.distance(self.position) > 1e-9 {
                        break;
                    }
                    self.next_waypoint += 1;
                }
                match self.policy.waypoints.get(self.next_waypoint) {
                    Some(w) => seek(self.position, *w, self.max_speed, dt),
                    None => Vec3::zero(),
                }
            }
            PolicyKind::External => self.external_command,
        };
        v = v.clamp_norm(self.max_speed);
        if planar {
            v.z = 0.0;
        }
        self.velocity = v;
        self.position += v * dt;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pursuit_examples() {
        let p = InterfererPolicy::pursuit();
        let agents = [Vec3::new(9.0, 1.0, 0.0), Vec3::new(11.0, -1.0, 0.0)];
        let v = pursuit_velocity(Vec3::zero(), &agents, &p, 1.8, 0.0, 0.1);
        assert!((v - Vec3::new(1.8, 0.0, 0.0)).norm() < 1e-12);

        let stopping = InterfererPolicy {
            stop_time: Some(5.0),
            ..p.clone()
        };
        assert_eq!(pursuit_velocity(Vec3::zero(), &agents, &stopping, 1.8, 5.0, 0.1), Vec3::zero());

        let at_centroid = Vec3::new(10.0, 0.0, 0.0);
        assert_eq!(pursuit_velocity(at_centroid, &agents, &p, 1.8, 0.0, 0.1), Vec3::zero());
    }

    #[test]
    fn nearest_target() {
        let p = InterfererPolicy {
            target: PursuitTarget::Nearest,
            ..InterfererPolicy::pursuit()
        };
        let agents = [Vec3::new(0.0, 10.0, 0.0), Vec3::new(-3.0, 0.0, 0.0)];
        let v = pursuit_velocity(Vec3::zero(), &agents, &p, 1.0, 0.0, 0.1);
        assert!((v - Vec3::new(-1.0, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn scripted_visits_waypoints_and_holds() {
        let wps = vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 0.0)];
        let mut r = Interferer::new(AgentId::from("r"), Vec3::zero(), InterfererPolicy::scripted(wps), 1.0);
        for k in 0..40 {
            r.advance(&[], k as f64 * 0.1, 0.1, true);
        }
        assert!((r.position - Vec3::new(1.0, 1.0, 0.0)).norm() < 1e-9);
        assert_eq!(r.velocity, Vec3::zero());
    }

    #[test]
    fn external_command_is_clamped() {
        let mut r = Interferer::new(AgentId::from("r"), Vec3::zero(), InterfererPolicy::external(), 1.8);
        let applied = r.set_external_command(Vec3::new(3.0, 4.0, 0.0));
        assert!((applied.norm() - 1.8).abs() < 1e-12);
        r.advance(&[], 0.0, 0.1, true);
        assert!((r.velocity.norm() - 1.8).abs() < 1e-12);
    }

    #[test]
    fn removal_time() {
        let mut p = InterfererPolicy::pursuit();
        p.remove_time = Some(1.0);
        let mut r = Interferer::new(AgentId::from("r"), Vec3::zero(), p, 1.8);
        r.advance(&[Vec3::new(5.0, 0.0, 0.0)], 0.9, 0.1, true);
        assert!(!r.removed);
        r.advance(&[Vec3::new(5.0, 0.0, 0.0)], 1.0, 0.1, true);
        assert!(r.removed);
    }
}
