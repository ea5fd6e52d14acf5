//! Clamped point-mass tracker that moves an agent towards its desired
//! position.

use crate::types::AgentState;
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionLimits {
    pub v_max: f64,
    pub a_max: f64,
    /// Velocity damping (1/s) applied to the commanded velocity.
    pub damping: f64,
    /// Hold altitude.
    pub planar: bool,
}

/// One tracker step.
///
/// The commanded velocity `(desired - p) / dt`, minus `damping * dt * v`, is
/// reached subject to `|dv| <= a_max * dt` and then `|v| <= v_max`; the
/// agent then moves by `v * dt`.
pub fn apply_motion(state: &AgentState<f64>, desired: Vec3<f64>, dt: f64, lim: &MotionLimits) -> AgentState<f64> {
    debug_assert!(dt > 0.0);
    let mut command = (desired - state.position) / dt - state.velocity * (lim.damping * dt);
    if lim.planar {
        command.z = 0.0;
    }
    let dv = (command - state.velocity).clamp_norm(lim.a_max * dt);
    let mut velocity = (state.velocity + dv).clamp_norm(lim.v_max);
    if lim.planar {
        velocity.z = 0.0;
    }
    AgentState {
        position: state.position + velocity * dt,
        velocity,
        ..state.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{AgentId, Mode};

    fn at_rest() -> AgentState<f64> {
        AgentState {
            id: AgentId::from("a"),
            position: Vec3::zero(),
            velocity: Vec3::zero(),
            mode: Mode::Normal,
        }
    }

    const LIM: MotionLimits = MotionLimits {
        v_max: 2.0,
        a_max: 2.0,
        damping: 0.5,
        planar: true,
    };

    #[test]
    fn from_rest_towards_far_target() {
        // dv capped at a_max dt = 0.2, displacement 0.2 * 0.1
        let s = apply_motion(&at_rest(), Vec3::new(10.0, 0.0, 0.0), 0.1, &LIM);
        assert!((s.position.x - 0.02).abs() < 1e-15);
        assert!((s.velocity.x - 0.2).abs() < 1e-15);
    }

    #[test]
    fn saturates_at_v_max() {
        let mut s = at_rest();
        for _ in 0..200 {
            let target = s.position + Vec3::new(100.0, 0.0, 0.0);
            s = apply_motion(&s, target, 0.1, &LIM);
        }
        assert!((s.velocity.norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn holding_position_decays_velocity() {
        let mut s = at_rest();
        s.velocity = Vec3::new(1.0, 0.0, 0.0);
        let mut prev = 1.0;
        for _ in 0..20 {
            let p = s.position;
            s = apply_motion(&s, p, 0.1, &LIM);
            let v = s.velocity.norm();
            assert!(v <= prev && prev - v <= 0.2 + 1e-12);
            prev = v;
        }
        assert!(prev < 1e-12);
    }

    #[test]
    fn planar_holds_altitude() {
        let mut s = at_rest();
        s.position.z = 2.0;
        let s = apply_motion(&s, Vec3::new(1.0, 1.0, 5.0), 0.1, &LIM);
        assert_eq!(s.position.z, 2.0);
        assert_eq!(s.velocity.z, 0.0);
    }
}
