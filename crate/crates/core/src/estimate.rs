use std::collections::BTreeMap;

use crate::scalar::Scalar;
use crate::types::AgentId;
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Track<T> {
    position: Vec3<T>,
    time: T,
    velocity: Vec3<T>,
}

/// Velocity of observed objects from consecutive position fixes.
///
/// Each new fix yields the finite difference against the previous fix of
/// the same object, blended as `alpha * raw + (1 - alpha) * previous`. The
/// first fix of an object reports zero velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityEstimator<T> {
    alpha: T,
    tracks: BTreeMap<AgentId, Track<T>>,
}

impl<T: Scalar> VelocityEstimator<T> {
    pub fn new(alpha: T) -> Self {
        Self {
            alpha,
            tracks: BTreeMap::new(),
        }
    }

    pub fn update(&mut self, id: &AgentId, position: Vec3<T>, now: T) -> Vec3<T> {
        match self.tracks.get_mut(id) {
            Some(tr) => {
                let elapsed = now - tr.time;
                if elapsed > T::zero() {
                    let raw = (position - tr.position) / elapsed;
                    tr.velocity = raw * self.alpha + tr.velocity * (T::one() - self.alpha);
                    tr.position = position;
                    tr.time = now;
                }
                tr.velocity
            }
            None => {
                self.tracks.insert(
                    id.clone(),
                    Track {
                        position,
                        time: now,
                        velocity: Vec3::zero(),
                    },
                );
                Vec3::zero()
            }
        }
    }

    pub fn forget(&mut self, id: &AgentId) {
        self.tracks.remove(id);
    }
}
