//! Virtual forces of the swarm model and the evasion extension.
//!
//! Everything here is a pure function of the observations handed in. A
//! [`ForceModel`] wraps validated [`SwarmParams`] so the per-call hot path
//! does not re-check parameters.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::params::{inv_sqrt, SwarmParams};
use crate::scalar::Scalar;
use crate::types::{AgentId, AgentState, Mode, Observation};
use crate::vec3::Vec3;

/// Speeds below this (m/s) have no usable heading for the following force.
pub const FOLLOWING_SPEED_TOLERANCE: f64 = 1e-6;

/// Last known unit direction towards each interferer, used when a relative
/// position collapses to zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DirectionMemory<T> {
    dirs: BTreeMap<AgentId, Vec3<T>>,
}

impl<T: Scalar> DirectionMemory<T> {
    pub fn new() -> Self {
        Self {
            dirs: BTreeMap::new(),
        }
    }

    /// Remembers the direction of every non-degenerate observation.
    pub fn record(&mut self, observations: &[Observation<T>]) {
        for o in observations {
            if let Some(u) = o.relative_position.normalized() {
                self.dirs.insert(o.source.clone(), u);
            }
        }
    }

    /// Stored direction for `id`, falling back to +x.
    pub fn direction(&self, id: &AgentId) -> Vec3<T> {
        self.dirs.get(id).copied().unwrap_or_else(Vec3::unit_x)
    }
}

/// Validated force model. Holds both the base and the Passive-mode gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceModel<T> {
    base: SwarmParams<T>,
    passive: SwarmParams<T>,
}

impl<T: Scalar> ForceModel<T> {
    pub fn new(params: SwarmParams<T>) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            base: params,
            passive: params.passive(),
        })
    }

    pub fn params(&self) -> &SwarmParams<T> {
        &self.base
    }

    /// Gains used for cohesion and separation in `mode`.
    pub fn params_for(&self, mode: Mode) -> &SwarmParams<T> {
        match mode {
            Mode::Passive => &self.passive,
            Mode::Normal | Mode::Active => &self.base,
        }
    }

    pub fn cohesion_profile(&self, dist: T) -> T {
        cohesion_profile(dist, &self.base)
    }

    pub fn separation_profile(&self, dist: T) -> T {
        separation_profile(dist, &self.base)
    }

    pub fn escape_profile(&self, dist: T) -> T {
        escape_profile(dist, &self.base)
    }

    pub fn following_weight(&self, speed: T) -> T {
        following_weight(speed, &self.base)
    }

    pub fn cohesion_force(&self, neighbors: &[Observation<T>]) -> Vec3<T> {
        cohesion_force(neighbors, &self.base)
    }

    pub fn separation_force(&self, neighbors: &[Observation<T>]) -> Vec3<T> {
        separation_force(neighbors, &self.base)
    }

    pub fn alignment_force(&self, neighbors: &[Observation<T>]) -> Vec3<T> {
        alignment_force(neighbors, &self.base)
    }

    pub fn escape_force(&self, interferers: &[Observation<T>], memory: &DirectionMemory<T>) -> Vec3<T> {
        escape_force(interferers, &self.base, memory)
    }

    pub fn following_force(&self, neighbors: &[Observation<T>]) -> Vec3<T> {
        following_force(neighbors, &self.base)
    }

    /// Total virtual force for an agent in `mode`.
    ///
    /// Normal: cohesion + separation + alignment. Active adds the escape
    /// force. Passive adds the following force and evaluates cohesion and
    /// separation with the scaled gains.
    pub fn total_force(
        &self,
        mode: Mode,
        neighbors: &[Observation<T>],
        interferers: &[Observation<T>],
        memory: &DirectionMemory<T>,
    ) -> Vec3<T> {
        let p = self.params_for(mode);
        let swarm = cohesion_force(neighbors, p)
            + separation_force(neighbors, p)
            + alignment_force(neighbors, &self.base);
        match mode {
            Mode::Normal => swarm,
            Mode::Active => swarm + escape_force(interferers, &self.base, memory),
            Mode::Passive => swarm + following_force(neighbors, &self.base),
        }
    }

    /// Next desired position from constant-acceleration motion over `dt`.
    pub fn desired_position(&self, state: &AgentState<T>, force: Vec3<T>, dt: T) -> Vec3<T> {
        desired_position(state.position, state.velocity, force, dt, &self.base)
    }
}

/// `dist - l` clamped from below at `l_min`.
#[inline]
fn clamped_gap<T: Scalar>(dist: T, p: &SwarmParams<T>) -> T {
    if dist > p.l + p.l_min {
        dist - p.l
    } else {
        p.l_min
    }
}

pub fn cohesion_profile<T: Scalar>(dist: T, p: &SwarmParams<T>) -> T {
    let gap = dist - p.l;
    if gap <= p.d_min {
        T::zero()
    } else if gap <= p.d_c {
        let q = gap - p.d_min;
        p.k_1c * q * q
    } else {
        p.k_2c * (p.k_3c * (gap - p.d_c)).ln_1p() + p.delta_c()
    }
}

pub fn separation_profile<T: Scalar>(dist: T, p: &SwarmParams<T>) -> T {
    let gap = clamped_gap(dist, p);
    if gap >= p.d_max {
        T::zero()
    } else if gap > p.d_s {
        let q = gap - p.d_max;
        p.k_1s * q * q
    } else {
        p.k_2s * (inv_sqrt(gap) - inv_sqrt(p.d_max)) + p.delta_s()
    }
}

pub fn escape_profile<T: Scalar>(dist: T, p: &SwarmParams<T>) -> T {
    let gap = clamped_gap(dist, p);
    if gap < p.d_e2 {
        p.k_e * (inv_sqrt(gap) - inv_sqrt(p.d_e2))
    } else {
        T::zero()
    }
}

pub fn following_weight<T: Scalar>(speed: T, p: &SwarmParams<T>) -> T {
    p.k_f * (p.k_v * speed + p.d_f).ln()
}

/// Mean of `weight * direction` over the terms; zero for no terms.
pub fn directional_mean<T: Scalar>(terms: impl IntoIterator<Item = (T, Vec3<T>)>) -> Vec3<T> {
    let mut sum = Vec3::zero();
    let mut n = 0usize;
    for (w, dir) in terms {
        sum += dir * w;
        n += 1;
    }
    if n == 0 {
        sum
    } else {
        sum / T::from_usize(n).expect("count fits scalar")
    }
}

/// `(distance, unit direction)` of every non-degenerate observation.
fn bearings<T: Scalar>(obs: &[Observation<T>]) -> impl Iterator<Item = (T, Vec3<T>)> + '_ {
    obs.iter().filter_map(|o| {
        let d = o.relative_position.norm();
        o.relative_position.normalized().map(|u| (d, u))
    })
}

pub fn cohesion_force<T: Scalar>(neighbors: &[Observation<T>], p: &SwarmParams<T>) -> Vec3<T> {
    directional_mean(bearings(neighbors).map(|(d, u)| (cohesion_profile(d, p), u)))
}

pub fn separation_force<T: Scalar>(neighbors: &[Observation<T>], p: &SwarmParams<T>) -> Vec3<T> {
    -directional_mean(bearings(neighbors).map(|(d, u)| (separation_profile(d, p), u)))
}

pub fn alignment_force<T: Scalar>(neighbors: &[Observation<T>], p: &SwarmParams<T>) -> Vec3<T> {
    directional_mean(neighbors.iter().map(|o| (p.k_a, o.estimated_velocity)))
}

pub fn escape_force<T: Scalar>(
    interferers: &[Observation<T>],
    p: &SwarmParams<T>,
    memory: &DirectionMemory<T>,
) -> Vec3<T> {
    -directional_mean(interferers.iter().map(|o| {
        let d = o.relative_position.norm();
        let u = o
            .relative_position
            .normalized()
            .unwrap_or_else(|| memory.direction(&o.source));
        (escape_profile(d, p), u)
    }))
}

pub fn following_force<T: Scalar>(neighbors: &[Observation<T>], p: &SwarmParams<T>) -> Vec3<T> {
    let tol = T::lit(FOLLOWING_SPEED_TOLERANCE);
    directional_mean(neighbors.iter().map(|o| {
        let speed = o.estimated_velocity.norm();
        if speed < tol {
            (T::zero(), Vec3::zero())
        } else {
            (following_weight(speed, p), o.estimated_velocity / speed)
        }
    }))
}

/// `p + v dt + k_pa a dt^2 / 2` with `a = F / m`.
pub fn desired_position<T: Scalar>(
    position: Vec3<T>,
    velocity: Vec3<T>,
    force: Vec3<T>,
    dt: T,
    p: &SwarmParams<T>,
) -> Vec3<T> {
    debug_assert!(dt > T::zero());
    let accel = force / p.virtual_mass();
    position + velocity * dt + accel * (T::half() * p.k_pa() * dt * dt)
}
