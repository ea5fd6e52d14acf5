//! Gains and distances of the swarm force model and the evasion law.
//!
//! All distances are metres. Cohesion, separation and escape profiles are
//! evaluated on the distance between agent centres minus the safety radius
//! `l`. Forces are dimensionless and converted to acceleration with a unit
//! virtual mass.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Every scalar of the force model and the evasion law.
///
/// Deserialization accepts partial overrides: missing fields fall back to the
/// shipped defaults and unknown fields are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwarmParams<T> {
    /// Safety radius around an agent.
    pub l: T,
    /// Floor of the clamped separation and escape distances.
    pub l_min: T,

    /// Distance at which cohesion starts to act.
    pub d_min: T,
    /// Cohesion switches from quadratic to logarithmic growth here.
    pub d_c: T,
    pub k_1c: T,
    pub k_2c: T,
    pub k_3c: T,

    /// Separation cutoff.
    pub d_max: T,
    /// Separation switches from the steep to the quadratic branch here.
    pub d_s: T,
    pub k_1s: T,
    pub k_2s: T,

    pub k_a: T,

    /// Interferer distance that triggers the Active mode.
    pub d_e1: T,
    /// Escape-force cutoff and evasion release distance.
    pub d_e2: T,
    pub k_e: T,

    pub k_f: T,
    pub k_v: T,
    pub d_f: T,

    /// Multiplier on `k_1c`, `k_2c`, `k_1s`, `k_2s` while Passive.
    pub passive_gain_scale: T,

    /// Neighbour interaction radius.
    pub r_b: T,

    /// Swarm speed limit (m/s).
    pub v_max: T,
    /// Acceleration limit of the tracker (m/s^2).
    pub a_max: T,
    /// Velocity damping of the point-mass tracker (1/s).
    pub tracker_damping: T,
}

impl<T: Scalar> Default for SwarmParams<T> {
    fn default() -> Self {
        let c = T::lit;
        Self {
            l: c(0.6),
            l_min: c(0.1),
            d_min: c(0.8),
            d_c: c(2.0),
            k_1c: c(0.05),
            k_2c: c(0.1),
            k_3c: c(1.0),
            d_max: c(4.2),
            d_s: c(2.5),
            k_1s: c(0.2),
            k_2s: c(30.0),
            k_a: c(0.5),
            d_e1: c(8.0),
            d_e2: c(11.0),
            k_e: c(30.0),
            k_f: c(1.0),
            k_v: c(1.0),
            d_f: c(1.0),
            passive_gain_scale: c(1.5),
            r_b: c(8.0),
            v_max: c(2.0),
            a_max: c(2.0),
            tracker_damping: c(0.5),
        }
    }
}

impl<T: Scalar> SwarmParams<T> {
    /// Fixed product `k_pv * k_va` of the desired-position update (m/s^2).
    pub fn k_pa(&self) -> T {
        T::one()
    }

    /// Fixed virtual mass.
    pub fn virtual_mass(&self) -> T {
        T::one()
    }

    /// Offset that joins the logarithmic cohesion branch to the quadratic one.
    pub fn delta_c(&self) -> T {
        let d = self.d_c - self.d_min;
        self.k_1c * d * d
    }

    /// Offset that joins the steep separation branch to the quadratic one.
    pub fn delta_s(&self) -> T {
        let q = self.d_s - self.d_max;
        self.k_1s * q * q - self.k_2s * (inv_sqrt(self.d_s) - inv_sqrt(self.d_max))
    }

    /// Copy with the cohesion and separation gains scaled for Passive mode.
    pub fn passive(&self) -> Self {
        let s = self.passive_gain_scale;
        Self {
            k_1c: self.k_1c * s,
            k_2c: self.k_2c * s,
            k_1s: self.k_1s * s,
            k_2s: self.k_2s * s,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields: [(&'static str, T); 23] = [
            ("l", self.l),
            ("l_min", self.l_min),
            ("d_min", self.d_min),
            ("d_c", self.d_c),
            ("k_1c", self.k_1c),
            ("k_2c", self.k_2c),
            ("k_3c", self.k_3c),
            ("d_max", self.d_max),
            ("d_s", self.d_s),
            ("k_1s", self.k_1s),
            ("k_2s", self.k_2s),
            ("k_a", self.k_a),
            ("d_e1", self.d_e1),
            ("d_e2", self.d_e2),
            ("k_e", self.k_e),
            ("k_f", self.k_f),
            ("k_v", self.k_v),
            ("d_f", self.d_f),
            ("passive_gain_scale", self.passive_gain_scale),
            ("r_b", self.r_b),
            ("v_max", self.v_max),
            ("a_max", self.a_max),
            ("tracker_damping", self.tracker_damping),
        ];
        for (field, v) in fields {
            if !v.is_finite() {
                return invalid(field, "must be finite");
            }
            if v < T::zero() {
                return invalid(field, "must be non-negative");
            }
        }
        if self.l_min <= T::zero() {
            return invalid("l_min", "must be positive");
        }
        if self.d_min >= self.d_c {
            return invalid("d_min", "must be below d_c");
        }
        if self.d_s <= T::zero() || self.d_s >= self.d_max {
            return invalid("d_s", "must satisfy 0 < d_s < d_max");
        }
        if self.d_e1 <= T::zero() || self.d_e1 > self.d_e2 {
            return invalid("d_e1", "must satisfy 0 < d_e1 <= d_e2");
        }
        if self.d_f < T::one() {
            return invalid("d_f", "must be at least 1");
        }
        if self.v_max <= T::zero() {
            return invalid("v_max", "must be positive");
        }
        if self.a_max <= T::zero() {
            return invalid("a_max", "must be positive");
        }
        if self.r_b <= T::zero() {
            return invalid("r_b", "must be positive");
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> SwarmParams<U> {
        let c = |v: T| U::from(v).expect("scalar cast");
        SwarmParams {
            l: c(self.l),
            l_min: c(self.l_min),
            d_min: c(self.d_min),
            d_c: c(self.d_c),
            k_1c: c(self.k_1c),
            k_2c: c(self.k_2c),
            k_3c: c(self.k_3c),
            d_max: c(self.d_max),
            d_s: c(self.d_s),
            k_1s: c(self.k_1s),
            k_2s: c(self.k_2s),
            k_a: c(self.k_a),
            d_e1: c(self.d_e1),
            d_e2: c(self.d_e2),
            k_e: c(self.k_e),
            k_f: c(self.k_f),
            k_v: c(self.k_v),
            d_f: c(self.d_f),
            passive_gain_scale: c(self.passive_gain_scale),
            r_b: c(self.r_b),
            v_max: c(self.v_max),
            a_max: c(self.a_max),
            tracker_damping: c(self.tracker_damping),
        }
    }
}

#[inline]
pub(crate) fn inv_sqrt<T: Scalar>(x: T) -> T {
    x.sqrt().recip()
}

fn invalid<R>(field: &'static str, reason: &str) -> Result<R> {
    Err(Error::InvalidParams {
        field,
        reason: reason.to_owned(),
    })
}
