//! Decentralized UAV swarm control with fast collective evasion.
//!
//! * [`forces`]: cohesion, separation, alignment, escape and following
//!   forces and the desired-position update, generic over [`Scalar`].
//! * [`protocol`]: Normal/Active/Passive mode machine and alert messages.
//! * [`net`]: range-limited lossy message delivery.
//! * [`sim`]: the fixed-step world loop.
//! * [`metrics`]: recording, reaction times and CSV/SVG export.
//! * [`study`]: frozen-lattice settling, alert spread and calibration.

pub mod error;
pub mod estimate;
pub mod forces;
pub mod metrics;
pub mod net;
pub mod params;
pub mod protocol;
pub mod scalar;
pub mod sim;
pub mod study;
pub mod types;
pub mod vec3;

pub use error::{Error, Result};
pub use forces::{DirectionMemory, ForceModel};
pub use params::SwarmParams;
pub use protocol::{AlertMessage, ProtocolConfig, ProtocolState};
pub use scalar::Scalar;
pub use types::{AgentId, AgentState, Mode, Observation, ObservationKind};
pub use vec3::Vec3;

pub type Vec3f = Vec3<f64>;
pub type Vec3f32 = Vec3<f32>;
pub type Params = SwarmParams<f64>;
pub type Params32 = SwarmParams<f32>;
pub type Model = ForceModel<f64>;
pub type Model32 = ForceModel<f32>;
