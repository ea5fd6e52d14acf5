//! Fixed-step simulation of the swarm, its interferers and the network.

pub mod config;
pub mod interferer;
pub mod motion;
pub mod sensing;
pub mod world;

pub use config::{
    AgentSpec, BaselineConfig, InterfererPolicy, InterfererSpec, PolicyKind, PursuitTarget, Scenario,
    SensingConfig, INTERFERER_SPEED_RATIO,
};
pub use interferer::{pursuit_velocity, Interferer};
pub use motion::{apply_motion, MotionLimits};
pub use sensing::{sense, Sensed, SensorState, Snapshot, Viewpoint};
pub use world::{Agent, SentMessage, World};
