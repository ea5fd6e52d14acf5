//! Live piloting bridge: streams world frames over a WebSocket and accepts
//! interferer velocity and run-control commands.
//!
//! [`Session`] owns the world and is fully synchronous; [`server`] wraps it
//! in a tokio task that steps in real time and talks to clients only via a
//! command queue and a frame broadcast.

pub mod command;
pub mod frame;
pub mod server;
pub mod session;

pub use command::{parse_command, Command, Reply};
pub use frame::{decode_frame, encode_frame, frame_stride, StateFrame, MAX_FRAME_RATE};
pub use server::{router, serve, spawn, LiveState, ServeOptions};
pub use session::Session;
