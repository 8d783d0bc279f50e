//! Operational surface of the simulator: config loading, the `verify` checks,
//! the socket protocol and the WebSocket service.

pub mod config;
pub mod protocol;
pub mod server;
pub mod verify;
