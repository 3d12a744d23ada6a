//! Core of the solomid arena: the bot wire protocol, the deterministic
//! 1v1 mid-lane simulator, its data files and the built-in opponents.

pub mod builtin;
pub mod data;
pub mod geometry;
pub mod protocol;
pub mod sim;
