//! Game-side gateway, bot SDK with the reference Lina bot, and the ranked
//! match harness.

pub mod botkit;
pub mod gateway;
pub mod harness;
