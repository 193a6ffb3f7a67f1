//! Command implementations and the chat server behind the `parlor` binary.

pub mod commands;
pub mod server;
