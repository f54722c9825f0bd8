//! Command line and HTTP front end for the concept-flow engine.

pub mod commands;
pub mod server;
