//! Library side of the `antiphase` binary, exposed so the integration and
//! acceptance tests can drive the same code paths.

pub mod commands;
pub mod config;
pub mod table;
pub mod verify;
