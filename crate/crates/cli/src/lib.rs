//! Scenario files, output artifacts and the `hypstab` commands.

pub mod commands;
pub mod error;
pub mod output;
pub mod scenario;
