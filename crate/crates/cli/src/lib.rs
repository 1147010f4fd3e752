//! Library half of the `magnon` command: configuration, commands and the
//! file formats they read and write.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
