//! Scenario CLI, file formats, and evaluation harness around `sense-core`.
//!
//! The library half exists so integration tests can exercise config
//! resolution and exporters directly; the binary is a thin `clap` front end
//! over [`commands::dispatch`].

pub mod cli;
pub mod commands;
pub mod config;
pub mod export;
