//! Configuration and subcommands of the `exitgrid` binary.

pub mod commands;
pub mod config;
