//! Composition workbench: HTTP service and command-line front end.

pub mod cli;
pub mod service;
