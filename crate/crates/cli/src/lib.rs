//! Experiment harness behind the `asss` binary: parameter sweeps over the
//! methods, mesh reports, eigenvalue scatters and matrix export.

pub mod bench;
pub mod commands;
