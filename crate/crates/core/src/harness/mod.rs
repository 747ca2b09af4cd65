//! Experiment harness: milestone steps, (n, k) sweeps, phase-transition
//! estimation and the built-in self-test. I/O lives in the CLI crate.

pub mod milestones;
pub mod phase;
pub mod selftest;
pub mod sweep;

pub use milestones::{Milestones, Omega};
pub use phase::{phase_estimate, PhaseEstimate, PhasePoint};
pub use sweep::{aggregate_rows, run_point, sweep, AggregateRow, KSpec, SweepRow, SweepSpec};

/// Crate version, recorded in output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
