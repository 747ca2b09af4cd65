//! Simulators for constrained random graph processes.
//!
//! * [`partition`]: union-find forest with special-vertex and forbidden-set rules.
//! * [`edge_stream`]: seeded uniform-without-replacement pair sequences.
//! * [`process`]: G(n,m), the k-process and the CDF-process, with snapshots and events.
//! * [`greedy_cut`]: edge-first greedy multiway cut and an exact small-instance oracle.
//! * [`cxy`]: the (C,x,y) rich-get-richer urn and its concentration bounds.
//! * [`stats`]: order statistics, susceptibility, run aggregation.
//! * [`harness`]: milestones, sweeps, phase-transition estimates, self-test.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cxy;
pub mod edge_stream;
pub mod error;
pub mod greedy_cut;
pub mod harness;
pub mod par;
pub mod partition;
pub mod process;
pub mod stats;

pub use error::{Error, Result};
