//! System-level simulator of an integrated terrestrial + LEO-satellite cellular
//! network, coupled with a constrained bandit-feedback online optimizer that
//! learns, per traffic condition, the best configuration of bandwidth split,
//! shutdown thresholds, and load-aware association weight.
//!
//! The crate is organized around the experiment pipeline:
//!
//! - [`scenario`]: deployment geometry (hexagonal terrestrial grid, one
//!   satellite beam), diurnal UE placement, and demand sampling.
//! - [`channel`]: large-scale link gains, RSRP, and SINR.
//! - [`radio`]: bandwidth partitioning, PRB allocation, cell load, throughput.
//! - [`energy`]: terrestrial base-station power model and energy aggregation.
//! - [`snapshot`]: frozen network realizations and per-snapshot link tables.
//! - [`heuristic`]: the four-step arm-evaluation procedure (max-RSRP init,
//!   pricing association, satellite-offload shutdown, cost/constraint).
//! - [`bandit`]: the constrained online-mirror-descent learner over the arm
//!   grid, plus oracle/regret accounting.
//! - [`harness`]: corpus generation, cost calibration, training, benchmark
//!   replay, evaluation, oracle sweeps, CSV/plot export.
//!
//! See the `examples/` directory for one runnable example per capability, and
//! the `ntnopt` binary for the equivalent subcommand CLI.

pub mod bandit;
pub mod channel;
pub mod config;
pub mod energy;
mod error;
pub mod harness;
pub mod heuristic;
pub mod radio;
pub mod scenario;
pub mod seeds;
pub mod snapshot;
pub mod units;

pub use error::{Error, Result};
