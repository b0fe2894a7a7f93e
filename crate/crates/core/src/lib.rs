//! Joint satellite-gateway deployment and SDN controller placement.
//!
//! The crate is organised bottom-up:
//!
//! * [`topology`]: annotated terrestrial networks, GraphML ingestion and
//!   failure-probability sampling.
//! * [`paths`]: shortest paths, Yen's k-shortest paths and the latency and
//!   reliability tables every objective reads from.
//! * [`objectives`]: gateway and controller cost/utility set functions with
//!   induced assignments.
//! * [`solvers`]: double greedy, threshold greedy, exhaustive enumeration
//!   and the two-stage joint pipeline.
//! * [`experiment`]: the experiment harness, report emission and figure
//!   series.

pub mod error;
pub mod experiment;
pub mod objectives;
pub mod paths;
pub mod solvers;
pub mod topology;

pub use error::{Error, Result};
