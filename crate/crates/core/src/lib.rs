//! Fog overlay planning: gateway selection, functional areas and workload simulation.
//!
//! The crate covers the full planning pipeline and its evaluation:
//!
//! * [`overlay`]: random connected fog overlays, churn, latency to the Cloud.
//! * [`centrality`]: betweenness centrality (shortest-path counting).
//! * [`pareto`]: dominance and fast non-dominated sorting.
//! * [`decision`]: communication gateway selection from the Pareto fronts.
//! * [`clustering`]: spectral clustering of devices into functional areas.
//! * [`simulation`]: discrete-event sense-process-actuate simulation.
//! * [`harness`]: seeded experiment sweeps, stage timings and CSV output.
//!
//! Data-parallel loops (per-source centrality, per-gateway clustering,
//! replications) run on rayon when the `parallel` feature is enabled and
//! fall back to plain iterators otherwise. See [`Execution`].

pub mod centrality;
pub mod clustering;
pub mod decision;
pub mod eigen;
mod error;
mod exec;
pub mod harness;
pub mod overlay;
pub mod pareto;
pub mod rng;
pub mod simulation;
pub mod stats;

pub use error::{Error, Result};
pub use exec::Execution;
