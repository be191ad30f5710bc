//! Incremental community detection on growing graphs.
//!
//! The crate maintains a weighted undirected graph that only grows between
//! time steps, clusters it with a multi-level local-moving modularity
//! optimizer, and, at every step after the first, uses *delta-screening* to
//! pick the subset of vertices worth re-evaluating given the batch of newly
//! inserted edges.
//!
//! Module map:
//!
//! * [`graph`]: the growing graph and edge batches.
//! * [`community`]: partitions, modularity and constant-time move gains.
//! * [`engine`]: local moving, coarsening and the multi-level driver.
//! * [`screening`]: selection of the re-evaluation set from a batch.
//! * [`pipeline`]: per-step orchestration in static, baseline or delta mode.
//! * [`stream_io`]: temporal edge-list ingestion, dedup and time binning.
//! * [`synth`]: planted-partition edge stream generator.
//! * [`metrics`]: NMI and time-saving summaries.
//! * [`cli`]: the command-line front end.

pub mod cli;
pub mod community;
pub mod engine;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod pipeline;
pub mod screening;
pub mod stream_io;
pub mod synth;

pub use community::{CommunityId, GainTable, Partition};
pub use engine::{EngineConfig, EvalSet, LevelTrace, VisitOrder};
pub use error::{Error, Result};
pub use graph::{DeltaBatch, DynamicGraph, VertexId};
pub use pipeline::{run_stream, Mode, StepInput, StreamRun, TimestepReport};
pub use screening::{ScreenReason, ScreenSet};
