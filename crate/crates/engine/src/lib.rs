//! Runs mpEAd systems as multi-population evolutionary algorithms.
//!
//! A [`FlatGraph`](mpead_core::FlatGraph) is compiled against a
//! [`Registry`](mpead_kernel::Registry) into an [`ExecutionPlan`], which a
//! [`Simulation`] then steps one synchronous generation at a time. Results
//! depend only on the graph and the [`RunConfig`]; the worker count never
//! changes them.

mod config;
mod error;
mod exec;
mod plan;
mod stats;

pub use config::{Emigrant, MigrationPolicy, PopulationOverride, Replace, RunConfig};
pub use error::{EngineError, Subject};
pub use exec::{run, CallRecord, GenerationReport, MigrationEvent, RunState, Simulation, TraceArg};
pub use plan::{compile, CompPlan, ExecutionPlan, InputPlan, InputSource, MigrationPlan, Pick, PopPlan, WriteMode, WritePlan};
pub use stats::{PopulationRow, RunStats};

pub use mpead_kernel as kernel;
