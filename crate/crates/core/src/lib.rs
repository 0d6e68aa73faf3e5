//! Hardware-free first-person recorder.
//!
//! Simulated sensors feed an enrichment pipeline whose output is written to
//! a hash-chained, attested session store.

pub mod enrich;
pub mod integrity;
pub mod model;
pub mod pipeline;
pub mod sim;
pub mod store;

pub use pipeline::{ActiveSession, Pipeline, RecordError, RecordOutcome, Recorder};
