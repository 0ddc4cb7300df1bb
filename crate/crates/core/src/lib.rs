//! Open-pit mine planning under geological uncertainty.
//!
//! The pipeline runs from drill samples to an ensemble of interpolated block
//! models, through ultimate-pit shells and staging, to an evolutionary
//! stage/bench schedule whose economics are replayed on every ensemble member.

pub mod block_model;
mod csvio;
pub mod error;
pub mod grade_ensemble;
pub mod graph;
pub mod pipeline;
pub mod pit;
pub mod scheduler;
pub mod staging;
pub mod stats;
pub mod uncertainty;

pub use error::{Error, Result};
