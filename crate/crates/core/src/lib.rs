pub mod artifacts;
pub mod axis;
pub mod corpus;
pub mod error;
pub mod export;
pub mod fronts;
pub mod graph;
pub mod hubs;
pub mod mainpath;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod selection;
pub mod synth;

pub use error::{Error, Result};
