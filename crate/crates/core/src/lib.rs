pub mod error;
pub mod graph;
pub mod learn;
pub mod pipeline;
pub mod rng;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
