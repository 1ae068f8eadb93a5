pub mod cli;
pub mod error;
pub mod estimate;
pub mod exposure;
pub mod graph;
pub mod io;
pub mod panel;
pub mod pipeline;
pub mod synth;
pub mod theory;

pub use error::{Error, Result};
