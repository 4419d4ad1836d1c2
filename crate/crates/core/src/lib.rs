pub mod capsnet;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod encoder;
pub mod error;
pub mod fusion;
pub mod model;
pub mod ndtensor;
pub mod pipeline;
pub mod text;
pub mod trainer;

pub use error::{Error, Result};
