//! File formats, parallel drivers, rendering and the command line for
//! `tropcount-core`.

pub mod cli;
pub mod error;
pub mod pipeline;
pub mod problem;
pub mod render;
pub mod result;

pub use error::{ErrorCode, Failure};
