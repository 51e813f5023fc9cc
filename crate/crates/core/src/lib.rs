pub mod data;
pub mod error;
pub mod global_explain;
pub mod lime;
pub mod limeout;
pub mod metrics;
pub mod models;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
