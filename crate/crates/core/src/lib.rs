pub mod adaptive;
pub mod classic;
pub mod error;
pub mod garrote;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod path;
pub mod penalty;
pub mod simulate;
pub mod tuning;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
