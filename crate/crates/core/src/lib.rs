pub mod cli;
pub mod complex;
pub mod construct;
pub mod develop;
pub mod error;
pub mod fleet;
pub mod raag;
pub mod separate;

pub use error::{Error, Result};
