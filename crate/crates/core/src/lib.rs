pub mod altmodels;
pub mod chimera;
pub mod cnf;
pub mod error;
pub mod exact;
pub mod graph;
pub mod idcode;
pub mod ising;
pub mod report;

pub use error::{Error, Result};
