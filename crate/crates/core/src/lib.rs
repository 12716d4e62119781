pub mod copula;
pub mod error;
pub mod fbm;
pub mod quad;

pub use error::{Error, Result};
pub mod harness;
pub mod metrics;
pub mod regression;
pub mod sim;
pub mod spectral;
