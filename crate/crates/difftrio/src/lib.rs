pub mod cases;
pub mod error;
pub mod fdm;
pub mod integrate;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod rc;
pub mod spectral;

pub use error::{Error, Result};
