pub mod curve;
pub mod error;
pub mod export;
pub mod fidelities;
pub mod montecarlo;
pub mod optimize;
pub mod phase_space;
pub mod quadrature;
pub mod scheme;
pub mod validation;

pub use error::{Error, Result};
