pub mod error;
pub mod harness;
pub mod integrate;
pub mod io;
pub mod lp;
pub mod model;
pub mod parallel;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
