pub mod error;
pub mod fields;
pub mod norms;
pub mod operators;
pub mod quadrature;
pub mod sharpness;
pub mod specfun;

pub use error::{Error, Result};
