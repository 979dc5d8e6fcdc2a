pub mod authdict;
pub mod codec;
pub mod crl;
pub mod crs;
pub mod crt;
pub mod demo;
pub mod error;
pub mod hcrs;
pub mod model;
pub mod ocsp;
pub mod primitives;
pub mod sim;

pub use error::Error;
