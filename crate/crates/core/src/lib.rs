pub mod analytic;
pub mod deployment;
pub mod error;
pub mod fitting;
pub mod kernels;
pub mod montecarlo;
pub mod quadrature;
pub mod rng;
pub mod selfsim;
pub mod special;
pub mod stable;

pub use error::{Error, Result};
