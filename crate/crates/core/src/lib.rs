//! Mean-field, fluctuation and exact permutation-symmetric models of a
//! pumped spin ensemble with one-axis twisting coupled to a lossy cavity.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dicke;
pub mod error;
pub mod fluctuations;
pub mod meanfield;
pub mod model;
pub mod ode;

pub use error::{Error, Result};
pub use model::{ModelParams, Phase};
