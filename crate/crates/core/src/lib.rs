#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod estimator;
pub mod measure;
pub mod params;
pub mod quadrature;
pub mod qudit;
pub mod symplectic;
pub mod theta;
pub mod wigner;

pub use params::{CodeParams, ParamsError, PhasePoint};
