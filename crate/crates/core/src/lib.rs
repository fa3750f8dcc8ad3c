//! Numerical laboratory for entanglement between two branch-superposed masses
//! coupled through a single bosonic mediator mode.

pub mod audit;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod metrics;
pub mod model;
pub mod newtonian;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
