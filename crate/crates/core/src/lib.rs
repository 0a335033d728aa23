//! Piezoresistive tactile sensing toolkit: taxel physics, synthetic grasp
//! data, and the object-recognition study built on it (classifier
//! comparison, leave-one-out evaluation, failure groups, resolution sweep).

pub mod dataset;
pub mod error;
pub mod eval;
pub mod grasp;
pub mod learn;
pub mod sensor;

pub use error::{Error, Result};
