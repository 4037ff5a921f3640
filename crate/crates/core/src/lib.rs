//! Geometric measures of quantum correlation for two-qubit states, and their
//! dynamics under local amplitude damping.

pub mod channels;
pub mod cli;
pub mod dynamics;
mod eigen;
pub mod error;
pub mod input;
pub mod measures;
pub mod random;
pub mod sphere;
pub mod state;
pub mod xstate;
