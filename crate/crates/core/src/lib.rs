//! GP-MOOD: Gaussian-process reconstruction with a posteriori MOOD limiting
//! for the 1D/2D compressible Euler equations.

pub mod cli;
pub mod dd;
pub mod error;
pub mod euler;
pub mod gp;
pub mod mesh;
pub mod mood;
pub mod problems;
pub mod reconstruct;
pub mod symmetry;
pub mod timeint;

pub use error::{Error, Result};
