//! Simulation and stability certificates for the one-dimensional controlled
//! Landau–Lifshitz equation on a nanowire with Neumann ends.

pub mod cli_io;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod grid_field;
pub mod integrator;
pub mod lyapunov;

pub use error::{Error, Result};
