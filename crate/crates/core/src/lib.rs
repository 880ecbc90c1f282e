//! Linear Rayleigh-Taylor instability of two rotating compressible layers.
//!
//! The pipeline runs from the hydrostatic column ([`equilibrium`]) through
//! the discrete energies ([`forms`]) and their smallest eigenvalue
//! ([`eigen`]) to the rotating growth rate ([`dispersion`]). Growing modes
//! ([`modes`]) feed Fourier synthesis ([`synthesis`]) and are cross-checked
//! by direct time integration ([`evolve`]).

pub mod banded;
pub mod dispersion;
pub mod eigen;
pub mod equilibrium;
pub mod error;
pub mod evolve;
pub mod forms;
pub mod grid;
pub mod hermite;
pub mod law;
pub mod modes;
pub mod quadrature;
pub mod series;
pub mod synthesis;

pub use error::{Error, Result};
