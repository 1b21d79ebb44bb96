//! Steady states, dynamics and thermodynamics of a three-mode bosonic
//! absorption refrigerator built from Josephson-coupled resonators.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod lindblad;
pub mod linalg;
pub mod model;
pub mod output;
pub mod presets;
pub mod protocols;
pub mod sparse;
pub mod thermo;

pub use error::{Error, Result};
