//! Spectral solver and edge-singularity analyzer for the dbar-Neumann problem
//! on the edge domain in C^2.

pub mod cli;
pub mod config;
pub mod cutoff;
pub mod error;
pub mod geometry;
pub mod io;
pub mod quadrature;
pub mod singularity;
pub mod solver;
pub mod spectral;
pub mod traces;
pub mod verify;

pub use error::{EdgeError, Result};
