//! Numerics for Hardy spaces attached to products of Bessel heat semigroups.
//!
//! The crate evaluates modified Bessel functions, power-weight measures and
//! the associated heat kernels, builds admissible coverings of the orthant,
//! decomposes functions into local atoms, estimates local maximal functions
//! and checks the kernel conditions that identify the Hardy space with an
//! atomic space.

pub mod atoms;
pub mod config;
pub mod covering;
pub mod error;
pub mod func;
pub mod kernel;
pub mod maximal;
pub mod measure;
pub mod par;
pub mod quad;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
