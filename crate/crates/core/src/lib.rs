//! Relativistic spin splitting of a neutral particle with electric and
//! magnetic dipole moments moving along static collinear fields.
//!
//! The closed-form spectrum lives in [`spectrum`]; [`oracle`] diagonalizes
//! the 4×4 Hamiltonian from [`dirac`] numerically as an independent check.

pub mod cli;
pub mod dirac;
pub mod error;
pub mod oracle;
pub mod output;
pub mod quantities;
pub mod spectrum;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
