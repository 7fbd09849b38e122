//! Multiscale regularity analysis of periodic functions and distributions.
//!
//! The crate builds Littlewood-Paley style scale profiles `y -> ||T * psi_y||_p`
//! on a periodic grid, turns them into power-law exponents by log-log
//! regression, and uses the exponents to decide Besov membership, smoothness,
//! moderateness and negligibility of nets, and strong association.

pub mod association;
pub mod besov;
pub mod corpus;
pub mod error;
pub mod io;
pub mod json;
pub mod kernels;
pub mod nets;
pub mod scale;
pub mod spectral;

pub use error::{Error, Result};
