//! Description-length accounting for small feed-forward networks.
//!
//! The pipeline: build a network and data ([`network`]), assemble observed
//! and population Fisher information matrices from exact Jacobians ([`fim`]),
//! put a bi-parametric prior on parameter space and measure its volume
//! ([`prior`]), and combine everything into a per-term razor report
//! ([`razor`]). [`spectral`] connects the razor to the Fisher eigenvalue
//! distribution and its random-matrix limits; [`experiments`] holds the
//! closed-form comparison curves and sweep harnesses.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod fim;
pub mod linalg;
pub mod models;
pub mod network;
pub mod prior;
pub mod razor;
pub mod spectral;
pub mod seeds;

mod quad;

pub use error::{Error, Result};
