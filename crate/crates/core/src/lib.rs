//! Operator learning with branch-trunk networks whose trunk sees a fixed
//! Chebyshev tensor-product dictionary instead of raw coordinates.
//!
//! The crate bundles everything needed to train and compare three trunk
//! variants (identity, Fourier, Chebyshev) on five benchmark operators:
//!
//! - [`embedding`]: parameter-free coordinate dictionaries
//! - [`nn`] and [`adam`]: a small dense network engine with exact gradients
//! - [`model`]: the branch-trunk factorization and its loss
//! - [`datagen`]: finite-difference and ODE data generators
//! - [`eval`] and [`diagnostics`]: error metrics, spectra, Gram conditioning
//! - [`train`], [`config`], [`format`]: the training loop and on-disk formats

pub mod adam;
pub mod config;
pub mod datagen;
pub mod diagnostics;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod format;
pub mod linalg;
pub mod model;
pub mod nn;
pub mod train;

pub use error::{Error, Result};
