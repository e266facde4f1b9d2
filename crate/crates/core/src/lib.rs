//! Salience-affected neural networks.
//!
//! A single-hidden-layer perceptron whose per-node thresholds are moved by a scalar
//! salience signal during training, and which reports a summed "reverse salience"
//! readout at test time. Inputs are NMF coefficients of grayscale face images.
//!
//! - [`numerics`]: dense matrices, seeded RNG, correlation statistics
//! - [`nmf`]: multiplicative-update NMF, reconstruction and fixed-basis encoding
//! - [`sann`]: the network, backprop, threshold plasticity and reverse salience
//! - [`dataset`]: PGM images, synthetic faces, feature scaling
//! - [`experiments`]: seeded runners producing CSV reports with verdicts
//! - [`cli`]: the `sann` command-line front end

pub mod cli;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod nmf;
pub mod numerics;
pub mod sann;

pub use error::{Result, SannError};
