#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
//! Tensor-network estimation-of-distribution algorithms (EDAs) for binary
//! optimization.
//!
//! The crate is organised around the EDA loop: a [`engine::SolutionBank`] of
//! evaluated solutions feeds a selection operator, the selected parents train a
//! generative model ([`mps::Mps`] Born machine, positive MPS, or a chain
//! Bayesian network), the model is sampled, children are mutated and the new
//! strings are evaluated against a [`problems::Problem`].
//!
//! [`diagnostics`] computes exact KL divergences between the trained models and
//! the Boltzmann distribution the training data was drawn from, including the
//! bit-flip diffused model.

pub mod bits;
pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod models;
pub mod mps;
pub mod ordering;
pub mod problems;
pub mod rng;

pub use bits::BitString;
pub use error::{Error, Result};
pub use mps::{Mode, Mps};
