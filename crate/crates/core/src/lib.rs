//! Numerical laboratory for the symmetric rank-one spiked tensor model.
//!
//! The crate samples Gaussian symmetric tensors, finds tensor eigenpairs by
//! shifted power iteration, measures the spectra of tensor contractions and
//! compares them with the deterministic large-`N` predictions: the
//! semicircle law of contractions, the fixed-point characterisation of the
//! maximum-likelihood spectral norm and alignment, and the closed-form phase
//! transition thresholds.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod landscape;
pub mod linalg;
mod roots;
pub mod spectral;
pub mod tensor;

pub use error::{Error, Result};
