//! # kme-core
//!
//! Kernel mean embeddings with Nyström compression.
//!
//! A kernel mean embedding represents a probability distribution as a single
//! element of the RKHS of a positive-definite kernel. The empirical
//! estimator averages feature maps over all `n` samples; this crate also
//! builds the Nyström estimator, which projects that average onto the span
//! of `m` randomly drawn landmark features and typically matches the
//! empirical error with `m` far below `n`.
//!
//! The crate is organized around:
//!
//! - [`kernels`] — kernel functions, Gram matrices, median-heuristic
//!   bandwidth selection;
//! - [`psd_linalg`] — symmetric PSD eigendecomposition and
//!   tolerance-thresholded pseudo-inversion;
//! - [`embedding`] — empirical / Nyström / uniform-landmark / herding
//!   embeddings, RKHS inner products, MMD-style distances, quadrature;
//! - [`spectral`] — effective dimension, high-probability error bounds, and
//!   subsample-size planning from spectral-decay assumptions;
//! - [`oracle`] — exact RKHS error against Gaussian mixtures in closed form,
//!   cross-validated by an independent Monte-Carlo estimator.
//!
//! All randomized operations take explicit seeds and are reproducible.

pub mod embedding;
mod error;
pub mod kernels;
mod matrix;
pub mod oracle;
pub mod psd_linalg;
pub mod spectral;

pub use embedding::{LandmarkDraw, WeightedEmbedding};
pub use error::{Error, Result};
pub use kernels::{KernelSpec, PointSet};
pub use matrix::Matrix;
pub use oracle::{GaussianMixture, McErrorEstimate, MixtureComponent};
pub use psd_linalg::{PsdEigen, SymMatrix};
pub use spectral::{DecayRegime, SpectralProfile};
