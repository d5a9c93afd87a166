//! Numerical toolkit for Rényi entropies and entropy power inequalities.
//!
//! Densities live on uniform one-dimensional grids ([`GridDensity`]) or as
//! radial profiles in `R^d` ([`RadialDensity`]). On top of those the crate
//! provides Rényi entropies, FFT convolution and central-limit iteration,
//! s-concavity certification, the closed-form constants of the s-concave
//! entropy power inequalities, end-to-end inequality checks, and the
//! mass-transfer coupling that detects failures of s-concavity.

// `!(x > y)` is used on purpose: it rejects NaN along with the out-of-range case
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constants;
pub mod convolve;
pub mod coupling;
pub mod density;
pub mod entropy;
pub mod epi;
pub mod error;
pub mod sconcave;

pub use density::{GridDensity, ParetoTruncSpec, RadialDensity};
pub use entropy::{GaussianSpec, RenyiOrder};
pub use error::{Error, Result};
