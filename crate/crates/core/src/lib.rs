//! Numerical laboratory for the n-dimensional Riesz transform on discrete
//! approximations of Hausdorff measures.
//!
//! The crate is organised bottom-up:
//!
//! * [`measure`]: weighted point clouds, ball masses, densities and AD constants.
//! * [`riesz`]: truncated and regularized Riesz kernels, direct summation, the
//!   centered maximal function.
//! * [`analysis`]: operator norms by power iteration, dense SVD oracle, Menger curvature.
//! * [`generators`]: segments, planes, Lipschitz graphs, Cantor-type sets.
//! * [`treecode`]: hierarchical far-field summation with Cartesian Taylor expansions.
//! * [`construction`]: the AD-regularization pipeline (density subsets, ball cover,
//!   planar patches, comparison measures) and its verification.
//!
//! Loops over targets run through [`Exec`], which is rayon-backed when the
//! `parallel` feature is enabled and produces bit-identical results either way.

pub mod analysis;
pub mod construction;
pub mod error;
pub mod exec;
pub mod generators;
pub mod measure;
pub mod riesz;
pub mod spatial;
pub mod treecode;

pub use error::{Error, Result};
pub use exec::Exec;
pub use measure::{DiscreteMeasure, ScaleGrid};
pub use riesz::{KernelConfig, KernelMode, VectorField};
