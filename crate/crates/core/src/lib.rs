//! K-SVD image denoising with interchangeable sparse coders.
//!
//! The crate is organised around the stages of the denoising pipeline:
//!
//! * [`sparse_coding`] solves the per-patch cardinality-constrained least
//!   squares problem with the primal-dual active set method, orthogonal
//!   matching pursuit, or an l1-penalised coordinate descent solver.
//! * [`dictionary_learning`] runs the K-SVD alternation (coding plus rank-1
//!   atom updates) on a set of training signals.
//! * [`pipeline`] turns an image into overlapping patches, learns a dictionary
//!   on a random subset of them, codes every patch and averages the results
//!   back into an image.
//! * [`metrics`] provides PSNR and SSIM.
//! * [`image`] holds the grayscale image type and PGM/PNG I/O.

pub mod dictionary_learning;
pub mod error;
pub mod image;
pub mod metrics;
pub mod pipeline;
pub mod sparse_coding;

mod seed;
mod timing;

pub use error::{Error, Result};
pub use image::GrayImage;
pub use sparse_coding::{CoderConfig, Dictionary, SparseCode};
