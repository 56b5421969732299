//! Patch-based denoising: noise synthesis, overlapping patch extraction,
//! per-image dictionary training, patch coding and overlap-averaged
//! reconstruction.

mod denoise;
mod noise;
mod patches;

pub use denoise::{
    calibrate_lasso_lambda, code_patches, default_blend, denoise, lasso_lambda_grid, omp_default_sparsity, pdas_sparsity_schedule,
    CodingStats, DenoiseConfig, DenoiseOutput, DenoiseReport, SPARSITY_SCHEDULE,
};
pub use noise::{add_gaussian_noise, NoiseSpec};
pub use patches::{
    extract_patches, patch_count, reconstruct_from_patches, reconstruct_unclipped,
    sample_training_patches, PatchSet,
};
