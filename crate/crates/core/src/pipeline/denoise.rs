use nalgebra::{DMatrix, DMatrixView};
use serde::{Deserialize, Serialize};

use crate::dictionary_learning::{ksvd_train, DictionaryInit, TrainConfig, TrainReport};
use crate::error::{invalid, Result};
use crate::image::GrayImage;
use crate::metrics::{psnr, ssim, SsimConfig};
use crate::seed::mix;
use crate::sparse_coding::{CoderConfig, Dictionary, LassoConfig, OmpConfig, PdasConfig};
use crate::timing::Stopwatch;

use super::noise::{add_gaussian_noise, NoiseSpec};
use super::patches::{extract_patches, reconstruct_from_patches, sample_training_patches};

/// Default PDAS sparsity per noise level, `(sigma, T0)`.
pub const SPARSITY_SCHEDULE: [(f64, usize); 6] =
    [(15.0, 20), (20.0, 20), (25.0, 15), (50.0, 2), (75.0, 2), (100.0, 2)];

/// Stream offset separating full-image coding from training-time coding.
const CODING_STREAM: u64 = 1 << 40;

/// Scheduled PDAS sparsity; for a level not in the table the nearest
/// tabulated level is used (lower one on ties).
pub fn pdas_sparsity_schedule(sigma: f64) -> usize {
    let mut best = SPARSITY_SCHEDULE[0];
    for entry in SPARSITY_SCHEDULE {
        if (entry.0 - sigma).abs() < (best.0 - sigma).abs() {
            best = entry;
        }
    }
    best.1
}

pub fn omp_default_sparsity() -> usize {
    5
}

/// `30 / sigma`; a noiseless input uses 30.
pub fn default_blend(sigma: f64) -> f64 {
    if sigma > 0.0 {
        30.0 / sigma
    } else {
        30.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenoiseConfig {
    pub sigma: f64,
    /// Used both inside K-SVD and for coding the full patch set.
    pub coder: CoderConfig,
    pub ksvd_iterations: usize,
    pub num_atoms: usize,
    pub training_patches: usize,
    #[serde(default)]
    pub init: DictionaryInit,
    pub patch_edge: usize,
    pub stride: usize,
    /// Weight of the noisy image in reconstruction; `None` means
    /// [`default_blend`].
    #[serde(default)]
    pub blend: Option<f64>,
    /// Subtract each patch's mean before training and coding.
    #[serde(default)]
    pub remove_mean: bool,
    #[serde(default)]
    pub seed: u64,
}

impl DenoiseConfig {
    pub fn new(sigma: f64, coder: CoderConfig) -> Self {
        Self {
            sigma,
            coder,
            ksvd_iterations: 10,
            num_atoms: 256,
            training_patches: 500,
            init: DictionaryInit::Dct,
            patch_edge: 8,
            stride: 1,
            blend: None,
            remove_mean: false,
            seed: 0,
        }
    }

    /// PDAS with the scheduled sparsity for `sigma`.
    pub fn pdas(sigma: f64, seed: u64) -> Self {
        let coder = CoderConfig::Pdas(PdasConfig::new(pdas_sparsity_schedule(sigma)).with_seed(seed));
        Self::new(sigma, coder).with_seed(seed)
    }

    pub fn omp(sigma: f64, seed: u64) -> Self {
        Self::new(sigma, CoderConfig::Omp(OmpConfig::new(omp_default_sparsity()))).with_seed(seed)
    }

    pub fn lasso(sigma: f64, lambda: f64, seed: u64) -> Self {
        Self::new(sigma, CoderConfig::Lasso(LassoConfig::new(lambda))).with_seed(seed)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn blend_weight(&self) -> f64 {
        self.blend.unwrap_or_else(|| default_blend(self.sigma))
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            ksvd_iterations: self.ksvd_iterations,
            num_atoms: self.num_atoms,
            coder: self.coder.clone(),
            init: self.init,
            min_usage: 1,
            seed: mix(self.seed, 2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(invalid("sigma must be finite and nonnegative"));
        }
        if self.patch_edge == 0 || self.stride == 0 {
            return Err(invalid("patch edge and stride must be positive"));
        }
        if self.training_patches == 0 {
            return Err(invalid("at least one training patch is required"));
        }
        let blend = self.blend_weight();
        if !(blend >= 0.0) {
            return Err(invalid("blend weight must be nonnegative"));
        }
        self.train_config().validate(self.patch_edge * self.patch_edge)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CodingStats {
    pub patches: usize,
    pub converged_fraction: f64,
    pub mean_iterations: f64,
    pub mean_support: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenoiseReport {
    pub config: DenoiseConfig,
    pub blend: f64,
    pub train: TrainReport,
    pub coding: CodingStats,
    pub train_seconds: f64,
    pub code_seconds: f64,
    pub reconstruct_seconds: f64,
    pub total_seconds: f64,
    /// Filled by [`DenoiseReport::score`] when a clean reference exists.
    pub psnr_db: Option<f64>,
    pub ssim: Option<f64>,
}

impl DenoiseReport {
    pub fn score(&mut self, clean: &GrayImage, denoised: &GrayImage) -> Result<()> {
        self.psnr_db = Some(psnr(clean, denoised)?);
        self.ssim = Some(ssim(clean, denoised, &SsimConfig::default())?);
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct DenoiseOutput {
    pub image: GrayImage,
    pub dictionary: Dictionary,
    pub report: DenoiseReport,
}

fn subtract_means(patches: &mut DMatrix<f64>) -> Vec<f64> {
    patches
        .column_iter_mut()
        .map(|mut col| {
            let m = col.mean();
            col.add_scalar_mut(-m);
            m
        })
        .collect()
}

fn add_means(patches: &mut DMatrix<f64>, means: &[f64]) {
    for (mut col, &m) in patches.column_iter_mut().zip(means) {
        col.add_scalar_mut(m);
    }
}

/// Codes every column of `patches` with `dict` and overwrites it with its
/// sparse approximation `D x`. Column `i` uses coder stream
/// `stream_offset + i`, so the result does not depend on threading.
pub fn code_patches(
    coder: &CoderConfig,
    dict: &Dictionary,
    patches: &mut DMatrix<f64>,
    stream_offset: u64,
) -> Result<CodingStats> {
    const BLOCK: usize = 2048;
    let n = patches.nrows();
    let p = patches.ncols();
    if n != dict.signal_dim() {
        return Err(crate::error::Error::DimensionMismatch {
            context: "patch dimension",
            expected: dict.signal_dim(),
            actual: n,
        });
    }
    coder.validate(n, dict.num_atoms())?;
    if p == 0 {
        return Ok(CodingStats::default());
    }
    let gram = dict.gram();
    let k = dict.num_atoms();

    // (converged, iterations, support size)
    let code_block = |(b, block): (usize, &mut [f64])| -> Result<(usize, usize, usize)> {
        let cols = block.len() / n;
        let corr = dict.matrix().tr_mul(&DMatrixView::from_slice(block, n, cols));
        let mut tally = (0, 0, 0);
        for local in 0..cols {
            let y = &mut block[local * n..(local + 1) * n];
            let y2 = y.iter().map(|v| v * v).sum();
            let c = &corr.as_slice()[local * k..(local + 1) * k];
            let enc = coder.encode_prepared(gram, c, y2, stream_offset + (b * BLOCK + local) as u64)?;
            dict.synthesize_into(enc.code.support(), enc.code.values(), y);
            tally.0 += enc.converged as usize;
            tally.1 += enc.iterations;
            tally.2 += enc.code.support_size();
        }
        Ok(tally)
    };

    let chunks = patches.as_mut_slice().chunks_mut(n * BLOCK).enumerate();
    #[cfg(feature = "parallel")]
    let tallies: Vec<Result<(usize, usize, usize)>> = {
        use rayon::prelude::*;
        chunks.collect::<Vec<_>>().into_par_iter().map(code_block).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let tallies: Vec<Result<(usize, usize, usize)>> = chunks.map(code_block).collect();

    let mut total = (0, 0, 0);
    for t in tallies {
        let t = t?;
        total = (total.0 + t.0, total.1 + t.1, total.2 + t.2);
    }
    let pf = p as f64;
    Ok(CodingStats {
        patches: p,
        converged_fraction: total.0 as f64 / pf,
        mean_iterations: total.1 as f64 / pf,
        mean_support: total.2 as f64 / pf,
    })
}

/// Trains a dictionary on a random subset of the noisy image's patches,
/// codes every overlapping patch with it and averages the results back
/// into an image.
pub fn denoise(noisy: &GrayImage, cfg: &DenoiseConfig) -> Result<DenoiseOutput> {
    cfg.validate()?;
    let total = Stopwatch::start();
    let blend = cfg.blend_weight();

    let clock = Stopwatch::start();
    let mut patches = extract_patches(noisy, cfg.patch_edge, cfg.stride)?;
    let mut training = sample_training_patches(&patches, cfg.training_patches, mix(cfg.seed, 1))?
        .patches()
        .clone();
    if cfg.remove_mean {
        subtract_means(&mut training);
    }
    let (dictionary, train) = ksvd_train(&training, &cfg.train_config())?;
    drop(training);
    let train_seconds = clock.seconds();

    let clock = Stopwatch::start();
    let means = cfg.remove_mean.then(|| subtract_means(patches.patches_mut()));
    let coding = code_patches(&cfg.coder, &dictionary, patches.patches_mut(), CODING_STREAM)?;
    if let Some(means) = &means {
        add_means(patches.patches_mut(), means);
    }
    let code_seconds = clock.seconds();

    let clock = Stopwatch::start();
    let image = reconstruct_from_patches(noisy, &patches, blend)?;
    let reconstruct_seconds = clock.seconds();

    let report = DenoiseReport {
        config: cfg.clone(),
        blend,
        train,
        coding,
        train_seconds,
        code_seconds,
        reconstruct_seconds,
        total_seconds: total.seconds(),
        psnr_db: None,
        ssim: None,
    };
    Ok(DenoiseOutput {
        image,
        dictionary,
        report,
    })
}

/// LASSO penalties tried by [`calibrate_lasso_lambda`]: `2^k sigma`,
/// `k = -4..=4`.
pub fn lasso_lambda_grid(sigma: f64) -> Vec<f64> {
    (-4..=4).map(|k| 2f64.powi(k) * sigma).collect()
}

/// Picks the LASSO penalty from [`lasso_lambda_grid`] that maximizes the
/// denoised PSNR on `clean` corrupted at `base.sigma`. Returns the best
/// penalty and every `(lambda, psnr)` pair tried.
pub fn calibrate_lasso_lambda(
    clean: &GrayImage,
    base: &DenoiseConfig,
    noise_seed: u64,
) -> Result<(f64, Vec<(f64, f64)>)> {
    let CoderConfig::Lasso(lasso) = &base.coder else {
        return Err(invalid("lambda calibration needs a LASSO coder"));
    };
    if base.sigma <= 0.0 {
        return Err(invalid("lambda calibration needs a positive sigma"));
    }
    let noisy = add_gaussian_noise(clean, &NoiseSpec::new(base.sigma, noise_seed))?;
    let mut trials = Vec::new();
    for lambda in lasso_lambda_grid(base.sigma) {
        let mut cfg = base.clone();
        cfg.coder = CoderConfig::Lasso(LassoConfig { lambda, ..*lasso });
        let out = denoise(&noisy, &cfg)?;
        trials.push((lambda, psnr(clean, &out.image)?));
    }
    let best = trials
        .iter()
        .copied()
        .fold((f64::NAN, f64::NEG_INFINITY), |b, t| if t.1 > b.1 { t } else { b });
    Ok((best.0, trials))
}
