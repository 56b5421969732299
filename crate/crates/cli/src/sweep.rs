use serde::Serialize;
use sparse_denoise::image::GrayImage;
use sparse_denoise::metrics::{psnr, ssim, SsimConfig};
use sparse_denoise::pipeline::{add_gaussian_noise, denoise, NoiseSpec};

use crate::run::denoise_config;
use crate::spec::CoderKind;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub sigma: f64,
    pub t0: usize,
    pub psnr_db: f64,
    pub ssim: f64,
    pub seconds: f64,
    pub code_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepBest {
    pub sigma: f64,
    pub t0: usize,
    pub psnr_db: f64,
}

/// PDAS denoising PSNR over a grid of noise levels and sparsities. Each
/// noise level uses one noisy realisation for every sparsity.
pub fn sweep_sparsity(
    clean: &GrayImage,
    sigmas: &[f64],
    t0s: &[usize],
    seed: u64,
    mut on_point: impl FnMut(&SweepPoint),
) -> anyhow::Result<Vec<SweepPoint>> {
    let n = 64;
    if let Some(&t) = t0s.iter().find(|&&t| t == 0 || t > n) {
        anyhow::bail!("sparsity {t} outside [1, {n}]");
    }
    let mut points = Vec::with_capacity(sigmas.len() * t0s.len());
    for &sigma in sigmas {
        let noisy = add_gaussian_noise(clean, &NoiseSpec::new(sigma, seed))?;
        for &t0 in t0s {
            let cfg = denoise_config(CoderKind::Pdas, sigma, Some(t0), None, seed, clean)?;
            let out = denoise(&noisy, &cfg)?;
            let point = SweepPoint {
                sigma,
                t0,
                psnr_db: psnr(clean, &out.image)?,
                ssim: ssim(clean, &out.image, &SsimConfig::default())?,
                seconds: out.report.total_seconds,
                code_seconds: out.report.code_seconds,
            };
            on_point(&point);
            points.push(point);
        }
    }
    Ok(points)
}

/// Highest-PSNR sparsity per noise level, in first-seen order of the
/// noise levels; ties go to the smaller sparsity.
pub fn best_per_sigma(points: &[SweepPoint]) -> Vec<SweepBest> {
    let mut best: Vec<SweepBest> = Vec::new();
    for p in points {
        match best.iter_mut().find(|b| b.sigma == p.sigma) {
            Some(b) => {
                if p.psnr_db > b.psnr_db || (p.psnr_db == b.psnr_db && p.t0 < b.t0) {
                    *b = SweepBest { sigma: p.sigma, t0: p.t0, psnr_db: p.psnr_db };
                }
            }
            None => best.push(SweepBest { sigma: p.sigma, t0: p.t0, psnr_db: p.psnr_db }),
        }
    }
    best
}
