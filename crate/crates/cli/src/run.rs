use std::path::{Path, PathBuf};

use anyhow::Context;
use sparse_denoise::dictionary_learning::save_dictionary_csv;
use sparse_denoise::image::{read_image, write_image, GrayImage};
use sparse_denoise::metrics::{psnr, ssim, SsimConfig};
use sparse_denoise::pipeline::{
    add_gaussian_noise, calibrate_lasso_lambda, denoise, omp_default_sparsity,
    pdas_sparsity_schedule, DenoiseConfig, DenoiseOutput, NoiseSpec,
};
use sparse_denoise::sparse_coding::{CoderConfig, LassoConfig, OmpConfig, PdasConfig};

use crate::record::{BenchmarkRecord, RecordWriter};
use crate::spec::{CoderKind, RunSpec};

/// Edge of the centre crop used to calibrate the LASSO penalty.
const CALIBRATION_EDGE: usize = 128;

pub struct JobOutcome {
    pub record: BenchmarkRecord,
    pub noisy: GrayImage,
    pub output: DenoiseOutput,
}

#[derive(Debug, Default)]
pub struct RunSummary {
    pub records: Vec<BenchmarkRecord>,
    pub failures: Vec<String>,
    pub records_path: PathBuf,
    pub images_written: Vec<PathBuf>,
}

impl RunSummary {
    pub fn success(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn image_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into())
}

fn centre_crop(img: &GrayImage, edge: usize) -> sparse_denoise::Result<GrayImage> {
    let h = img.height().min(edge);
    let w = img.width().min(edge);
    img.crop((img.height() - h) / 2, (img.width() - w) / 2, h, w)
}

/// Pipeline configuration for one job. Without an explicit penalty the
/// LASSO coder is calibrated on a centre crop of `clean`.
pub fn denoise_config(
    kind: CoderKind,
    sigma: f64,
    t0: Option<usize>,
    lambda: Option<f64>,
    seed: u64,
    clean: &GrayImage,
) -> anyhow::Result<DenoiseConfig> {
    let coder = match kind {
        CoderKind::Pdas => CoderConfig::Pdas(
            PdasConfig::new(t0.unwrap_or_else(|| pdas_sparsity_schedule(sigma))).with_seed(seed),
        ),
        CoderKind::Omp => CoderConfig::Omp(OmpConfig::new(t0.unwrap_or_else(omp_default_sparsity))),
        CoderKind::Lasso => {
            let lambda = match lambda {
                Some(l) => l,
                None => {
                    let base = DenoiseConfig::lasso(sigma.max(f64::MIN_POSITIVE), 1.0, seed);
                    let crop = centre_crop(clean, CALIBRATION_EDGE)?;
                    calibrate_lasso_lambda(&crop, &base, seed)
                        .context("calibrating the LASSO penalty")?
                        .0
                }
            };
            CoderConfig::Lasso(LassoConfig::new(lambda))
        }
    };
    Ok(DenoiseConfig::new(sigma, coder).with_seed(seed))
}

/// Adds noise to `clean`, denoises it and scores the result.
pub fn run_job(
    clean: &GrayImage,
    image: &str,
    sigma: f64,
    kind: CoderKind,
    spec: &RunSpec,
) -> anyhow::Result<JobOutcome> {
    let noisy = add_gaussian_noise(clean, &NoiseSpec::new(sigma, spec.seed))?;
    let cfg = denoise_config(kind, sigma, spec.t0, spec.lambda, spec.seed, clean)?;
    let output = denoise(&noisy, &cfg)?;
    let record = BenchmarkRecord {
        image: image.to_string(),
        sigma,
        coder: kind.name().to_string(),
        t0: cfg.coder.sparsity(),
        lambda: cfg.coder.lambda(),
        psnr_db: psnr(clean, &output.image)?,
        ssim: ssim(clean, &output.image, &SsimConfig::default())?,
        seconds: output.report.total_seconds,
        converged_frac: output.report.coding.converged_fraction,
        seed: spec.seed,
    };
    Ok(JobOutcome { record, noisy, output })
}

fn write_artifacts(
    spec: &RunSpec,
    stem: &str,
    outcome: &JobOutcome,
    written: &mut Vec<PathBuf>,
) -> anyhow::Result<()> {
    let ext = spec.image_format()?.extension();
    let sigma = outcome.record.sigma;
    let base = format!("{stem}_sigma{sigma}_{}", outcome.record.coder);
    if spec.save_noisy {
        let path = spec.out_dir.join(format!("{stem}_sigma{sigma}_noisy.{ext}"));
        write_image(&outcome.noisy.clipped(), &path)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if spec.save_dictionary {
        let path = spec.out_dir.join(format!("{base}_dict.csv"));
        save_dictionary_csv(&outcome.output.dictionary, &path)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if spec.save_images {
        let path = spec.out_dir.join(format!("{base}.{ext}"));
        write_image(&outcome.output.image, &path)
            .with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    Ok(())
}

/// Runs every (image, sigma, coder) job of `spec`. A failing job is
/// recorded in the summary and the remaining jobs still run; only
/// problems with the output location itself abort the run.
pub fn run_denoise(
    spec: &RunSpec,
    mut progress: impl FnMut(&BenchmarkRecord),
) -> anyhow::Result<RunSummary> {
    spec.validate()?;
    let mut writer = RecordWriter::create(&spec.out_dir, spec.format)?;
    let mut summary = RunSummary::default();
    for input in &spec.inputs {
        let stem = image_name(input);
        let clean = match read_image(input) {
            Ok(img) => img,
            Err(e) => {
                let jobs = spec.sigmas.len() * spec.coders.len();
                summary
                    .failures
                    .push(format!("{} ({jobs} jobs skipped): {e}", input.display()));
                continue;
            }
        };
        for &sigma in &spec.sigmas {
            for &kind in &spec.coders {
                let job = format!("{stem} sigma={sigma} coder={}", kind.name());
                let result = run_job(&clean, &stem, sigma, kind, spec).and_then(|outcome| {
                    let mut written = Vec::new();
                    write_artifacts(spec, &stem, &outcome, &mut written)?;
                    Ok((outcome, written))
                });
                match result {
                    Ok((outcome, written)) => {
                        writer.append(&outcome.record)?;
                        progress(&outcome.record);
                        summary.images_written.extend(written);
                        summary.records.push(outcome.record);
                    }
                    Err(e) => summary.failures.push(format!("{job}: {e:#}")),
                }
            }
        }
    }
    summary.records_path = writer.finish()?;
    Ok(summary)
}
