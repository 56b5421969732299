use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sparse_denoise::image::ImageFormat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CoderKind {
    Pdas,
    Omp,
    Lasso,
}

impl CoderKind {
    pub fn name(self) -> &'static str {
        match self {
            CoderKind::Pdas => "pdas",
            CoderKind::Omp => "omp",
            CoderKind::Lasso => "lasso",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Everything a batch of denoising jobs needs. Loaded from JSON, then
/// overridden by command-line flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSpec {
    pub inputs: Vec<PathBuf>,
    pub sigmas: Vec<f64>,
    pub coders: Vec<CoderKind>,
    /// Overrides the default sparsity of the l0 coders.
    pub t0: Option<usize>,
    /// LASSO penalty; calibrated per noise level when absent.
    pub lambda: Option<f64>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    /// `pgm` or `png`.
    pub image_format: String,
    pub save_images: bool,
    pub save_dictionary: bool,
    pub save_noisy: bool,
    pub threads: Option<usize>,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            sigmas: Vec::new(),
            coders: vec![CoderKind::Pdas],
            t0: None,
            lambda: None,
            seed: 0,
            out_dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
            image_format: "pgm".into(),
            save_images: true,
            save_dictionary: false,
            save_noisy: false,
            threads: None,
        }
    }
}

impl RunSpec {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading run spec {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing run spec {}", path.display()))
    }

    pub fn image_format(&self) -> anyhow::Result<ImageFormat> {
        match self.image_format.to_ascii_lowercase().as_str() {
            "pgm" => Ok(ImageFormat::Pgm),
            "png" => Ok(ImageFormat::Png),
            other => bail!("unknown image format '{other}' (expected pgm or png)"),
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.inputs.is_empty() {
            bail!("no input images given");
        }
        if self.sigmas.is_empty() {
            bail!("no noise levels given");
        }
        if let Some(s) = self.sigmas.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            bail!("noise level {s} must be finite and nonnegative");
        }
        if self.coders.is_empty() {
            bail!("at least one coder is required");
        }
        if self.t0 == Some(0) {
            bail!("--t0 must be positive");
        }
        if let Some(l) = self.lambda {
            if !(l.is_finite() && l >= 0.0) {
                bail!("--lambda must be finite and nonnegative");
            }
        }
        self.image_format()?;
        Ok(())
    }
}
