use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, invalid, Result};
use crate::image::GrayImage;

/// Vectorised square patches (one per column, pixels row-major within the
/// patch) with their top-left `(row, col)` origins in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchSet {
    patch_edge: usize,
    stride: usize,
    patches: DMatrix<f64>,
    origins: Vec<(usize, usize)>,
}

impl PatchSet {
    pub fn new(
        patch_edge: usize,
        stride: usize,
        patches: DMatrix<f64>,
        origins: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if patch_edge == 0 || stride == 0 {
            return Err(invalid("patch edge and stride must be positive"));
        }
        check_len("patch vector length", patch_edge * patch_edge, patches.nrows())?;
        check_len("patch origins", patches.ncols(), origins.len())?;
        Ok(Self {
            patch_edge,
            stride,
            patches,
            origins,
        })
    }

    pub fn patch_edge(&self) -> usize {
        self.patch_edge
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    /// `n x p` matrix of patches.
    pub fn patches(&self) -> &DMatrix<f64> {
        &self.patches
    }

    pub fn patches_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.patches
    }

    pub fn origins(&self) -> &[(usize, usize)] {
        &self.origins
    }

    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    pub fn patch(&self, i: usize) -> &[f64] {
        let n = self.patches.nrows();
        &self.patches.as_slice()[i * n..(i + 1) * n]
    }
}

/// `((H - edge) / stride + 1) * ((W - edge) / stride + 1)`.
pub fn patch_count(height: usize, width: usize, patch_edge: usize, stride: usize) -> usize {
    if patch_edge == 0 || stride == 0 || patch_edge > height || patch_edge > width {
        return 0;
    }
    ((height - patch_edge) / stride + 1) * ((width - patch_edge) / stride + 1)
}

pub fn extract_patches(img: &GrayImage, patch_edge: usize, stride: usize) -> Result<PatchSet> {
    if patch_edge == 0 || stride == 0 {
        return Err(invalid("patch edge and stride must be positive"));
    }
    if patch_edge > img.height() || patch_edge > img.width() {
        return Err(invalid(format!(
            "{patch_edge}x{patch_edge} patch does not fit in a {}x{} image",
            img.height(),
            img.width()
        )));
    }
    let n = patch_edge * patch_edge;
    let origins: Vec<(usize, usize)> = (0..=img.height() - patch_edge)
        .step_by(stride)
        .flat_map(|r| (0..=img.width() - patch_edge).step_by(stride).map(move |c| (r, c)))
        .collect();
    let mut data = Vec::with_capacity(n * origins.len());
    let (w, px) = (img.width(), img.pixels());
    for &(r, c) in &origins {
        for dr in 0..patch_edge {
            let start = (r + dr) * w + c;
            data.extend_from_slice(&px[start..start + patch_edge]);
        }
    }
    let patches = DMatrix::from_vec(n, origins.len(), data);
    PatchSet::new(patch_edge, stride, patches, origins)
}

/// Uniform random subset of `count` patches without replacement; the
/// original order is kept.
pub fn sample_training_patches(set: &PatchSet, count: usize, seed: u64) -> Result<PatchSet> {
    if count > set.len() {
        return Err(invalid(format!(
            "requested {count} training patches but only {} are available",
            set.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = rand::seq::index::sample(&mut rng, set.len(), count).into_vec();
    picks.sort_unstable();
    let n = set.patches.nrows();
    let mut data = Vec::with_capacity(n * count);
    for &i in &picks {
        data.extend_from_slice(set.patch(i));
    }
    PatchSet::new(
        set.patch_edge,
        set.stride,
        DMatrix::from_vec(n, count, data),
        picks.iter().map(|&i| set.origins[i]).collect(),
    )
}

/// Overlap average blended with the noisy image:
/// `(blend * noisy + sum of patch values) / (blend + overlap count)`,
/// accumulated in patch order. Pixels covered by no patch with `blend = 0`
/// keep their noisy value. No clipping.
pub fn reconstruct_unclipped(noisy: &GrayImage, coded: &PatchSet, blend: f64) -> Result<GrayImage> {
    if !(blend >= 0.0) || blend.is_nan() {
        return Err(invalid("blend weight must be nonnegative"));
    }
    let e = coded.patch_edge;
    if let Some(&(r, c)) = coded
        .origins
        .iter()
        .find(|&&(r, c)| r + e > noisy.height() || c + e > noisy.width())
    {
        return Err(invalid(format!("patch at ({r}, {c}) lies outside the image")));
    }
    let w = noisy.width();
    let mut sum = vec![0.0; noisy.pixels().len()];
    let mut count = vec![0.0; noisy.pixels().len()];
    for (i, &(r, c)) in coded.origins.iter().enumerate() {
        let patch = coded.patch(i);
        for dr in 0..e {
            let base = (r + dr) * w + c;
            for dc in 0..e {
                sum[base + dc] += patch[dr * e + dc];
                count[base + dc] += 1.0;
            }
        }
    }
    let pixels: Vec<f64> = if blend.is_infinite() {
        noisy.pixels().to_vec()
    } else {
        noisy
            .pixels()
            .iter()
            .zip(sum.iter().zip(&count))
            .map(|(&y, (&s, &k))| {
                let weight = blend + k;
                if weight == 0.0 {
                    y
                } else {
                    (blend * y + s) / weight
                }
            })
            .collect()
    };
    GrayImage::new(noisy.width(), noisy.height(), pixels)
}

/// [`reconstruct_unclipped`] followed by clipping to `[0, 255]`.
pub fn reconstruct_from_patches(noisy: &GrayImage, coded: &PatchSet, blend: f64) -> Result<GrayImage> {
    Ok(reconstruct_unclipped(noisy, coded, blend)?.clipped())
}
