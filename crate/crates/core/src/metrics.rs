//! PSNR and SSIM on the 8-bit intensity scale.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::image::GrayImage;

const PEAK: f64 = 255.0;

fn check_same_shape(x: &GrayImage, y: &GrayImage) -> Result<()> {
    if x.same_shape(y) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "image sizes differ: {}x{} vs {}x{}",
            x.width(),
            x.height(),
            y.width(),
            y.height()
        )))
    }
}

/// Mean squared pixel difference.
pub fn mse(x: &GrayImage, y: &GrayImage) -> Result<f64> {
    check_same_shape(x, y)?;
    let sum: f64 = x
        .pixels()
        .iter()
        .zip(y.pixels())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / x.pixels().len() as f64)
}

/// `10 log10(255^2 / MSE)` in dB; `+inf` for identical images.
pub fn psnr(x: &GrayImage, y: &GrayImage) -> Result<f64> {
    let mse = mse(x, y)?;
    Ok(if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (PEAK * PEAK / mse).log10()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Downsample {
    /// `max(1, round(min(H, W) / 256))`.
    Auto,
    Factor(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SsimConfig {
    pub window_size: usize,
    pub window_sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
    pub downsample: Downsample,
}

impl Default for SsimConfig {
    fn default() -> Self {
        Self {
            window_size: 11,
            window_sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 255.0,
            downsample: Downsample::Auto,
        }
    }
}

impl SsimConfig {
    pub fn c1(&self) -> f64 {
        (self.k1 * self.dynamic_range).powi(2)
    }

    pub fn c2(&self) -> f64 {
        (self.k2 * self.dynamic_range).powi(2)
    }

    /// Row-major `window_size x window_size` Gaussian weights summing to 1.
    pub fn window(&self) -> Vec<f64> {
        let w = self.window_size;
        let center = (w as f64 - 1.0) / 2.0;
        let mut weights: Vec<f64> = (0..w * w)
            .map(|i| {
                let (r, c) = ((i / w) as f64 - center, (i % w) as f64 - center);
                (-(r * r + c * c) / (2.0 * self.window_sigma * self.window_sigma)).exp()
            })
            .collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|v| *v /= total);
        weights
    }

    pub fn downsample_factor(&self, height: usize, width: usize) -> usize {
        match self.downsample {
            Downsample::Auto => ((height.min(width) as f64 / 256.0).round() as usize).max(1),
            Downsample::Factor(f) => f.max(1),
        }
    }
}

/// `f x f` box filter with symmetric boundary extension, anchored like an
/// even/odd-size correlation kernel (anchor at `(f - 1) / 2`), followed by
/// keeping every `f`-th sample from the origin.
fn downsample(img: &GrayImage, f: usize) -> GrayImage {
    if f == 1 {
        return img.clone();
    }
    let (h, w) = (img.height() as isize, img.width() as isize);
    let anchor = ((f - 1) / 2) as isize;
    let reflect = |i: isize, n: isize| -> usize {
        let period = 2 * n;
        let m = i.rem_euclid(period);
        (if m < n { m } else { period - 1 - m }) as usize
    };
    let out_h = (img.height() + f - 1) / f;
    let out_w = (img.width() + f - 1) / f;
    let norm = (f * f) as f64;
    GrayImage::from_fn(out_w, out_h, |r, c| {
        let (r0, c0) = ((r * f) as isize - anchor, (c * f) as isize - anchor);
        let mut sum = 0.0;
        for dr in 0..f as isize {
            let rr = reflect(r0 + dr, h);
            for dc in 0..f as isize {
                sum += img.get(rr, reflect(c0 + dc, w));
            }
        }
        sum / norm
    })
    .expect("downsampled image is nonempty and finite")
}

/// Mean SSIM over all fully contained Gaussian windows, after the
/// configured downsampling.
pub fn ssim(x: &GrayImage, y: &GrayImage, cfg: &SsimConfig) -> Result<f64> {
    check_same_shape(x, y)?;
    if cfg.window_size == 0 || !(cfg.window_sigma > 0.0) {
        return Err(invalid("SSIM window must be nonempty with positive sigma"));
    }
    let f = cfg.downsample_factor(x.height(), x.width());
    let (x, y) = (downsample(x, f), downsample(y, f));
    let ws = cfg.window_size;
    if x.height() < ws || x.width() < ws {
        return Err(invalid(format!(
            "image of {}x{} after downsampling is smaller than the {ws}x{ws} window",
            x.height(),
            x.width()
        )));
    }
    let window = cfg.window();
    let (c1, c2) = (cfg.c1(), cfg.c2());
    let (w, px, py) = (x.width(), x.pixels(), y.pixels());
    let out_h = x.height() - ws + 1;
    let out_w = w - ws + 1;
    let mut total = 0.0;
    for r in 0..out_h {
        for c in 0..out_w {
            let (mut mx, mut my, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for dr in 0..ws {
                let base = (r + dr) * w + c;
                let wrow = &window[dr * ws..(dr + 1) * ws];
                for (dc, &wt) in wrow.iter().enumerate() {
                    let (a, b) = (px[base + dc], py[base + dc]);
                    mx += wt * a;
                    my += wt * b;
                    sxx += wt * a * a;
                    syy += wt * b * b;
                    sxy += wt * a * b;
                }
            }
            let vx = sxx - mx * mx;
            let vy = syy - my * my;
            let cov = sxy - mx * my;
            total += ((2.0 * mx * my + c1) * (2.0 * cov + c2))
                / ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
    }
    Ok(total / (out_h * out_w) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn textured(seed: u64, w: usize, h: usize) -> GrayImage {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        GrayImage::from_fn(w, h, |r, c| {
            128.0 + 60.0 * ((r as f64) * 0.3).sin() * ((c as f64) * 0.2).cos() + rng.random_range(-20.0..20.0)
        })
        .unwrap()
    }

    #[test]
    fn psnr_examples() {
        let a = GrayImage::filled(16, 16, 100.0).unwrap();
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        for (diff, expected) in [(15.0, 24.61), (20.0, 22.11), (50.0, 14.15)] {
            let b = GrayImage::filled(16, 16, 100.0 + diff).unwrap();
            let v = psnr(&a, &b).unwrap();
            assert!((v - expected).abs() < 0.005, "{v}");
            assert!((v - 20.0 * (255.0 / diff).log10()).abs() < 1e-12);
        }
        assert!(psnr(&a, &GrayImage::filled(8, 16, 0.0).unwrap()).is_err());
    }

    #[test]
    fn window_is_normalized() {
        let w = SsimConfig::default().window();
        assert_eq!(w.len(), 121);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(w.iter().all(|&v| v > 0.0));
        assert!(w[60] > w[0]);
    }

    #[test]
    fn downsample_factor_rule() {
        let cfg = SsimConfig::default();
        assert_eq!(cfg.downsample_factor(512, 512), 2);
        assert_eq!(cfg.downsample_factor(256, 600), 1);
        assert_eq!(cfg.downsample_factor(100, 100), 1);
        assert_eq!(cfg.downsample_factor(900, 1000), 4);
    }

    #[test]
    fn even_factor_downsampling_is_block_mean() {
        let img = GrayImage::from_fn(4, 4, |r, c| (r * 4 + c) as f64).unwrap();
        let d = downsample(&img, 2);
        assert_eq!(d.pixels(), &[2.5, 4.5, 10.5, 12.5]);
    }

    #[test]
    fn constant_images_reduce_to_luminance_term() {
        let cfg = SsimConfig::default();
        let a = GrayImage::filled(32, 32, 100.0).unwrap();
        let b = GrayImage::filled(32, 32, 150.0).unwrap();
        let c1 = cfg.c1();
        // zero variances: contrast-structure factor is c2 / c2
        let expected = (2.0 * 100.0 * 150.0 + c1) / (100.0f64.powi(2) + 150.0f64.powi(2) + c1);
        let v = ssim(&a, &b, &cfg).unwrap();
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 0.923092).abs() < 5e-7, "{v}");
    }

    #[test]
    fn ssim_errors() {
        let cfg = SsimConfig::default();
        let a = GrayImage::filled(10, 10, 1.0).unwrap();
        assert!(ssim(&a, &a, &cfg).is_err());
        let b = GrayImage::filled(20, 12, 1.0).unwrap();
        let c = GrayImage::filled(12, 20, 1.0).unwrap();
        assert!(ssim(&b, &c, &cfg).is_err());
    }

    #[test]
    fn ssim_penalises_noise() {
        let cfg = SsimConfig::default();
        let clean = textured(1, 64, 64);
        let noisy = GrayImage::from_fn(64, 64, |r, c| clean.get(r, c) + if (r + c) % 2 == 0 { 25.0 } else { -25.0 })
            .unwrap();
        let v = ssim(&clean, &noisy, &cfg).unwrap();
        assert!(v < 0.9 && v > -1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn symmetry_and_identity(seed_a in 0u64..1000, seed_b in 0u64..1000) {
            let cfg = SsimConfig::default();
            let a = textured(seed_a, 24, 20);
            let b = textured(seed_b, 24, 20);
            let ab = ssim(&a, &b, &cfg).unwrap();
            let ba = ssim(&b, &a, &cfg).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-12);
            prop_assert!((-1.0..=1.0).contains(&ab));
            prop_assert!((ssim(&a, &a, &cfg).unwrap() - 1.0).abs() <= 1e-12);
            prop_assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
        }

        #[test]
        fn psnr_shift_invariance(seed in 0u64..1000, shift in -50i32..50) {
            // integer-valued pixels keep the shifted differences exact
            let round = |img: GrayImage, s: f64| {
                GrayImage::new(16, 16, img.pixels().iter().map(|v| v.round() + s).collect()).unwrap()
            };
            let a = textured(seed, 16, 16);
            let b = textured(seed + 1, 16, 16);
            let s = shift as f64;
            let base = psnr(&round(a.clone(), 0.0), &round(b.clone(), 0.0)).unwrap();
            prop_assert_eq!(base, psnr(&round(a, s), &round(b, s)).unwrap());
        }
    }
}
