//! wasm-bindgen bindings behind `www/index.html`.
//!
//! Three operations: denoise a small grayscale image, render a dictionary
//! atlas, and race the sparse coders on one random problem.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_denoise::dictionary_learning::{overcomplete_dct, render_atlas};
use sparse_denoise::metrics::{psnr, ssim, SsimConfig};
use sparse_denoise::pipeline::{add_gaussian_noise, denoise, DenoiseConfig, NoiseSpec};
use sparse_denoise::sparse_coding::{
    brute_force_best_subset, objective, omp_encode, pdas_encode, OmpConfig, PdasConfig,
};
use sparse_denoise::{CoderConfig, Dictionary, GrayImage};
use wasm_bindgen::prelude::*;

/// Largest image the demo accepts, to keep the page responsive.
pub const MAX_PIXELS: usize = 256 * 256;

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[wasm_bindgen]
pub struct Picture {
    width: usize,
    height: usize,
    bytes: Vec<u8>,
}

#[wasm_bindgen]
impl Picture {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major 8-bit gray values.
    pub fn bytes(&self) -> Vec<u8> {
        self.bytes.clone()
    }
}

impl From<&GrayImage> for Picture {
    fn from(img: &GrayImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            bytes: img.to_u8(),
        }
    }
}

#[wasm_bindgen]
pub struct DenoiseResult {
    noisy: Picture,
    denoised: Picture,
    atlas: Picture,
    noisy_psnr: f64,
    psnr: f64,
    ssim: f64,
    t0: usize,
}

#[wasm_bindgen]
impl DenoiseResult {
    pub fn noisy(&self) -> Picture {
        Picture { bytes: self.noisy.bytes.clone(), ..self.noisy }
    }

    pub fn denoised(&self) -> Picture {
        Picture { bytes: self.denoised.bytes.clone(), ..self.denoised }
    }

    /// Atlas of the trained dictionary.
    pub fn atlas(&self) -> Picture {
        Picture { bytes: self.atlas.bytes.clone(), ..self.atlas }
    }

    #[wasm_bindgen(getter)]
    pub fn noisy_psnr(&self) -> f64 {
        self.noisy_psnr
    }

    #[wasm_bindgen(getter)]
    pub fn psnr(&self) -> f64 {
        self.psnr
    }

    #[wasm_bindgen(getter)]
    pub fn ssim(&self) -> f64 {
        self.ssim
    }

    /// Sparsity actually used (the schedule value when none was given).
    #[wasm_bindgen(getter)]
    pub fn t0(&self) -> usize {
        self.t0
    }
}

/// Adds noise of level `sigma` to `pixels` and denoises it. `coder` is
/// `"pdas"` or `"omp"`; `t0 = 0` picks the default sparsity.
#[wasm_bindgen]
pub fn denoise_image(
    pixels: &[u8],
    width: usize,
    height: usize,
    sigma: f64,
    coder: &str,
    t0: usize,
    seed: u32,
) -> Result<DenoiseResult, JsValue> {
    if width * height > MAX_PIXELS {
        return Err(js_err(format!("image too large for the demo (max {MAX_PIXELS} pixels)")));
    }
    let clean = GrayImage::from_u8(width, height, pixels).map_err(js_err)?;
    let seed = u64::from(seed);
    let mut cfg = match coder {
        "pdas" => DenoiseConfig::pdas(sigma, seed),
        "omp" => DenoiseConfig::omp(sigma, seed),
        other => return Err(js_err(format!("unknown coder {other:?}"))),
    };
    if t0 > 0 {
        cfg.coder = match cfg.coder {
            CoderConfig::Pdas(_) => CoderConfig::Pdas(PdasConfig::new(t0)),
            _ => CoderConfig::Omp(OmpConfig::new(t0)),
        };
    }
    let noisy = add_gaussian_noise(&clean, &NoiseSpec::new(sigma, seed)).map_err(js_err)?;
    let out = denoise(&noisy, &cfg).map_err(js_err)?;
    let atlas = render_atlas(&out.dictionary).map_err(js_err)?;
    Ok(DenoiseResult {
        noisy: Picture::from(&noisy.clipped()),
        denoised: Picture::from(&out.image),
        atlas: Picture::from(&atlas),
        noisy_psnr: psnr(&clean, &noisy.clipped()).map_err(js_err)?,
        psnr: psnr(&clean, &out.image).map_err(js_err)?,
        ssim: ssim(&clean, &out.image, &SsimConfig::default()).map_err(js_err)?,
        t0: cfg.coder.sparsity().unwrap_or(0),
    })
}

/// Atlas of the overcomplete DCT dictionary used to start training.
#[wasm_bindgen]
pub fn dct_atlas(num_atoms: usize) -> Result<Picture, JsValue> {
    let dict = overcomplete_dct(64, num_atoms).map_err(js_err)?;
    Ok(Picture::from(&render_atlas(&dict).map_err(js_err)?))
}

/// Objectives of one random `n x k` problem solved by PDAS, OMP and
/// exhaustive search, as a JSON object.
#[wasm_bindgen]
pub fn coder_race(n: usize, k: usize, t0: usize, seed: u32) -> Result<String, JsValue> {
    race(n, k, t0, u64::from(seed)).map_err(js_err)
}

fn race(n: usize, k: usize, t0: usize, seed: u64) -> sparse_denoise::Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dict = Dictionary::normalized(DMatrix::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0)))?;
    let y: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
    let pdas = pdas_encode(&y, &dict, &PdasConfig::new(t0).with_seed(seed))?;
    let omp = omp_encode(&y, &dict, &OmpConfig::new(t0))?;
    let best = brute_force_best_subset(&y, &dict, t0)?;
    let obj_omp = objective(&y, &dict, &omp.code)?;
    let obj_best = objective(&y, &dict, &best)?;
    Ok(format!(
        concat!(
            "{{\"pdas\":{{\"objective\":{},\"iterations\":{},\"converged\":{},\"support\":{:?}}},",
            "\"omp\":{{\"objective\":{},\"support\":{:?}}},",
            "\"exhaustive\":{{\"objective\":{},\"support\":{:?}}}}}"
        ),
        pdas.objective,
        pdas.iterations,
        pdas.converged,
        pdas.code.support(),
        obj_omp,
        omp.code.support(),
        obj_best,
        best.support(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn race_never_beats_exhaustive() {
        for seed in 0..20 {
            let json = race(8, 12, 2, seed).unwrap();
            let v: Vec<f64> = ["\"pdas\":{\"objective\":", "\"omp\":{\"objective\":", "\"exhaustive\":{\"objective\":"]
                .iter()
                .map(|key| {
                    let rest = &json[json.find(key).unwrap() + key.len()..];
                    rest[..rest.find(',').unwrap()].parse().unwrap()
                })
                .collect();
            assert!(v[2] <= v[0] + 1e-9 && v[2] <= v[1] + 1e-9, "{json}");
        }
    }

    #[test]
    fn small_denoise_runs() {
        let clean = GrayImage::from_fn(32, 32, |r, c| if (r / 8 + c / 8) % 2 == 0 { 60.0 } else { 190.0 }).unwrap();
        let res = denoise_image(&clean.to_u8(), 32, 32, 25.0, "omp", 3, 1).ok().unwrap();
        assert!(res.psnr > res.noisy_psnr);
        assert_eq!(res.atlas().width(), 145);
    }
}
