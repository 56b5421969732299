//! Grayscale images held as unclipped `f64` intensities on a nominal
//! `[0, 255]` scale.

mod io;

pub use io::{
    decode_pgm, decode_png, encode_pgm, encode_png, read_image, write_image, ImageFormat,
};

use crate::error::{check_len, invalid, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    /// Row-major pixels; `pixels.len()` must equal `width * height`.
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(invalid("image dimensions must be positive"));
        }
        check_len("image pixels", width * height, pixels.len())?;
        if pixels.iter().any(|v| !v.is_finite()) {
            return Err(invalid("image contains non-finite pixels"));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn from_u8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(width, height, bytes.iter().map(|&b| b as f64).collect())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [f64] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn same_shape(&self, other: &GrayImage) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Copy clamped to `[0, 255]`.
    pub fn clipped(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|v| v.clamp(0.0, 255.0)).collect(),
        }
    }

    /// Pixels rounded and clamped to 8 bits.
    pub fn to_u8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .map(|v| v.round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    pub fn crop(&self, top: usize, left: usize, height: usize, width: usize) -> Result<GrayImage> {
        if top + height > self.height || left + width > self.width {
            return Err(invalid(format!(
                "crop {height}x{width} at ({top}, {left}) exceeds {}x{} image",
                self.height, self.width
            )));
        }
        GrayImage::from_fn(width, height, |r, c| self.get(top + r, left + c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        assert!(GrayImage::new(2, 2, vec![0.0; 3]).is_err());
        assert!(GrayImage::new(0, 2, vec![]).is_err());
        assert!(GrayImage::new(1, 1, vec![f64::NAN]).is_err());
        let img = GrayImage::from_fn(3, 2, |r, c| (r * 3 + c) as f64).unwrap();
        assert_eq!(img.get(1, 2), 5.0);
        assert_eq!(img.crop(1, 1, 1, 2).unwrap().pixels(), &[4.0, 5.0]);
        assert!(img.crop(1, 1, 2, 2).is_err());
    }

    #[test]
    fn clipping_and_quantisation() {
        let img = GrayImage::new(4, 1, vec![-3.0, 12.4, 12.6, 300.0]).unwrap();
        assert_eq!(img.clipped().pixels(), &[0.0, 12.4, 12.6, 255.0]);
        assert_eq!(img.to_u8(), vec![0, 12, 13, 255]);
    }
}
