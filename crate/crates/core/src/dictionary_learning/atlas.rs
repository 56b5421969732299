use crate::error::{invalid, Result};
use crate::image::GrayImage;
use crate::sparse_coding::Dictionary;

/// Intensity of the separator lines and the outer border.
pub const ATLAS_SEPARATOR: f64 = 255.0;

/// Renders every atom as an `edge x edge` tile (`edge^2 = n`) in a grid
/// `ceil(sqrt(K))` tiles wide, atoms in row-major order. Each tile is
/// min-max scaled to `[0, 255]` (a constant atom renders mid-gray). Tiles
/// are separated by 1-pixel lines and the grid has a 1-pixel border, so a
/// 64 x 256 dictionary gives a 145 x 145 image.
pub fn render_atlas(dict: &Dictionary) -> Result<GrayImage> {
    let n = dict.signal_dim();
    let edge = (n as f64).sqrt().round() as usize;
    if edge * edge != n {
        return Err(invalid(format!("signal dimension {n} is not a perfect square")));
    }
    let k = dict.num_atoms();
    let cols = (1..).find(|c| c * c >= k).unwrap();
    let rows = k.div_ceil(cols);
    let width = cols * (edge + 1) + 1;
    let height = rows * (edge + 1) + 1;
    let mut out = GrayImage::filled(width, height, ATLAS_SEPARATOR)?;
    let px = out.pixels_mut();
    for j in 0..k {
        let atom = dict.atom(j);
        let lo = atom.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = atom.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let top = 1 + (j / cols) * (edge + 1);
        let left = 1 + (j % cols) * (edge + 1);
        for r in 0..edge {
            for c in 0..edge {
                let v = atom[r * edge + c];
                px[(top + r) * width + left + c] =
                    if hi > lo { (255.0 * ((v - lo) / (hi - lo))).clamp(0.0, 255.0) } else { 127.5 };
            }
        }
    }
    Ok(out)
}
