//! 8-bit grayscale PGM (binary `P5`) and PNG.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use super::GrayImage;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Png,
}

impl ImageFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "pgm" => Some(ImageFormat::Pgm),
            "png" => Some(ImageFormat::Png),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            ImageFormat::Pgm => "pgm",
            ImageFormat::Png => "png",
        }
    }
}

const PNG_SIGNATURE: [u8; 8] = [137, 80, 78, 71, 13, 10, 26, 10];

fn pgm_err(detail: impl Into<String>) -> Error {
    Error::Parse {
        what: "PGM",
        detail: detail.into(),
    }
}

/// Reads a PGM or PNG file, picking the decoder from the file's magic bytes.
pub fn read_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let bytes = fs::read(path.as_ref())?;
    if bytes.starts_with(&PNG_SIGNATURE) {
        decode_png(&bytes)
    } else if bytes.first() == Some(&b'P') {
        decode_pgm(&bytes)
    } else {
        Err(Error::UnsupportedImage(format!(
            "{} is neither PGM nor PNG",
            path.as_ref().display()
        )))
    }
}

/// Writes `img` rounded and clamped to 8 bits; the format follows the file
/// extension (PGM when unrecognised).
pub fn write_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let bytes = match ImageFormat::from_path(path.as_ref()) {
        Some(ImageFormat::Png) => encode_png(img)?,
        _ => encode_pgm(img),
    };
    fs::write(path, bytes)?;
    Ok(())
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.to_u8());
    out
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos).ok_or_else(|| pgm_err("missing magic number"))?;
    match magic {
        b"P5" => {}
        b"P6" | b"P3" => {
            return Err(Error::UnsupportedImage(
                "color PPM input; convert to grayscale first".into(),
            ))
        }
        other => {
            return Err(pgm_err(format!(
                "unsupported magic {:?}, expected P5",
                String::from_utf8_lossy(other)
            )))
        }
    }
    let mut field = |name: &str| -> Result<usize> {
        let tok = next_token(bytes, &mut pos).ok_or_else(|| pgm_err(format!("missing {name}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| pgm_err(format!("bad {name}")))
    };
    let width = field("width")?;
    let height = field("height")?;
    let maxval = field("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedImage(format!(
            "PGM maxval {maxval}; only 8-bit images are supported"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let expected = width * height;
    let raster = bytes
        .get(pos..pos + expected)
        .ok_or_else(|| pgm_err(format!("raster truncated, expected {expected} bytes")))?;
    GrayImage::from_u8(width, height, raster)
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
        *pos += 1;
    }
    (*pos > start).then(|| &bytes[start..*pos])
}

pub fn encode_png(img: &GrayImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, img.width() as u32, img.height() as u32);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header()?;
        writer.write_image_data(&img.to_u8())?;
    }
    Ok(out)
}

pub fn decode_png(bytes: &[u8]) -> Result<GrayImage> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info()?;
    let (color, depth) = reader.output_color_type();
    if color != png::ColorType::Grayscale {
        return Err(Error::UnsupportedImage(format!(
            "PNG color type {color:?}; only single-channel grayscale is supported"
        )));
    }
    let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
    let info = reader.next_frame(&mut buf)?;
    let (width, height) = (info.width as usize, info.height as usize);
    let data = &buf[..info.buffer_size()];
    let pixels: Vec<f64> = match depth {
        png::BitDepth::Sixteen => data
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / 257.0)
            .collect(),
        _ => data.iter().map(|&b| b as f64).collect(),
    };
    GrayImage::new(width, height, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GrayImage {
        GrayImage::from_fn(5, 3, |r, c| ((r * 40 + c * 17) % 256) as f64).unwrap()
    }

    #[test]
    fn pgm_bytes_round_trip_exactly() {
        let bytes = encode_pgm(&sample());
        assert!(bytes.starts_with(b"P5\n5 3\n255\n"));
        let img = decode_pgm(&bytes).unwrap();
        assert_eq!(img, sample());
        assert_eq!(encode_pgm(&img), bytes);
    }

    #[test]
    fn pgm_header_comments_and_errors() {
        let mut bytes = b"P5 # comment\n2 1\n# another\n255\n".to_vec();
        bytes.extend([7, 9]);
        assert_eq!(decode_pgm(&bytes).unwrap().pixels(), &[7.0, 9.0]);
        assert!(matches!(decode_pgm(b"P6\n1 1\n255\n\0\0\0"), Err(Error::UnsupportedImage(_))));
        assert!(decode_pgm(b"P5\n2 2\n255\n\0").is_err());
        assert!(decode_pgm(b"P5\n1 1\n65535\n\0\0").is_err());
    }

    #[test]
    fn png_round_trip_and_color_rejection() {
        let bytes = encode_png(&sample()).unwrap();
        assert_eq!(decode_png(&bytes).unwrap(), sample());

        let mut rgb = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut rgb, 1, 1);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            enc.write_header().unwrap().write_image_data(&[1, 2, 3]).unwrap();
        }
        assert!(matches!(decode_png(&rgb), Err(Error::UnsupportedImage(_))));
    }

    #[test]
    fn file_round_trip_by_extension() {
        let dir = std::env::temp_dir().join(format!("sparse-denoise-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        for name in ["a.pgm", "a.png"] {
            let path = dir.join(name);
            write_image(&sample(), &path).unwrap();
            assert_eq!(read_image(&path).unwrap(), sample());
        }
        std::fs::write(dir.join("junk.bin"), b"hello").unwrap();
        assert!(read_image(dir.join("junk.bin")).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
