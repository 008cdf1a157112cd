//! Image ingestion and mask emission.
//!
//! Inputs are 8-bit grayscale or RGB PNG, or binary PGM/PPM. Masks are
//! written as 8-bit grayscale PNG with label `l` stored as
//! `floor(255 * l / (k - 1))`.

use std::io::Cursor;
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{ColorType, DynamicImage, ExtendedColorType, ImageDecoder, ImageEncoder, ImageFormat, ImageReader};

use crate::cluster::SegmentationMask;
use crate::error::{Error, Result};
use crate::pixel::ImageBuffer;

/// Most distinct levels an 8-bit mask can carry.
pub const MAX_MASK_LEVELS: usize = 256;

pub fn decode_image(bytes: &[u8]) -> Result<ImageBuffer> {
    let reader = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| Error::Decode(e.to_string()))?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Pnm) => {}
        Some(other) => {
            return Err(Error::UnsupportedImage(format!(
                "unsupported format {other:?} (expected PNG or PGM)"
            )))
        }
        None => return Err(Error::Decode("unrecognized image format".into())),
    }
    let decoder = reader
        .into_decoder()
        .map_err(|e| Error::Decode(e.to_string()))?;
    let channels = match decoder.color_type() {
        ColorType::L8 => 1,
        ColorType::Rgb8 => 3,
        ColorType::La8 | ColorType::Rgba8 => {
            return Err(Error::UnsupportedImage(
                "unsupported color type: alpha channels are not accepted".into(),
            ))
        }
        other => {
            return Err(Error::UnsupportedImage(format!(
                "unsupported bit depth: {} bits per sample ({other:?}); expected 8",
                other.bits_per_pixel() / u16::from(other.channel_count())
            )))
        }
    };
    let (width, height) = decoder.dimensions();
    let img = DynamicImage::from_decoder(decoder).map_err(|e| Error::Decode(e.to_string()))?;
    let data = match channels {
        1 => img.into_luma8().into_raw(),
        _ => img.into_rgb8().into_raw(),
    };
    ImageBuffer::new(height as usize, width as usize, channels, data)
        .map_err(|e| Error::Decode(e.to_string()))
}

pub fn load_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes).map_err(|e| match e {
        Error::Decode(msg) => Error::Decode(format!("{}: {msg}", path.display())),
        Error::UnsupportedImage(msg) => Error::UnsupportedImage(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn mask_level(label: u32, k: usize) -> u8 {
    if k <= 1 {
        0
    } else {
        (255 * label as usize / (k - 1)) as u8
    }
}

/// Inverse of [`mask_level`]: the label whose level is nearest `value`,
/// lower label on ties.
pub fn label_for_level(value: u8, k: usize) -> u32 {
    if k <= 1 {
        return 0;
    }
    (0..k.min(MAX_MASK_LEVELS) as u32)
        .min_by_key(|&l| (mask_level(l, k) as i32 - value as i32).unsigned_abs())
        .unwrap_or(0)
}

pub fn encode_mask_png(mask: &SegmentationMask, k: usize) -> Result<Vec<u8>> {
    if k == 0 || k > MAX_MASK_LEVELS {
        return Err(Error::config(format!(
            "mask output supports 1..={MAX_MASK_LEVELS} clusters, got {k}"
        )));
    }
    if mask.label_bound() > k {
        return Err(Error::OutOfRange {
            what: "cluster label",
            value: mask.label_bound() - 1,
            limit: k,
        });
    }
    let pixels: Vec<u8> = mask.labels().iter().map(|&l| mask_level(l, k)).collect();
    let mut out = Vec::new();
    PngEncoder::new(&mut out)
        .write_image(
            &pixels,
            mask.width() as u32,
            mask.height() as u32,
            ExtendedColorType::L8,
        )
        .map_err(|e| Error::Decode(e.to_string()))?;
    Ok(out)
}

pub fn save_mask(mask: &SegmentationMask, k: usize, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_mask_png(mask, k)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Re-derives cluster labels from a mask image written with `k` levels.
pub fn decode_mask(bytes: &[u8], k: usize) -> Result<SegmentationMask> {
    mask_from_image(&decode_image(bytes)?, k)
}

pub fn load_mask(path: impl AsRef<Path>, k: usize) -> Result<SegmentationMask> {
    mask_from_image(&load_image(path)?, k)
}

pub fn mask_from_image(img: &ImageBuffer, k: usize) -> Result<SegmentationMask> {
    if k == 0 {
        return Err(Error::config("number of clusters must be at least 1"));
    }
    let table: Vec<u32> = (0..=255u8).map(|v| label_for_level(v, k)).collect();
    let labels = img.pixels().map(|p| table[p[0] as usize]).collect();
    SegmentationMask::new(img.height(), img.width(), labels)
}

/// Writes an image buffer as PNG; used to produce fixtures and test inputs.
pub fn encode_png(img: &ImageBuffer) -> Result<Vec<u8>> {
    let color = match img.channels() {
        1 => ExtendedColorType::L8,
        _ => ExtendedColorType::Rgb8,
    };
    let mut out = Vec::new();
    PngEncoder::new(&mut out)
        .write_image(img.data(), img.width() as u32, img.height() as u32, color)
        .map_err(|e| Error::Decode(e.to_string()))?;
    Ok(out)
}

pub fn save_png(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_png(img)?).map_err(|e| Error::io(path, e))
}
