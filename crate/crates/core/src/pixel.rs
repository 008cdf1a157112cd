//! Pixel hypervectors: position XOR color, materialized for a whole image.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::color::ColorCodebook;
use crate::error::{check_dim, Error, Result};
use crate::hv::{words_for, Hypervector};
use crate::position::PositionCodebook;

/// 8-bit image, row-major, channels interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<u8>,
}

impl ImageBuffer {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Invalid(format!(
                "image dimensions must be positive, got {height}x{width}"
            )));
        }
        if !matches!(channels, 1 | 3) {
            return Err(Error::Invalid(format!(
                "image must have 1 or 3 channels, got {channels}"
            )));
        }
        let expected = height
            .checked_mul(width)
            .and_then(|n| n.checked_mul(channels))
            .ok_or_else(|| Error::Invalid("image dimensions overflow".into()))?;
        check_dim(expected, data.len())?;
        Ok(ImageBuffer {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> u8,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * channels);
        for i in 0..height {
            for j in 0..width {
                for c in 0..channels {
                    data.push(f(i, j, c));
                }
            }
        }
        Self::new(height, width, channels, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, i: usize, j: usize) -> &[u8] {
        let start = (i * self.width + j) * self.channels;
        &self.data[start..start + self.channels]
    }

    /// Pixels in row-major order.
    pub fn pixels(&self) -> std::slice::ChunksExact<'_, u8> {
        self.data.chunks_exact(self.channels)
    }
}

/// Which codebooks are structured. The two random variants each replace
/// exactly one side with independently random vectors.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    #[default]
    Manhattan,
    /// Random position vectors, structured color.
    Rpos,
    /// Structured position, random color vectors.
    Rcolor,
}

impl fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EncoderKind::Manhattan => "manhattan",
            EncoderKind::Rpos => "rpos",
            EncoderKind::Rcolor => "rcolor",
        })
    }
}

pub fn pixel_hv(position: &Hypervector, color: &Hypervector) -> Result<Hypervector> {
    position.xor(color)
}

/// One hypervector per pixel, packed contiguously.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelHvGrid {
    height: usize,
    width: usize,
    dim: usize,
    stride: usize,
    words: Vec<u64>,
}

impl PixelHvGrid {
    pub fn from_hvs(height: usize, width: usize, hvs: &[Hypervector]) -> Result<Self> {
        check_dim(height * width, hvs.len())?;
        let dim = hvs
            .first()
            .map(Hypervector::dim)
            .ok_or_else(|| Error::Invalid("empty grid".into()))?;
        let stride = words_for(dim);
        let mut words = Vec::with_capacity(stride * hvs.len());
        for h in hvs {
            check_dim(dim, h.dim())?;
            words.extend_from_slice(h.words());
        }
        Ok(PixelHvGrid {
            height,
            width,
            dim,
            stride,
            words,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hv(&self, i: usize, j: usize) -> Hypervector {
        Hypervector::from_words(self.dim, self.words_at(i * self.width + j).to_vec())
            .expect("grid stride matches dimension")
    }

    /// Bytes held by the packed payload.
    pub fn payload_bytes(&self) -> usize {
        self.words.len() * std::mem::size_of::<u64>()
    }

    pub(crate) fn words_at(&self, index: usize) -> &[u64] {
        &self.words[index * self.stride..(index + 1) * self.stride]
    }

    pub(crate) fn stride(&self) -> usize {
        self.stride
    }

    pub(crate) fn raw_words(&self) -> &[u64] {
        &self.words
    }
}

/// `grid[i][j] = (r_i ^ c_j) ^ color(i, j)`. Pixels are encoded in parallel;
/// the result does not depend on the schedule.
pub fn encode_image(
    img: &ImageBuffer,
    position: &PositionCodebook,
    color: &ColorCodebook,
) -> Result<PixelHvGrid> {
    let pc = position.config();
    let cc = color.config();
    if (pc.n_rows, pc.n_cols) != (img.height(), img.width()) {
        return Err(Error::ShapeMismatch {
            expected: (pc.n_rows, pc.n_cols),
            actual: (img.height(), img.width()),
        });
    }
    if cc.channels != img.channels() {
        return Err(Error::Invalid(format!(
            "color codebook has {} channels, image has {}",
            cc.channels,
            img.channels()
        )));
    }
    check_dim(pc.dim, cc.dim)?;

    let dim = pc.dim;
    let stride = words_for(dim);
    let width = img.width();
    let mut words = vec![0u64; stride * img.len()];
    words
        .par_chunks_mut(stride)
        .enumerate()
        .try_for_each(|(idx, out)| {
            let (i, j) = (idx / width, idx % width);
            let row = position.row_hvs()[i].words();
            let col = position.col_hvs()[j].words();
            for ((o, r), c) in out.iter_mut().zip(row).zip(col) {
                *o = r ^ c;
            }
            color.encode_into(img.pixel(i, j), out)
        })?;
    Ok(PixelHvGrid {
        height: img.height(),
        width,
        dim,
        stride,
        words,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::ColorConfig;
    use crate::hv::Rng;
    use crate::position::PositionConfig;

    fn codebooks(h: usize, w: usize, channels: usize, dim: usize, beta: usize) -> (PositionCodebook, ColorCodebook) {
        let pos = PositionCodebook::build(
            PositionConfig { dim, n_rows: h, n_cols: w, alpha: 1.0, beta },
            &mut Rng::with_stream(11, 0),
        )
        .unwrap();
        let col = ColorCodebook::build(
            ColorConfig { dim, channels, gamma: 1 },
            &mut Rng::with_stream(11, 1),
        )
        .unwrap();
        (pos, col)
    }

    fn pos_law(pos: &PositionCodebook, (i, j): (usize, usize), (k, l): (usize, usize)) -> usize {
        let c = pos.config();
        let b = |v: usize| (v / c.beta) as i64;
        c.x_row() * (b(i) - b(k)).unsigned_abs() as usize
            + c.x_col() * (b(j) - b(l)).unsigned_abs() as usize
    }

    #[test]
    fn pixel_hv_cases() {
        let p: Hypervector = "10110010".parse().unwrap();
        let zero: Hypervector = "00000000".parse().unwrap();
        assert_eq!(pixel_hv(&p, &zero).unwrap(), p);

        let v1: Hypervector = "01100110".parse().unwrap();
        let v2 = v1.flip_range(3, 1).unwrap();
        let y1 = pixel_hv(&p, &v1).unwrap();
        assert_eq!(y1.hamming(&pixel_hv(&p, &v2).unwrap()).unwrap(), 1);

        let p3 = p.flip_range(0, 1).unwrap();
        let v3 = v1.flip_range(5, 1).unwrap();
        assert_eq!(y1.hamming(&pixel_hv(&p3, &v3).unwrap()).unwrap(), 2);

        let p4 = p.flip_range(5, 1).unwrap();
        assert_eq!(y1.hamming(&pixel_hv(&p4, &v3).unwrap()).unwrap(), 0);
        assert!(pixel_hv(&p, &"101".parse().unwrap()).is_err());
    }

    #[test]
    fn single_pixel_image() {
        let (pos, col) = codebooks(1, 1, 3, 800, 1);
        let img = ImageBuffer::new(1, 1, 3, vec![9, 200, 31]).unwrap();
        let grid = encode_image(&img, &pos, &col).unwrap();
        let expected = pos
            .position_hv(0, 0)
            .unwrap()
            .xor(&col.encode(&[9, 200, 31]).unwrap())
            .unwrap();
        assert_eq!(grid.hv(0, 0), expected);
    }

    #[test]
    fn uniform_image_follows_position_law() {
        let (pos, col) = codebooks(6, 7, 1, 600, 2);
        let img = ImageBuffer::new(6, 7, 1, vec![77; 42]).unwrap();
        let grid = encode_image(&img, &pos, &col).unwrap();
        for (a, b) in [((0, 0), (5, 6)), ((1, 3), (4, 0)), ((2, 2), (3, 3))] {
            let d = grid.hv(a.0, a.1).hamming(&grid.hv(b.0, b.1)).unwrap();
            assert_eq!(d, pos_law(&pos, a, b));
        }
    }

    #[test]
    fn one_pixel_change_is_local() {
        let (pos, col) = codebooks(5, 5, 3, 900, 1);
        let img = ImageBuffer::from_fn(5, 5, 3, |i, j, c| (i * 40 + j * 7 + c) as u8).unwrap();
        let mut data = img.data().to_vec();
        let idx = (2 * 5 + 3) * 3;
        data[idx..idx + 3].copy_from_slice(&[250, 1, 60]);
        let img2 = ImageBuffer::new(5, 5, 3, data).unwrap();
        let g1 = encode_image(&img, &pos, &col).unwrap();
        let g2 = encode_image(&img2, &pos, &col).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let d = g1.hv(i, j).hamming(&g2.hv(i, j)).unwrap();
                if (i, j) == (2, 3) {
                    let cd = col
                        .encode(img.pixel(2, 3))
                        .unwrap()
                        .hamming(&col.encode(img2.pixel(2, 3)).unwrap())
                        .unwrap();
                    assert_eq!(d, cd);
                    assert!(d > 0);
                } else {
                    assert_eq!(d, 0);
                }
            }
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let (pos, col) = codebooks(4, 4, 1, 600, 1);
        let img = ImageBuffer::new(4, 5, 1, vec![0; 20]).unwrap();
        assert!(matches!(encode_image(&img, &pos, &col), Err(Error::ShapeMismatch { .. })));
        let rgb = ImageBuffer::new(4, 4, 3, vec![0; 48]).unwrap();
        assert!(encode_image(&rgb, &pos, &col).is_err());
    }

    #[test]
    fn image_buffer_validation() {
        assert!(ImageBuffer::new(0, 3, 1, vec![]).is_err());
        assert!(ImageBuffer::new(2, 2, 2, vec![0; 8]).is_err());
        assert!(ImageBuffer::new(2, 2, 3, vec![0; 11]).is_err());
    }

    #[test]
    fn grid_payload_is_tight() {
        let grid = PixelHvGrid::from_hvs(
            1,
            2,
            &["1".repeat(130).parse().unwrap(), "0".repeat(130).parse().unwrap()],
        )
        .unwrap();
        assert_eq!(grid.payload_bytes(), 2 * 3 * 8);
        assert_eq!(grid.hv(0, 0).count_ones(), 130);
    }
}
