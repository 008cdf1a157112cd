#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use seghdc::{BinaryMask, ImageBuffer};

/// splitmix64; keeps test sampling independent of the library generator.
pub struct Sampler(u64);

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler(seed)
    }

    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `lo..=hi`.
    pub fn range(&mut self, lo: u64, hi: u64) -> u64 {
        lo + self.next() % (hi - lo + 1)
    }

    pub fn pick<T: Copy>(&mut self, items: &[T]) -> T {
        items[self.next() as usize % items.len()]
    }
}

/// 64x64 RGB image: left half 30 +/- 10, right half 220 +/- 10, noise drawn
/// independently per channel.
pub fn two_region_image(seed: u64) -> ImageBuffer {
    let mut s = Sampler::new(0xC0FFEE ^ seed);
    ImageBuffer::from_fn(64, 64, 3, |_, j, _| {
        let base: i64 = if j < 32 { 30 } else { 220 };
        (base + s.range(0, 20) as i64 - 10) as u8
    })
    .unwrap()
}

pub fn two_region_truth() -> BinaryMask {
    BinaryMask::new(64, 64, (0..64 * 64).map(|i| i % 64 >= 32).collect()).unwrap()
}

pub fn two_region_truth_image() -> ImageBuffer {
    ImageBuffer::from_fn(64, 64, 1, |_, j, _| if j >= 32 { 255 } else { 0 }).unwrap()
}

/// Bright noisy disks on a dark noisy background, with the matching truth.
pub fn nuclei_image(height: usize, width: usize, channels: usize, seed: u64) -> (ImageBuffer, ImageBuffer) {
    let mut s = Sampler::new(seed);
    let disks: Vec<(i64, i64, i64)> = (0..12)
        .map(|_| {
            (
                s.range(0, height as u64 - 1) as i64,
                s.range(0, width as u64 - 1) as i64,
                s.range(8, (height.min(width) / 8).max(9) as u64) as i64,
            )
        })
        .collect();
    let inside = |i: usize, j: usize| {
        disks
            .iter()
            .any(|&(ci, cj, r)| (i as i64 - ci).pow(2) + (j as i64 - cj).pow(2) <= r * r)
    };
    let img = ImageBuffer::from_fn(height, width, channels, |i, j, _| {
        let base: i64 = if inside(i, j) { 190 } else { 40 };
        (base + s.range(0, 40) as i64 - 20) as u8
    })
    .unwrap();
    let gt = ImageBuffer::from_fn(height, width, 1, |i, j, _| if inside(i, j) { 255 } else { 0 }).unwrap();
    (img, gt)
}

pub fn write_png(img: &ImageBuffer, path: &Path) {
    seghdc::io::save_png(img, path).unwrap();
}

pub fn seghdc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seghdc"))
        .args(args)
        .output()
        .expect("spawn seghdc")
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}
