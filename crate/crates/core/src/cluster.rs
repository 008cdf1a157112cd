//! K-Means over pixel hypervectors with cosine distance.
//!
//! Centroids are raw integer sums of their members' hypervectors. Cosine
//! distance ignores magnitude, so sums are never averaged or re-binarized.
//! Nearest-centroid decisions are made with exact integer arithmetic:
//! comparing `dot_a / |z_a|` against `dot_b / |z_b|` is done as
//! `dot_a^2 * |z_b|^2` versus `dot_b^2 * |z_a|^2`.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::hv::{accumulate_words, dot_words, IntVector};
use crate::pixel::{ImageBuffer, PixelHvGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub k: usize,
    pub iterations: usize,
    pub early_stop: bool,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            k: 2,
            iterations: 10,
            early_stop: true,
        }
    }
}

impl ClusterConfig {
    pub fn validate(&self, pixels: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("number of clusters must be at least 1"));
        }
        if self.iterations == 0 {
            return Err(Error::config("iterations must be at least 1"));
        }
        if self.k > pixels {
            return Err(Error::config(format!(
                "number of clusters ({}) exceeds pixel count ({pixels})",
                self.k
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentationMask {
    height: usize,
    width: usize,
    labels: Vec<u32>,
}

impl SegmentationMask {
    pub fn new(height: usize, width: usize, labels: Vec<u32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Invalid("mask dimensions must be positive".into()));
        }
        check_dim(height * width, labels.len())?;
        Ok(SegmentationMask {
            height,
            width,
            labels,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, i: usize, j: usize) -> u32 {
        self.labels[i * self.width + j]
    }

    /// Smallest `k` for which every label is valid.
    pub fn label_bound(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m as usize + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CentroidSet {
    centroids: Vec<IntVector>,
    member_counts: Vec<usize>,
}

impl CentroidSet {
    pub fn new(centroids: Vec<IntVector>, member_counts: Vec<usize>) -> Result<Self> {
        check_dim(centroids.len(), member_counts.len())?;
        let dim = centroids
            .first()
            .map(IntVector::dim)
            .ok_or_else(|| Error::config("at least one centroid is required"))?;
        for c in &centroids {
            check_dim(dim, c.dim())?;
        }
        Ok(CentroidSet {
            centroids,
            member_counts,
        })
    }

    /// One centroid per seed pixel, each equal to that pixel's hypervector.
    pub fn from_pixels(grid: &PixelHvGrid, seeds: &[(usize, usize)]) -> Result<Self> {
        let centroids = seeds
            .iter()
            .map(|&(i, j)| {
                if i >= grid.height() || j >= grid.width() {
                    return Err(Error::OutOfRange {
                        what: "seed pixel",
                        value: i * grid.width() + j,
                        limit: grid.len(),
                    });
                }
                let mut c = IntVector::zeros(grid.dim())?;
                accumulate_words(c.values_mut(), grid.words_at(i * grid.width() + j));
                Ok(c)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(centroids, vec![1; seeds.len()])
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn dim(&self) -> usize {
        self.centroids[0].dim()
    }

    pub fn centroids(&self) -> &[IntVector] {
        &self.centroids
    }

    pub fn member_counts(&self) -> &[usize] {
        &self.member_counts
    }
}

#[derive(Debug, Clone, Copy)]
struct Score {
    dot: u64,
    norm_sq: u128,
}

impl Score {
    /// Orders by cosine similarity `dot / sqrt(norm_sq)`, zero when the
    /// centroid is the zero vector.
    fn cmp_similarity(&self, other: &Score) -> Ordering {
        match (self.norm_sq == 0, other.norm_sq == 0) {
            (true, true) => Ordering::Equal,
            (true, false) => 0.cmp(&other.dot),
            (false, true) => self.dot.cmp(&0),
            (false, false) => {
                let lhs = (self.dot as u128)
                    .checked_mul(self.dot as u128)
                    .and_then(|v| v.checked_mul(other.norm_sq));
                let rhs = (other.dot as u128)
                    .checked_mul(other.dot as u128)
                    .and_then(|v| v.checked_mul(self.norm_sq));
                match (lhs, rhs) {
                    (Some(l), Some(r)) => l.cmp(&r),
                    _ => {
                        let a = self.dot as f64 / (self.norm_sq as f64).sqrt();
                        let b = other.dot as f64 / (other.norm_sq as f64).sqrt();
                        a.partial_cmp(&b).unwrap_or(Ordering::Equal)
                    }
                }
            }
        }
    }
}

/// Initial centroid pixels, chosen by color spread.
///
/// The first is the pixel with the smallest channel sum, the second the one
/// with the largest; the rest are picked greedily to maximize the minimum L1
/// color distance to those already chosen. Ties go to the first pixel in
/// row-major order. A uniform image falls back to its corners, then to
/// row-major order.
pub fn select_initial_centroids(img: &ImageBuffer, k: usize) -> Result<Vec<(usize, usize)>> {
    let n = img.len();
    if k == 0 {
        return Err(Error::config("number of clusters must be at least 1"));
    }
    if k > n {
        return Err(Error::config(format!(
            "number of clusters ({k}) exceeds pixel count ({n})"
        )));
    }
    let w = img.width();
    let coord = |idx: usize| (idx / w, idx % w);
    let keys: Vec<u32> = img
        .pixels()
        .map(|p| p.iter().map(|&v| v as u32).sum())
        .collect();

    let mut min_idx = 0;
    let mut max_idx = 0;
    for (idx, &key) in keys.iter().enumerate() {
        if key < keys[min_idx] {
            min_idx = idx;
        }
        if key > keys[max_idx] {
            max_idx = idx;
        }
    }

    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    if keys[min_idx] == keys[max_idx] {
        let (h, w) = (img.height(), img.width());
        let corners = [0, w - 1, (h - 1) * w, (h - 1) * w + w - 1];
        for idx in corners.into_iter().chain(0..n) {
            if chosen.len() == k {
                break;
            }
            if !chosen.contains(&idx) {
                chosen.push(idx);
            }
        }
        return Ok(chosen.into_iter().map(coord).collect());
    }

    chosen.push(min_idx);
    if k >= 2 {
        chosen.push(max_idx);
    }
    if k > 2 {
        let pixels: Vec<&[u8]> = img.pixels().collect();
        let l1 = |a: &[u8], b: &[u8]| -> u32 {
            a.iter()
                .zip(b)
                .map(|(&x, &y)| (x as i32 - y as i32).unsigned_abs())
                .sum()
        };
        let mut is_chosen = vec![false; n];
        let mut nearest = vec![u32::MAX; n];
        for &c in &chosen {
            is_chosen[c] = true;
            for idx in 0..n {
                nearest[idx] = nearest[idx].min(l1(pixels[idx], pixels[c]));
            }
        }
        while chosen.len() < k {
            let mut best: Option<usize> = None;
            for idx in 0..n {
                if is_chosen[idx] {
                    continue;
                }
                if best.is_none_or(|b| nearest[idx] > nearest[b]) {
                    best = Some(idx);
                }
            }
            let pick = best.expect("k <= pixel count leaves a candidate");
            chosen.push(pick);
            is_chosen[pick] = true;
            for idx in 0..n {
                nearest[idx] = nearest[idx].min(l1(pixels[idx], pixels[pick]));
            }
        }
    }
    Ok(chosen.into_iter().map(coord).collect())
}

/// Nearest centroid by cosine distance for every pixel; ties go to the
/// lowest cluster index.
pub fn assign_labels(grid: &PixelHvGrid, centroids: &CentroidSet) -> Result<SegmentationMask> {
    check_dim(grid.dim(), centroids.dim())?;
    let norms: Vec<u128> = centroids
        .centroids()
        .iter()
        .map(|c| c.values().iter().map(|&v| (v as u128) * (v as u128)).sum())
        .collect();
    let labels: Vec<u32> = grid
        .raw_words()
        .par_chunks(grid.stride())
        .with_min_len(256)
        .map(|words| {
            let mut best = 0usize;
            let mut best_score: Option<Score> = None;
            for (c, (centroid, &norm_sq)) in centroids.centroids().iter().zip(&norms).enumerate() {
                let score = Score {
                    dot: dot_words(words, centroid.values()),
                    norm_sq,
                };
                let better = match &best_score {
                    None => true,
                    Some(b) => score.cmp_similarity(b) == Ordering::Greater,
                };
                if better {
                    best = c;
                    best_score = Some(score);
                }
            }
            best as u32
        })
        .collect();
    SegmentationMask::new(grid.height(), grid.width(), labels)
}

/// Sums each cluster's members. Empty clusters keep their previous centroid.
pub fn update_centroids(
    grid: &PixelHvGrid,
    mask: &SegmentationMask,
    prev: &CentroidSet,
) -> Result<CentroidSet> {
    if (mask.height(), mask.width()) != (grid.height(), grid.width()) {
        return Err(Error::ShapeMismatch {
            expected: (grid.height(), grid.width()),
            actual: (mask.height(), mask.width()),
        });
    }
    check_dim(grid.dim(), prev.dim())?;
    let k = prev.k();
    if let Some(&bad) = mask.labels().iter().find(|&&l| l as usize >= k) {
        return Err(Error::OutOfRange {
            what: "cluster label",
            value: bad as usize,
            limit: k,
        });
    }
    let dim = grid.dim();
    let empty = || (vec![vec![0u32; dim]; k], vec![0usize; k]);
    let (sums, counts) = grid
        .raw_words()
        .par_chunks(grid.stride())
        .zip(mask.labels().par_iter())
        .with_min_len(1024)
        .fold(empty, |(mut sums, mut counts), (words, &label)| {
            accumulate_words(&mut sums[label as usize], words);
            counts[label as usize] += 1;
            (sums, counts)
        })
        .reduce(empty, |(mut sa, mut ca), (sb, cb)| {
            for (a, b) in sa.iter_mut().zip(&sb) {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            }
            for (a, b) in ca.iter_mut().zip(&cb) {
                *a += b;
            }
            (sa, ca)
        });
    let centroids = sums
        .into_iter()
        .zip(&counts)
        .zip(prev.centroids())
        .map(|((sum, &count), old)| {
            if count == 0 {
                Ok(old.clone())
            } else {
                IntVector::from_values(sum)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    CentroidSet::new(centroids, counts)
}

#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    pub mask: SegmentationMask,
    pub iterations_run: usize,
    pub centroids: CentroidSet,
}

pub fn cluster(grid: &PixelHvGrid, img: &ImageBuffer, config: &ClusterConfig) -> Result<ClusterOutcome> {
    cluster_with(grid, img, config, |_, _| Ok(()))
}

/// Runs the assign/update loop, calling `on_round` with the mask produced by
/// each round (1-based). With early stopping the loop ends at the first
/// round whose assignment equals the previous one.
pub fn cluster_with<F>(
    grid: &PixelHvGrid,
    img: &ImageBuffer,
    config: &ClusterConfig,
    mut on_round: F,
) -> Result<ClusterOutcome>
where
    F: FnMut(usize, &SegmentationMask) -> Result<()>,
{
    config.validate(grid.len())?;
    if (img.height(), img.width()) != (grid.height(), grid.width()) {
        return Err(Error::ShapeMismatch {
            expected: (grid.height(), grid.width()),
            actual: (img.height(), img.width()),
        });
    }
    let seeds = select_initial_centroids(img, config.k)?;
    let mut centroids = CentroidSet::from_pixels(grid, &seeds)?;
    let mut prev: Option<SegmentationMask> = None;
    for round in 1..=config.iterations {
        let mask = assign_labels(grid, &centroids)?;
        on_round(round, &mask)?;
        let converged = prev.as_ref() == Some(&mask);
        if (config.early_stop && converged) || round == config.iterations {
            return Ok(ClusterOutcome {
                mask,
                iterations_run: round,
                centroids,
            });
        }
        centroids = update_centroids(grid, &mask, &centroids)?;
        prev = Some(mask);
    }
    unreachable!("iterations >= 1 is validated")
}
