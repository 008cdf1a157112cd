//! IoU scoring and per-run metrics records.

use serde::{Deserialize, Serialize};

use crate::cluster::SegmentationMask;
use crate::error::{check_dim, Error, Result};
use crate::pixel::{EncoderKind, ImageBuffer};

/// Largest cluster count for which every foreground subset is tried.
pub const MAX_MATCH_CLUSTERS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Invalid("mask dimensions must be positive".into()));
        }
        check_dim(height * width, bits.len())?;
        Ok(BinaryMask { height, width, bits })
    }

    /// Ground truth: any nonzero sample marks the pixel as foreground.
    pub fn from_image(img: &ImageBuffer) -> Self {
        BinaryMask {
            height: img.height(),
            width: img.width(),
            bits: img.pixels().map(|p| p.iter().any(|&v| v != 0)).collect(),
        }
    }

    /// Pixels whose label is in `labels` become foreground.
    pub fn from_labels(mask: &SegmentationMask, labels: &[u32]) -> Self {
        BinaryMask {
            height: mask.height(),
            width: mask.width(),
            bits: mask.labels().iter().map(|l| labels.contains(l)).collect(),
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

fn check_shape(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            expected: a,
            actual: b,
        })
    }
}

/// `|pred & gt| / |pred | gt|`; 1.0 when both are empty.
pub fn iou(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64> {
    check_shape((gt.height, gt.width), (pred.height, pred.width))?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&p, &g) in pred.bits.iter().zip(&gt.bits) {
        inter += usize::from(p && g);
        union += usize::from(p || g);
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForegroundMatch {
    pub iou: f64,
    /// Labels treated as foreground, ascending.
    pub labels: Vec<u32>,
}

/// Non-empty proper subsets of `0..k`, by size then lexicographically.
/// With `k == 1` the only candidate is `{0}`.
fn candidate_subsets(k: usize) -> Vec<Vec<u32>> {
    if k == 1 {
        return vec![vec![0]];
    }
    let mut subsets: Vec<Vec<u32>> = (1u32..(1 << k) - 1)
        .map(|bits| (0..k as u32).filter(|l| bits & (1 << l) != 0).collect())
        .collect();
    subsets.sort_by(|a: &Vec<u32>, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    subsets
}

/// Best IoU over every way of calling a subset of clusters foreground.
pub fn best_foreground_iou(mask: &SegmentationMask, gt: &BinaryMask, k: usize) -> Result<ForegroundMatch> {
    if k == 0 {
        return Err(Error::config("number of clusters must be at least 1"));
    }
    if k > MAX_MATCH_CLUSTERS {
        return Err(Error::config(format!(
            "exhaustive matching unsupported for k={k} (at most {MAX_MATCH_CLUSTERS} clusters)"
        )));
    }
    check_shape((gt.height, gt.width), (mask.height(), mask.width()))?;
    if mask.label_bound() > k {
        return Err(Error::OutOfRange {
            what: "cluster label",
            value: mask.label_bound() - 1,
            limit: k,
        });
    }
    let mut best: Option<ForegroundMatch> = None;
    for labels in candidate_subsets(k) {
        let score = iou(&BinaryMask::from_labels(mask, &labels), gt)?;
        if best.as_ref().is_none_or(|b| score > b.iou) {
            best = Some(ForegroundMatch { iou: score, labels });
        }
    }
    Ok(best.expect("at least one candidate subset"))
}

/// Wall-clock milliseconds per pipeline stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub encode_position: f64,
    pub encode_color: f64,
    pub produce_pixels: f64,
    pub cluster: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub d: usize,
    pub alpha: f64,
    pub beta: usize,
    pub gamma: usize,
    pub k: usize,
    pub iterations: usize,
    pub encoder: EncoderKind,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    /// Absent when no ground truth was supplied.
    pub iou: Option<f64>,
    pub iterations_run: usize,
    pub timings: Timings,
    pub config: ConfigEcho,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub foreground_labels: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
}
