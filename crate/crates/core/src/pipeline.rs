//! End-to-end segmentation: codebooks, pixel encoding, clustering, timing.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cluster::{cluster_with, ClusterConfig, SegmentationMask};
use crate::color::{ColorCodebook, ColorConfig};
use crate::error::Result;
use crate::eval::{best_foreground_iou, BinaryMask, ConfigEcho, MetricsRecord, Timings};
use crate::hv::Rng;
use crate::pixel::{encode_image, EncoderKind, ImageBuffer, PixelHvGrid};
use crate::position::{PositionCodebook, PositionConfig};

const POSITION_STREAM: u64 = 1;
const COLOR_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dim: usize,
    pub alpha: f64,
    pub beta: usize,
    pub gamma: usize,
    pub clusters: usize,
    pub iterations: usize,
    pub seed: u64,
    pub encoder: EncoderKind,
    pub early_stop: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: 10_000,
            alpha: 0.2,
            beta: 26,
            gamma: 1,
            clusters: 2,
            iterations: 10,
            seed: 0,
            encoder: EncoderKind::Manhattan,
            early_stop: true,
        }
    }
}

/// Per-component configurations derived from a [`RunConfig`] and an image
/// shape, all validated.
#[derive(Debug, Clone, Copy)]
pub struct Plan {
    pub position: PositionConfig,
    pub color: ColorConfig,
    pub cluster: ClusterConfig,
}

impl RunConfig {
    pub fn plan(&self, height: usize, width: usize, channels: usize) -> Result<Plan> {
        let position = PositionConfig {
            dim: self.dim,
            n_rows: height,
            n_cols: width,
            alpha: self.alpha,
            beta: self.beta,
        };
        let color = ColorConfig {
            dim: self.dim,
            channels,
            gamma: self.gamma,
        };
        let cluster = ClusterConfig {
            k: self.clusters,
            iterations: self.iterations,
            early_stop: self.early_stop,
        };
        position.validate()?;
        color.validate()?;
        cluster.validate(height * width)?;
        Ok(Plan {
            position,
            color,
            cluster,
        })
    }

    pub fn plan_for(&self, img: &ImageBuffer) -> Result<Plan> {
        self.plan(img.height(), img.width(), img.channels())
    }

    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            d: self.dim,
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            k: self.clusters,
            iterations: self.iterations,
            encoder: self.encoder,
            seed: self.seed,
        }
    }
}

pub fn build_codebooks(
    config: &RunConfig,
    plan: &Plan,
    timings: &mut Timings,
) -> Result<(PositionCodebook, ColorCodebook)> {
    let mut pos_rng = Rng::with_stream(config.seed, POSITION_STREAM);
    let mut color_rng = Rng::with_stream(config.seed, COLOR_STREAM);

    let t = Instant::now();
    let position = match config.encoder {
        EncoderKind::Rpos => PositionCodebook::build_random(plan.position, &mut pos_rng)?,
        _ => PositionCodebook::build(plan.position, &mut pos_rng)?,
    };
    timings.encode_position = ms(t);

    let t = Instant::now();
    let color = match config.encoder {
        EncoderKind::Rcolor => ColorCodebook::build_random(plan.color, &mut color_rng)?,
        _ => ColorCodebook::build(plan.color, &mut color_rng)?,
    };
    timings.encode_color = ms(t);
    Ok((position, color))
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    pub mask: SegmentationMask,
    pub iterations_run: usize,
    pub timings: Timings,
}

pub fn encode(img: &ImageBuffer, config: &RunConfig) -> Result<PixelHvGrid> {
    let plan = config.plan_for(img)?;
    let (position, color) = build_codebooks(config, &plan, &mut Timings::default())?;
    encode_image(img, &position, &color)
}

pub fn segment(img: &ImageBuffer, config: &RunConfig) -> Result<Segmentation> {
    segment_with(img, config, |_, _| Ok(()))
}

/// Full pipeline; `on_round` receives the mask after every clustering round.
pub fn segment_with<F>(img: &ImageBuffer, config: &RunConfig, on_round: F) -> Result<Segmentation>
where
    F: FnMut(usize, &SegmentationMask) -> Result<()>,
{
    let start = Instant::now();
    let plan = config.plan_for(img)?;
    let mut timings = Timings::default();
    let (position, color) = build_codebooks(config, &plan, &mut timings)?;

    let t = Instant::now();
    let grid = encode_image(img, &position, &color)?;
    timings.produce_pixels = ms(t);

    let t = Instant::now();
    let outcome = cluster_with(&grid, img, &plan.cluster, on_round)?;
    timings.cluster = ms(t);
    timings.total = ms(start);

    Ok(Segmentation {
        mask: outcome.mask,
        iterations_run: outcome.iterations_run,
        timings,
    })
}

impl Segmentation {
    pub fn metrics(&self, config: &RunConfig, gt: Option<&BinaryMask>) -> Result<MetricsRecord> {
        let matched = gt
            .map(|gt| best_foreground_iou(&self.mask, gt, config.clusters))
            .transpose()?;
        Ok(MetricsRecord {
            iou: matched.as_ref().map(|m| m.iou),
            iterations_run: self.iterations_run,
            timings: self.timings,
            config: config.echo(),
            foreground_labels: matched.map(|m| m.labels),
            input: None,
        })
    }
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}
