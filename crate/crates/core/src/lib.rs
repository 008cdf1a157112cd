//! Unsupervised image segmentation with binary hypervectors.
//!
//! Pixel positions and colors are encoded into binary hypervectors whose
//! Hamming distances follow a block Manhattan distance on positions and a
//! linear distance on intensities. Pixel vectors (position XOR color) are
//! grouped by a cosine-distance K-Means, and the cluster labels form the
//! segmentation mask.
//!
//! ```
//! use seghdc::{pipeline, ImageBuffer, RunConfig};
//!
//! let img = ImageBuffer::from_fn(8, 8, 1, |_, j, _| if j < 4 { 10 } else { 240 }).unwrap();
//! let config = RunConfig { dim: 1024, beta: 2, ..RunConfig::default() };
//! let seg = pipeline::segment(&img, &config).unwrap();
//! assert_ne!(seg.mask.label(0, 0), seg.mask.label(0, 7));
//! ```

pub mod cli;
pub mod cluster;
pub mod color;
pub mod error;
pub mod eval;
pub mod hv;
pub mod io;
pub mod pipeline;
pub mod pixel;
pub mod position;

pub use cluster::{ClusterConfig, CentroidSet, SegmentationMask};
pub use color::{ColorCodebook, ColorConfig};
pub use error::{Error, Result};
pub use eval::{BinaryMask, MetricsRecord, Timings};
pub use hv::{cosine_distance, Hypervector, IntVector, Rng};
pub use pipeline::RunConfig;
pub use pixel::{EncoderKind, ImageBuffer, PixelHvGrid};
pub use position::{PositionCodebook, PositionConfig};
