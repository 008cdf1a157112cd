//! Row/column codebooks whose XOR compositions realize the block decay
//! Manhattan distance between pixel positions.
//!
//! Rows are grouped into blocks of `beta` consecutive indices; each new row
//! block flips the next `x_row` untouched bits of the first half of the
//! vector, so the Hamming distance between two row vectors is exactly
//! `x_row * |block(i) - block(k)|`. Columns do the same in the second half
//! with `x_col`. Because the halves never overlap, the distance between two
//! position vectors `r_i ^ c_j` is the sum of the row and column terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hv::{Hypervector, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionConfig {
    pub dim: usize,
    pub n_rows: usize,
    pub n_cols: usize,
    /// Fraction of each half that the flips of one axis may consume.
    pub alpha: f64,
    /// Block size in rows and columns.
    pub beta: usize,
}

/// `floor(alpha * dim / (2 * n))`. The epsilon keeps products such as
/// `0.2 * 10000` from landing one ulp under an exact integer.
pub fn flip_unit(alpha: f64, dim: usize, n: usize) -> usize {
    let x = alpha * dim as f64 / (2.0 * n as f64);
    (x + 1e-9).floor().max(0.0) as usize
}

pub fn block_index(i: usize, beta: usize) -> usize {
    i / beta
}

impl PositionConfig {
    pub fn x_row(&self) -> usize {
        flip_unit(self.alpha, self.dim, self.n_rows)
    }

    pub fn x_col(&self) -> usize {
        flip_unit(self.alpha, self.dim, self.n_cols)
    }

    /// First index of the column half.
    pub fn half(&self) -> usize {
        self.dim / 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::config("dimension must be at least 1"));
        }
        if self.n_rows == 0 || self.n_cols == 0 {
            return Err(Error::config("image must have at least one row and one column"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if self.beta == 0 {
            return Err(Error::config("beta (block size) must be at least 1"));
        }
        for (axis, n, x) in [
            ("row", self.n_rows, self.x_row()),
            ("column", self.n_cols, self.x_col()),
        ] {
            if x == 0 {
                let needed = (2.0 * n as f64 / self.alpha).ceil();
                return Err(Error::config(format!(
                    "dimension too small for image size: {axis} flip unit \
                     floor(alpha*dim/(2*{n})) is 0 with dim={} alpha={}; \
                     need dim >= {needed}",
                    self.dim, self.alpha
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PositionCodebook {
    config: PositionConfig,
    rows: Vec<Hypervector>,
    cols: Vec<Hypervector>,
}

impl PositionCodebook {
    /// Builds the structured codebook. Flip segments advance left to right
    /// from the start of each half and never overlap.
    pub fn build(config: PositionConfig, rng: &mut Rng) -> Result<Self> {
        config.validate()?;
        let half = config.half();
        let rows = flipped_axis(config, config.n_rows, config.x_row(), 0, rng)?;
        let cols = flipped_axis(config, config.n_cols, config.x_col(), half, rng)?;
        Ok(PositionCodebook { config, rows, cols })
    }

    /// Every row and column vector drawn independently at random; the
    /// position ablation baseline.
    pub fn build_random(config: PositionConfig, rng: &mut Rng) -> Result<Self> {
        config.validate()?;
        let rows = (0..config.n_rows)
            .map(|_| Hypervector::random(config.dim, rng))
            .collect::<Result<_>>()?;
        let cols = (0..config.n_cols)
            .map(|_| Hypervector::random(config.dim, rng))
            .collect::<Result<_>>()?;
        Ok(PositionCodebook { config, rows, cols })
    }

    pub fn config(&self) -> &PositionConfig {
        &self.config
    }

    pub fn row_hvs(&self) -> &[Hypervector] {
        &self.rows
    }

    pub fn col_hvs(&self) -> &[Hypervector] {
        &self.cols
    }

    /// `r_i ^ c_j`.
    pub fn position_hv(&self, i: usize, j: usize) -> Result<Hypervector> {
        let row = self.rows.get(i).ok_or(Error::OutOfRange {
            what: "row index",
            value: i,
            limit: self.config.n_rows,
        })?;
        let col = self.cols.get(j).ok_or(Error::OutOfRange {
            what: "column index",
            value: j,
            limit: self.config.n_cols,
        })?;
        row.xor(col)
    }
}

fn flipped_axis(
    config: PositionConfig,
    n: usize,
    unit: usize,
    start: usize,
    rng: &mut Rng,
) -> Result<Vec<Hypervector>> {
    let blocks = n.div_ceil(config.beta);
    let mut block_hvs = Vec::with_capacity(blocks);
    let mut current = Hypervector::random(config.dim, rng)?;
    let mut cursor = start;
    block_hvs.push(current.clone());
    for _ in 1..blocks {
        current.flip_range_in_place(cursor, unit)?;
        cursor += unit;
        block_hvs.push(current.clone());
    }
    Ok((0..n)
        .map(|i| block_hvs[block_index(i, config.beta)].clone())
        .collect())
}
