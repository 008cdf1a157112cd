//! Per-channel color codebooks with Hamming distance linear in intensity
//! difference, and multi-channel encoding by concatenation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hv::{words_for, xor_words_at, Hypervector, Rng};

pub const LEVELS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorConfig {
    pub dim: usize,
    /// 1 (grayscale) or 3 (RGB).
    pub channels: usize,
    /// Flip-expansion factor: each unit color step flips runs `gamma` times
    /// longer.
    pub gamma: usize,
}

impl ColorConfig {
    /// Sub-dimension of each channel. Three channels split `dim` as evenly as
    /// possible, remainder to the leading channels.
    pub fn sub_dims(&self) -> Vec<usize> {
        let base = self.dim / self.channels.max(1);
        let rem = self.dim % self.channels.max(1);
        (0..self.channels)
            .map(|c| base + usize::from(c < rem))
            .collect()
    }

    /// `gamma * floor(d_ch / (256 * gamma))`.
    pub fn unit(&self, sub_dim: usize) -> usize {
        if self.gamma == 0 {
            return 0;
        }
        self.gamma * (sub_dim / (LEVELS * self.gamma))
    }

    pub fn units(&self) -> Vec<usize> {
        self.sub_dims().into_iter().map(|d| self.unit(d)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.channels, 1 | 3) {
            return Err(Error::config(format!(
                "color channels must be 1 or 3, got {}",
                self.channels
            )));
        }
        if self.gamma == 0 {
            return Err(Error::config("gamma must be at least 1"));
        }
        let smallest = *self.sub_dims().iter().min().unwrap_or(&0);
        if self.unit(smallest) < self.gamma {
            let needed = LEVELS * self.gamma * self.channels;
            return Err(Error::config(format!(
                "dimension too small for color resolution: channel dimension {smallest} \
                 < 256*gamma = {} (dim={}, channels={}, gamma={}); need dim >= {needed}",
                LEVELS * self.gamma,
                self.dim,
                self.channels,
                self.gamma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ColorCodebook {
    config: ColorConfig,
    offsets: Vec<usize>,
    tables: Vec<Vec<Hypervector>>,
}

impl ColorCodebook {
    /// Entry 0 of each channel is random; entry `v` flips the next `u_c`
    /// untouched bits of entry `v - 1`.
    pub fn build(config: ColorConfig, rng: &mut Rng) -> Result<Self> {
        config.validate()?;
        let tables = config
            .sub_dims()
            .into_iter()
            .map(|sub_dim| {
                let unit = config.unit(sub_dim);
                let mut table = Vec::with_capacity(LEVELS);
                let mut current = Hypervector::random(sub_dim, rng)?;
                table.push(current.clone());
                for v in 1..LEVELS {
                    current.flip_range_in_place((v - 1) * unit, unit)?;
                    table.push(current.clone());
                }
                Ok(table)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_tables(config, tables))
    }

    /// All 256 entries per channel drawn independently; the color ablation
    /// baseline.
    pub fn build_random(config: ColorConfig, rng: &mut Rng) -> Result<Self> {
        config.validate()?;
        let tables = config
            .sub_dims()
            .into_iter()
            .map(|sub_dim| {
                (0..LEVELS)
                    .map(|_| Hypervector::random(sub_dim, rng))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_tables(config, tables))
    }

    fn from_tables(config: ColorConfig, tables: Vec<Vec<Hypervector>>) -> Self {
        let offsets = config
            .sub_dims()
            .iter()
            .scan(0, |acc, &d| {
                let start = *acc;
                *acc += d;
                Some(start)
            })
            .collect();
        ColorCodebook {
            config,
            offsets,
            tables,
        }
    }

    pub fn config(&self) -> &ColorConfig {
        &self.config
    }

    pub fn table(&self, channel: usize) -> &[Hypervector] {
        &self.tables[channel]
    }

    /// Concatenation of each channel's entry, in channel order.
    pub fn encode(&self, color: &[u8]) -> Result<Hypervector> {
        let mut words = vec![0u64; words_for(self.config.dim)];
        self.encode_into(color, &mut words)?;
        Hypervector::from_words(self.config.dim, words)
    }

    /// XORs the encoding of `color` into `out`.
    pub(crate) fn encode_into(&self, color: &[u8], out: &mut [u64]) -> Result<()> {
        if color.len() != self.config.channels {
            return Err(Error::Invalid(format!(
                "expected {} color channels, got {}",
                self.config.channels,
                color.len()
            )));
        }
        for ((table, &offset), &value) in self.tables.iter().zip(&self.offsets).zip(color) {
            xor_words_at(out, offset, table[value as usize].words());
        }
        Ok(())
    }
}
