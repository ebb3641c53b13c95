use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{EmbeddingRow, LabeledSample};
use crate::error::{Error, Result};
use crate::vector::{normalize_slice, RawVector, UnitVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderMode {
    /// One free parameter row per training sample.
    FreeEmbedding,
    /// `normalize(W x)` with `W` of shape `D x input_dim`.
    Linear,
}

/// Encoder parameters as a row-major `rows x cols` matrix.
///
/// `FreeEmbedding` stores one row per sample (`N x D`); `Linear` stores the
/// weight matrix (`D x input_dim`).
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    mode: EncoderMode,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

pub enum EncoderInput<'a> {
    Index(usize),
    Vector(&'a RawVector),
}

impl EncoderParams {
    pub fn from_rows(mode: EncoderMode, rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 {
            return Err(Error::EmptyInput);
        }
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                left: cols,
                right: r.len(),
            });
        }
        let data: Vec<f64> = rows.concat();
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let params = Self {
            mode,
            rows: rows.len(),
            cols,
            data,
        };
        if params.embed_dim() < 2 {
            return Err(Error::DimensionTooSmall(params.embed_dim()));
        }
        Ok(params)
    }

    /// Random initialization.
    ///
    /// `Linear` draws `W` with i.i.d. `N(0, 1/input_dim)` entries.
    /// `FreeEmbedding` draws every table entry i.i.d. `N(0, 1)`, one row per
    /// sample of `dataset`; the inputs themselves are not used.
    pub fn init<R: Rng>(mode: EncoderMode, dataset: &[LabeledSample], embed_dim: usize, rng: &mut R) -> Result<Self> {
        if embed_dim < 2 {
            return Err(Error::DimensionTooSmall(embed_dim));
        }
        let input_dim = dataset.first().ok_or(Error::EmptyInput)?.input.dim();
        let (rows, cols, scale) = match mode {
            EncoderMode::Linear => (embed_dim, input_dim, 1.0 / (input_dim as f64).sqrt()),
            EncoderMode::FreeEmbedding => (dataset.len(), embed_dim, 1.0),
        };
        let data = (0..rows * cols)
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Ok(Self { mode, rows, cols, data })
    }

    pub fn mode(&self) -> EncoderMode {
        self.mode
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn embed_dim(&self) -> usize {
        match self.mode {
            EncoderMode::FreeEmbedding => self.cols,
            EncoderMode::Linear => self.rows,
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub(crate) fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                left: self.cols,
                right: x.len(),
            });
        }
        Ok((0..self.rows).map(|r| crate::vector::dot(self.row(r), x)).collect())
    }

    /// Encoder output before normalization.
    pub fn pre_activation(&self, input: EncoderInput<'_>) -> Result<Vec<f64>> {
        match (self.mode, input) {
            (EncoderMode::FreeEmbedding, EncoderInput::Index(i)) => {
                if i >= self.rows {
                    return Err(Error::IndexOutOfRange {
                        index: i,
                        len: self.rows,
                    });
                }
                Ok(self.row(i).to_vec())
            }
            (EncoderMode::Linear, EncoderInput::Vector(x)) => self.apply(x.as_slice()),
            (EncoderMode::FreeEmbedding, EncoderInput::Vector(_)) => Err(Error::ConfigInvalid {
                field: "input",
                reason: "free embeddings are addressed by sample index".into(),
            }),
            (EncoderMode::Linear, EncoderInput::Index(_)) => Err(Error::ConfigInvalid {
                field: "input",
                reason: "linear encoder needs an input vector".into(),
            }),
        }
    }

    pub fn forward(&self, input: EncoderInput<'_>) -> Result<UnitVector> {
        normalize_slice(&self.pre_activation(input)?)
    }

    /// Pre-activation of dataset sample `i`, whatever the mode.
    pub(crate) fn sample_pre_activation(&self, dataset: &[LabeledSample], i: usize) -> Result<Vec<f64>> {
        match self.mode {
            EncoderMode::FreeEmbedding => self.pre_activation(EncoderInput::Index(i)),
            EncoderMode::Linear => {
                let s = dataset.get(i).ok_or(Error::IndexOutOfRange {
                    index: i,
                    len: dataset.len(),
                })?;
                self.pre_activation(EncoderInput::Vector(&s.input))
            }
        }
    }

    pub fn embed_sample(&self, dataset: &[LabeledSample], i: usize) -> Result<UnitVector> {
        normalize_slice(&self.sample_pre_activation(dataset, i)?)
    }

    /// Embeds every sample of `dataset`. A free-embedding table only covers
    /// the dataset it was trained on.
    pub fn embed_all(&self, dataset: &[LabeledSample]) -> Result<Vec<EmbeddingRow>> {
        if self.mode == EncoderMode::FreeEmbedding && dataset.len() != self.rows {
            return Err(Error::ShapeMismatch {
                expected: self.rows,
                actual: dataset.len(),
            });
        }
        dataset
            .iter()
            .enumerate()
            .map(|(i, s)| {
                Ok(EmbeddingRow {
                    subject_id: s.subject_id,
                    year: s.year,
                    embedding: self.embed_sample(dataset, i)?,
                })
            })
            .collect()
    }
}
