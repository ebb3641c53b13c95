//! Metric learning on the unit hypersphere with the AdaTriplet loss and
//! AutoMargin margin scheduling.
//!
//! The crate is organised bottom-up:
//!
//! - [`vector`]: unit vectors, cosine similarity, and the normalization VJP.
//! - [`losses`]: Triplet, AdaTriplet, and contrastive losses with exact
//!   piecewise gradients, plus loss-surface grids.
//! - [`automargin`]: batch statistics and the adaptive margin update.
//! - [`batching`]: M-per-class sampling and in-batch triplet enumeration.
//! - [`trainer`]: free-embedding and linear encoders, Adam, gradient checks,
//!   and the training loop.
//! - [`metrics`]: retrieval evaluation (mAP, mAP@R, CMC).
//! - [`synth`]: synthetic longitudinal identity data with aging drift.

pub mod automargin;
pub mod batching;
pub mod dataset;
pub mod error;
pub mod losses;
pub mod metrics;
pub mod rng;
pub mod synth;
pub mod trainer;
pub mod vector;

pub use error::{Error, Result};
