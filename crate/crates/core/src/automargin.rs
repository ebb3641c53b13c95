//! Margin schedules driven by batch statistics of `delta` and `phi_an`.
//!
//! AutoMargin sets
//!
//! ```text
//! eps(t)  = mu_delta(t) / K_delta
//! beta(t) = 1 + (mu_an(t) - 1) / K_an
//! ```
//!
//! and clamps both into the ranges accepted by [`MarginState`](crate::losses::MarginState).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::{TripletSims, EPSILON_MAX};

/// Largest epsilon an update may produce.
pub const EPSILON_CEIL: f64 = EPSILON_MAX - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchStats {
    pub mu_delta: f64,
    pub mu_an: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutoMarginConfig {
    pub k_delta: u32,
    pub k_an: u32,
}

impl AutoMarginConfig {
    pub fn new(k_delta: u32, k_an: u32) -> Result<Self> {
        if k_delta == 0 {
            return Err(Error::ConfigInvalid {
                field: "k_delta",
                reason: "must be a positive integer".into(),
            });
        }
        if k_an == 0 {
            return Err(Error::ConfigInvalid {
                field: "k_an",
                reason: "must be a positive integer".into(),
            });
        }
        Ok(Self { k_delta, k_an })
    }
}

impl Default for AutoMarginConfig {
    fn default() -> Self {
        Self { k_delta: 2, k_an: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quartile {
    Q1,
    Q2,
}

impl Quartile {
    pub fn fraction(self) -> f64 {
        match self {
            Quartile::Q1 => 0.25,
            Quartile::Q2 => 0.5,
        }
    }
}

pub fn batch_stats(sims: &[TripletSims]) -> Result<BatchStats> {
    if sims.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let n = sims.len() as f64;
    let (sum_delta, sum_an) = sims
        .iter()
        .fold((0.0, 0.0), |(d, a), s| (d + s.delta(), a + s.phi_an()));
    Ok(BatchStats {
        mu_delta: sum_delta / n,
        mu_an: sum_an / n,
        count: sims.len(),
    })
}

/// Raw (unclamped) AutoMargin values.
pub fn raw_margins(stats: &BatchStats, cfg: &AutoMarginConfig) -> (f64, f64) {
    (
        stats.mu_delta / f64::from(cfg.k_delta),
        1.0 + (stats.mu_an - 1.0) / f64::from(cfg.k_an),
    )
}

pub fn clamp_epsilon(epsilon: f64) -> f64 {
    epsilon.clamp(0.0, EPSILON_CEIL)
}

pub fn clamp_beta(beta: f64) -> f64 {
    beta.clamp(0.0, 1.0)
}

/// AutoMargin update, returning `(epsilon, beta)`.
pub fn update_margins(stats: &BatchStats, cfg: &AutoMarginConfig) -> (f64, f64) {
    let (eps, beta) = raw_margins(stats, cfg);
    (clamp_epsilon(eps), clamp_beta(beta))
}

/// Quantile by linear interpolation between closest ranks, at position
/// `q * (n - 1)` of the sorted values.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

/// Quartile baseline: epsilon from `deltas`, beta from `phi_ans`.
pub fn quartile_margins(deltas: &[f64], phi_ans: &[f64], q: Quartile) -> Result<(f64, f64)> {
    let eps = quantile(deltas, q.fraction())?;
    let beta = quantile(phi_ans, q.fraction())?;
    Ok((clamp_epsilon(eps), clamp_beta(beta)))
}
