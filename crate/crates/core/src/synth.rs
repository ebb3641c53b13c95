//! Synthetic longitudinal identity data with a population-wide drift.
//!
//! Each subject gets a Gaussian center and an individual drift rate; all
//! subjects drift along one shared direction `u`. The sample of subject `s`
//! at year `t` is `c_s + t * rate_s * u + noise`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledSample;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::vector::RawVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_subjects: usize,
    pub years: usize,
    pub input_dim: usize,
    /// Scale of the subject centers.
    pub class_sep: f64,
    /// Scale of the per-subject yearly drift rate.
    pub drift: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_subjects: 50,
            years: 8,
            input_dim: 16,
            class_sep: 0.4,
            drift: 0.5,
            noise_std: 0.2,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let invalid = |field: &'static str, reason: String| Err(Error::ConfigInvalid { field, reason });
        if self.n_subjects < 2 {
            return invalid("n_subjects", format!("{} < 2", self.n_subjects));
        }
        if self.years < 1 {
            return invalid("years", "must be at least 1".into());
        }
        if self.input_dim < 2 {
            return invalid("input_dim", format!("{} < 2", self.input_dim));
        }
        if !(self.class_sep > 0.0 && self.class_sep.is_finite()) {
            return invalid("class_sep", format!("{} must be positive", self.class_sep));
        }
        if !(self.drift >= 0.0 && self.drift.is_finite()) {
            return invalid("drift", format!("{} must be non-negative", self.drift));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return invalid("noise_std", format!("{} must be non-negative", self.noise_std));
        }
        Ok(())
    }
}

fn gaussian_vec<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Generates `n_subjects * years` samples, subject-major, years ascending.
pub fn generate(cfg: &SynthConfig) -> Result<Vec<LabeledSample>> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, Stream::Synth);
    let dim = cfg.input_dim;

    let direction = loop {
        let v = gaussian_vec(&mut rng, dim, 1.0);
        let norm = crate::vector::l2_norm(&v);
        if norm > 1e-6 {
            break v.into_iter().map(|x| x / norm).collect::<Vec<_>>();
        }
    };
    let subjects: Vec<(Vec<f64>, f64)> = (0..cfg.n_subjects)
        .map(|_| {
            let center = gaussian_vec(&mut rng, dim, cfg.class_sep);
            let rate = cfg.drift * rng.sample::<f64, _>(StandardNormal).abs();
            (center, rate)
        })
        .collect();

    let mut samples = Vec::with_capacity(cfg.n_subjects * cfg.years);
    for (subject_id, (center, rate)) in subjects.iter().enumerate() {
        for year in 0..cfg.years {
            let shift = year as f64 * rate;
            let noise = gaussian_vec(&mut rng, dim, cfg.noise_std);
            let x: Vec<f64> = center
                .iter()
                .zip(&direction)
                .zip(&noise)
                .map(|((c, u), e)| c + shift * u + e)
                .collect();
            samples.push(LabeledSample {
                input: RawVector::new(x)?,
                subject_id,
                year,
            });
        }
    }
    Ok(samples)
}
