//! Flat JSON experiment configuration shared by every subcommand.
//!
//! Fields that only make sense for some losses or margin modes are
//! optional; setting one where it does not apply is a config error. After
//! [`ExperimentConfig::resolve`] the applicable optional fields are filled
//! with their defaults, and the result is what gets written as the
//! effective config next to the outputs.

use std::path::{Path, PathBuf};

use adatriplet::automargin::{AutoMarginConfig, Quartile};
use adatriplet::losses::{MarginState, SurfaceLoss};
use adatriplet::synth::SynthConfig;
use adatriplet::trainer::{AdamConfig, EncoderMode, LossKind, MarginMode, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossChoice {
    Triplet,
    Adatriplet,
    Contrastive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginChoice {
    Fixed,
    Automargin,
    Quartile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceChoice {
    Triplet,
    Adatriplet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    #[serde(rename = "epsilon")]
    Epsilon,
    #[serde(rename = "lambda")]
    Lambda,
    #[serde(rename = "K_delta")]
    KDelta,
    #[serde(rename = "K_an")]
    KAn,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Epsilon => "epsilon",
            SweepParameter::Lambda => "lambda",
            SweepParameter::KDelta => "K_delta",
            SweepParameter::KAn => "K_an",
        }
    }
}

pub const DEFAULT_EPSILON: f64 = 0.25;
pub const DEFAULT_BETA: f64 = 0.1;
pub const DEFAULT_K: u32 = 2;
pub const DEFAULT_M_POS: f64 = 0.5;
pub const DEFAULT_M_NEG: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Dataset CSV; when absent the synthetic generator is used.
    pub dataset: Option<PathBuf>,
    pub n_subjects: usize,
    pub years: usize,
    pub input_dim: usize,
    pub class_sep: f64,
    pub drift: f64,
    pub noise_std: f64,

    pub encoder: EncoderMode,
    pub embed_dim: usize,
    pub loss: LossChoice,
    pub margin_mode: Option<MarginChoice>,
    pub epsilon: Option<f64>,
    pub beta: Option<f64>,
    pub k_delta: Option<u32>,
    pub k_an: Option<u32>,
    pub quartile: Option<Quartile>,
    pub lambda: Option<f64>,
    pub m_pos: Option<f64>,
    pub m_neg: Option<f64>,

    pub epochs: usize,
    pub batch_size: usize,
    pub per_subject: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub max_triplets: Option<usize>,
    /// Fraction of subjects (highest ids) held out from training and used
    /// for evaluation.
    pub holdout_fraction: f64,
    pub seed: u64,

    /// Embeddings CSV read by `eval`.
    pub embeddings: Option<PathBuf>,

    pub surface_loss: SurfaceChoice,
    pub resolution: usize,

    pub gradcheck_batches: usize,
    pub gradcheck_batch_size: usize,
    pub gradcheck_h: f64,
    /// Scales the analytic gradient by `1 + x` before comparison; only for
    /// testing the checker itself.
    pub gradcheck_corrupt: f64,

    pub sweep_parameter: Option<SweepParameter>,
    pub sweep_values: Vec<f64>,
    pub sweep_seeds: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let synth = SynthConfig::default();
        let adam = AdamConfig::default();
        Self {
            dataset: None,
            n_subjects: synth.n_subjects,
            years: synth.years,
            input_dim: synth.input_dim,
            class_sep: synth.class_sep,
            drift: synth.drift,
            noise_std: synth.noise_std,
            encoder: EncoderMode::FreeEmbedding,
            embed_dim: 16,
            loss: LossChoice::Adatriplet,
            margin_mode: None,
            epsilon: None,
            beta: None,
            k_delta: None,
            k_an: None,
            quartile: None,
            lambda: None,
            m_pos: None,
            m_neg: None,
            epochs: 100,
            batch_size: 128,
            per_subject: 4,
            lr: adam.lr,
            weight_decay: adam.weight_decay,
            adam_beta1: adam.beta1,
            adam_beta2: adam.beta2,
            adam_eps: adam.eps,
            max_triplets: None,
            holdout_fraction: 0.0,
            seed: 0,
            embeddings: None,
            surface_loss: SurfaceChoice::Adatriplet,
            resolution: 101,
            gradcheck_batches: 20,
            gradcheck_batch_size: 8,
            gradcheck_h: 1e-5,
            gradcheck_corrupt: 0.0,
            sweep_parameter: None,
            sweep_values: Vec::new(),
            sweep_seeds: 5,
        }
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Config(format!("{field}: {}", reason.into()))
}

fn forbid<T>(field: &str, value: &Option<T>, why: &str) -> Result<(), CliError> {
    if value.is_some() {
        return Err(invalid(field, format!("not applicable {why}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn resolved_margin_mode(&self) -> MarginChoice {
        self.margin_mode.unwrap_or(match self.loss {
            LossChoice::Contrastive => MarginChoice::Fixed,
            _ => MarginChoice::Automargin,
        })
    }

    /// Fills in defaults for the fields that apply to the selected loss and
    /// margin mode, rejecting fields that do not apply.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let mode = self.resolved_margin_mode();
        self.margin_mode = Some(mode);
        let ada = self.loss == LossChoice::Adatriplet;
        let contrastive = self.loss == LossChoice::Contrastive;

        if contrastive {
            if mode != MarginChoice::Fixed {
                return Err(invalid("margin_mode", "contrastive loss only supports fixed margins"));
            }
            for (field, v) in [
                ("epsilon", &self.epsilon),
                ("beta", &self.beta),
                ("lambda", &self.lambda),
            ] {
                forbid(field, v, "to the contrastive loss")?;
            }
            self.m_pos.get_or_insert(DEFAULT_M_POS);
            self.m_neg.get_or_insert(DEFAULT_M_NEG);
        } else {
            forbid("m_pos", &self.m_pos, "outside the contrastive loss")?;
            forbid("m_neg", &self.m_neg, "outside the contrastive loss")?;
        }
        if !ada {
            forbid("beta", &self.beta, "outside adatriplet")?;
            forbid("k_an", &self.k_an, "outside adatriplet")?;
            forbid("lambda", &self.lambda, "outside adatriplet")?;
        } else {
            self.lambda.get_or_insert(1.0);
        }

        match mode {
            MarginChoice::Fixed => {
                forbid("k_delta", &self.k_delta, "with fixed margins")?;
                forbid("k_an", &self.k_an, "with fixed margins")?;
                forbid("quartile", &self.quartile, "with fixed margins")?;
                if !contrastive {
                    self.epsilon.get_or_insert(DEFAULT_EPSILON);
                }
                if ada {
                    self.beta.get_or_insert(DEFAULT_BETA);
                }
            }
            MarginChoice::Automargin => {
                forbid("epsilon", &self.epsilon, "with automargin")?;
                forbid("beta", &self.beta, "with automargin")?;
                forbid("quartile", &self.quartile, "with automargin")?;
                self.k_delta.get_or_insert(DEFAULT_K);
                if ada {
                    self.k_an.get_or_insert(DEFAULT_K);
                }
            }
            MarginChoice::Quartile => {
                forbid("epsilon", &self.epsilon, "with quartile margins")?;
                forbid("beta", &self.beta, "with quartile margins")?;
                forbid("k_delta", &self.k_delta, "with quartile margins")?;
                forbid("k_an", &self.k_an, "with quartile margins")?;
                self.quartile.get_or_insert(Quartile::Q1);
            }
        }
        self.validate_numbers()?;
        Ok(self)
    }

    fn validate_numbers(&self) -> Result<(), CliError> {
        if let Some(e) = self.epsilon {
            if !(0.0..2.0).contains(&e) {
                return Err(invalid("epsilon", format!("{e} not in [0, 2)")));
            }
        }
        if let Some(b) = self.beta {
            if !(0.0..=1.0).contains(&b) {
                return Err(invalid("beta", format!("{b} not in [0, 1]")));
            }
        }
        for (field, v) in [("lambda", self.lambda), ("m_pos", self.m_pos), ("m_neg", self.m_neg)] {
            if let Some(x) = v {
                if !(x >= 0.0 && x.is_finite()) {
                    return Err(invalid(field, format!("{x} must be non-negative")));
                }
            }
        }
        for (field, v) in [("k_delta", self.k_delta), ("k_an", self.k_an)] {
            if v == Some(0) {
                return Err(invalid(field, "must be a positive integer"));
            }
        }
        if !(0.0..1.0).contains(&self.holdout_fraction) {
            return Err(invalid(
                "holdout_fraction",
                format!("{} not in [0, 1)", self.holdout_fraction),
            ));
        }
        if self.resolution < 2 {
            return Err(invalid("resolution", format!("{} < 2", self.resolution)));
        }
        if !(1e-8..=1e-3).contains(&self.gradcheck_h) {
            return Err(invalid(
                "gradcheck_h",
                format!("{} not in [1e-8, 1e-3]", self.gradcheck_h),
            ));
        }
        if self.gradcheck_batches == 0 {
            return Err(invalid("gradcheck_batches", "must be positive"));
        }
        if self.sweep_seeds == 0 {
            return Err(invalid("sweep_seeds", "must be positive"));
        }
        self.synth_config().validate().map_err(CliError::from_core_config)?;
        self.train_config()?.validate().map_err(CliError::from_core_config)?;
        Ok(())
    }

    /// Extra check for commands that train and then embed held-out data.
    pub fn check_holdout_encoder(&self) -> Result<(), CliError> {
        if self.holdout_fraction > 0.0 && self.encoder == EncoderMode::FreeEmbedding {
            return Err(invalid(
                "holdout_fraction",
                "free embeddings cannot embed held-out subjects; use encoder=linear",
            ));
        }
        Ok(())
    }

    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            n_subjects: self.n_subjects,
            years: self.years,
            input_dim: self.input_dim,
            class_sep: self.class_sep,
            drift: self.drift,
            noise_std: self.noise_std,
            seed: self.seed,
        }
    }

    /// Training configuration; call on a resolved config.
    pub fn train_config(&self) -> Result<TrainConfig, CliError> {
        let loss = match self.loss {
            LossChoice::Triplet => LossKind::Triplet,
            LossChoice::Adatriplet => LossKind::AdaTriplet,
            LossChoice::Contrastive => LossKind::Contrastive {
                m_pos: self.m_pos.unwrap_or(DEFAULT_M_POS),
                m_neg: self.m_neg.unwrap_or(DEFAULT_M_NEG),
            },
        };
        let margin_mode = match self.resolved_margin_mode() {
            MarginChoice::Fixed => MarginMode::Fixed {
                epsilon: self.epsilon.unwrap_or(if self.loss == LossChoice::Contrastive {
                    0.0
                } else {
                    DEFAULT_EPSILON
                }),
                beta: self.beta.unwrap_or(0.0),
            },
            MarginChoice::Automargin => MarginMode::AutoMargin(AutoMarginConfig {
                k_delta: self.k_delta.unwrap_or(DEFAULT_K),
                k_an: self.k_an.unwrap_or(DEFAULT_K),
            }),
            MarginChoice::Quartile => MarginMode::Quartile {
                quartile: self.quartile.unwrap_or(Quartile::Q1),
            },
        };
        Ok(TrainConfig {
            encoder: self.encoder,
            embed_dim: self.embed_dim,
            loss,
            margin_mode,
            lambda: self.lambda.unwrap_or(0.0),
            epochs: self.epochs,
            batch_size: self.batch_size,
            per_subject: self.per_subject,
            adam: AdamConfig {
                lr: self.lr,
                beta1: self.adam_beta1,
                beta2: self.adam_beta2,
                eps: self.adam_eps,
                weight_decay: self.weight_decay,
            },
            seed: self.seed,
            max_triplets: self.max_triplets,
        })
    }

    /// Surface loss and margins; `lambda` is ignored for the plain triplet
    /// surface.
    pub fn surface_params(&self) -> Result<(SurfaceLoss, MarginState), CliError> {
        let loss = match self.surface_loss {
            SurfaceChoice::Triplet => SurfaceLoss::Triplet,
            SurfaceChoice::Adatriplet => SurfaceLoss::AdaTriplet,
        };
        let m = MarginState::new(
            self.epsilon.unwrap_or(DEFAULT_EPSILON),
            self.beta.unwrap_or(DEFAULT_BETA),
            self.lambda.unwrap_or(1.0),
        )
        .map_err(CliError::from_core_config)?;
        Ok((loss, m))
    }

    /// Surface configs ignore the training-side consistency rules and only
    /// fill the margin defaults.
    pub fn resolve_surface(mut self) -> Result<Self, CliError> {
        self.epsilon.get_or_insert(DEFAULT_EPSILON);
        self.beta.get_or_insert(DEFAULT_BETA);
        self.lambda.get_or_insert(1.0);
        if self.resolution < 2 {
            return Err(invalid("resolution", format!("{} < 2", self.resolution)));
        }
        self.surface_params()?;
        Ok(self)
    }
}

/// Merges `overrides` (a JSON object) into `base`, keys replacing keys.
pub fn apply_overrides(base: ExperimentConfig, overrides: serde_json::Value) -> Result<ExperimentConfig, CliError> {
    let mut value = serde_json::to_value(base).expect("config serializes");
    if let (Some(target), serde_json::Value::Object(src)) = (value.as_object_mut(), overrides) {
        for (k, v) in src {
            target.insert(k, v);
        }
    }
    serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
}
