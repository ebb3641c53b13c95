use serde::{Deserialize, Serialize};

use crate::automargin::{quartile_margins, update_margins, AutoMarginConfig, Quartile};
use crate::batching::{batches_per_epoch, enumerate_triplets, group_by_subject, sample_batch, subsample_triplets};
use crate::dataset::LabeledSample;
use crate::error::{Error, Result};
use crate::losses::MarginState;
use crate::rng::{stream_rng, Stream};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::encoder::{EncoderMode, EncoderParams};
use super::history::{EpochHistory, Histogram, MarginTrace};
use super::objective::{result_from_forward, BatchForward, LossKind};

pub const HISTOGRAM_BINS: usize = 80;

/// How `(epsilon, beta)` are chosen for each batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum MarginMode {
    Fixed { epsilon: f64, beta: f64 },
    AutoMargin(AutoMarginConfig),
    Quartile { quartile: Quartile },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub encoder: EncoderMode,
    pub embed_dim: usize,
    pub loss: LossKind,
    pub margin_mode: MarginMode,
    pub lambda: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub per_subject: usize,
    pub adam: AdamConfig,
    pub seed: u64,
    /// Uniform cap on triplets per batch; `None` keeps all of them.
    pub max_triplets: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            encoder: EncoderMode::FreeEmbedding,
            embed_dim: 16,
            loss: LossKind::AdaTriplet,
            margin_mode: MarginMode::AutoMargin(AutoMarginConfig::default()),
            lambda: 1.0,
            epochs: 100,
            batch_size: 128,
            per_subject: 4,
            adam: AdamConfig::default(),
            seed: 0,
            max_triplets: None,
        }
    }
}

impl TrainConfig {
    /// Margins in force before the first batch.
    pub fn initial_margins(&self) -> Result<MarginState> {
        match self.margin_mode {
            MarginMode::Fixed { epsilon, beta } => MarginState::new(epsilon, beta, self.lambda),
            MarginMode::AutoMargin(_) | MarginMode::Quartile { .. } => MarginState::new(0.0, 0.0, self.lambda),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |field: &'static str, reason: String| Err(Error::ConfigInvalid { field, reason });
        if self.embed_dim < 2 {
            return invalid("embed_dim", format!("{} < 2", self.embed_dim));
        }
        if self.per_subject < 2 {
            return invalid(
                "per_subject",
                "need at least 2 samples per subject to form positives".into(),
            );
        }
        if !self.batch_size.is_multiple_of(self.per_subject) || self.batch_size / self.per_subject < 2 {
            return invalid(
                "batch_size",
                format!(
                    "{} must be a multiple of per_subject ({}) covering at least 2 subjects",
                    self.batch_size, self.per_subject
                ),
            );
        }
        if let MarginMode::AutoMargin(cfg) = self.margin_mode {
            AutoMarginConfig::new(cfg.k_delta, cfg.k_an)?;
        }
        if let LossKind::Contrastive { m_pos, m_neg } = self.loss {
            if !matches!(self.margin_mode, MarginMode::Fixed { .. }) {
                return invalid("margin_mode", "contrastive loss only supports fixed margins".into());
            }
            crate::losses::contrastive(0.0, true, m_pos, m_neg)?;
        }
        if self.max_triplets == Some(0) {
            return invalid("max_triplets", "must be positive".into());
        }
        self.adam.validate()?;
        self.initial_margins()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub params: EncoderParams,
    pub history: Vec<EpochHistory>,
    pub trace: Vec<MarginTrace>,
}

/// Margins for one batch: unchanged under `Fixed`, recomputed from the
/// batch's own triplets otherwise.
pub fn batch_margins(mode: &MarginMode, forward: &BatchForward, current: MarginState) -> Result<MarginState> {
    match *mode {
        MarginMode::Fixed { .. } => Ok(current),
        MarginMode::AutoMargin(am) => {
            let (eps, beta) = update_margins(&forward.stats()?, &am);
            current.with_margins(eps, beta)
        }
        MarginMode::Quartile { quartile } => {
            let deltas: Vec<f64> = forward.sims.iter().map(|s| s.delta()).collect();
            let ans: Vec<f64> = forward.sims.iter().map(|s| s.phi_an()).collect();
            let (eps, beta) = quartile_margins(&deltas, &ans, quartile)?;
            current.with_margins(eps, beta)
        }
    }
}

pub fn train(dataset: &[LabeledSample], cfg: &TrainConfig) -> Result<TrainOutput> {
    cfg.validate()?;
    let mut init_rng = stream_rng(cfg.seed, Stream::Init);
    let mut params = EncoderParams::init(cfg.encoder, dataset, cfg.embed_dim, &mut init_rng)?;
    let mut sampler = stream_rng(cfg.seed, Stream::Sampler);
    let mut adam = AdamState::new(cfg.adam, params.len())?;
    let n_subjects = group_by_subject(dataset).len();
    let n_batches = batches_per_epoch(n_subjects, cfg.batch_size, cfg.per_subject)?;
    let mut margins = cfg.initial_margins()?;

    let mut history = Vec::with_capacity(cfg.epochs);
    let mut trace = Vec::with_capacity(cfg.epochs * n_batches);
    for epoch in 1..=cfg.epochs {
        let mut delta_hist = Histogram::new(-2.0, 2.0, HISTOGRAM_BINS);
        let mut phi_an_hist = Histogram::new(-1.0, 1.0, HISTOGRAM_BINS);
        let (mut loss_sum, mut eps_sum, mut beta_sum) = (0.0, 0.0, 0.0);
        let (mut delta_sum, mut an_sum, mut n_triplets) = (0.0, 0.0, 0u64);

        for batch in 0..n_batches {
            let plan = sample_batch(dataset, cfg.batch_size, cfg.per_subject, &mut sampler)?;
            let mut triplets = enumerate_triplets(&plan.labels);
            if let Some(cap) = cfg.max_triplets {
                triplets = subsample_triplets(triplets, cap, &mut sampler);
            }
            let forward = BatchForward::with_triplets(&params, dataset, &plan, triplets)?;
            let stats = forward.stats()?;
            margins = batch_margins(&cfg.margin_mode, &forward, margins)?;
            let result = result_from_forward(&params, dataset, &plan, &forward, &cfg.loss, &margins)?;
            adam_step(&mut adam, params.as_mut_slice(), &result.grads)?;

            for s in &forward.sims {
                delta_hist.add(s.delta());
                phi_an_hist.add(s.phi_an());
                delta_sum += s.delta();
                an_sum += s.phi_an();
            }
            n_triplets += forward.sims.len() as u64;
            loss_sum += result.loss;
            eps_sum += margins.epsilon();
            beta_sum += margins.beta();
            trace.push(MarginTrace {
                epoch,
                batch,
                mu_delta: stats.mu_delta,
                mu_an: stats.mu_an,
                epsilon: margins.epsilon(),
                beta: margins.beta(),
                loss: result.loss,
            });
        }

        let nb = n_batches as f64;
        history.push(EpochHistory {
            epoch,
            mean_loss: loss_sum / nb,
            epsilon: eps_sum / nb,
            beta: beta_sum / nb,
            mean_delta: delta_sum / n_triplets as f64,
            mean_phi_an: an_sum / n_triplets as f64,
            n_triplets,
            delta_hist,
            phi_an_hist,
        });
    }
    Ok(TrainOutput { params, history, trace })
}
