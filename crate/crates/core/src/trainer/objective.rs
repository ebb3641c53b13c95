//! Batch loss and its gradient with respect to encoder parameters.

use serde::{Deserialize, Serialize};

use crate::automargin::{batch_stats, BatchStats};
use crate::batching::{enumerate_triplets, BatchPlan, Triplet};
use crate::dataset::LabeledSample;
use crate::error::{Error, Result};
use crate::losses::{
    adatriplet, adatriplet_grad, contrastive, contrastive_grad, triplet_cos, triplet_cos_grad, MarginState, TripletSims,
};
use crate::vector::{cosine_sim, normalize_slice, normalize_vjp_slice, UnitVector};

use super::encoder::{EncoderMode, EncoderParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LossKind {
    /// `[phi_an - phi_ap + eps]+` averaged over in-batch triplets.
    Triplet,
    /// Triplet hinge plus `lambda * [phi_an - beta]+`.
    AdaTriplet,
    /// Two-margin contrastive loss averaged over ordered in-batch pairs.
    Contrastive { m_pos: f64, m_neg: f64 },
}

/// Embeddings and triplet similarities of one batch.
#[derive(Debug, Clone)]
pub struct BatchForward {
    pub pre: Vec<Vec<f64>>,
    pub embeddings: Vec<UnitVector>,
    pub labels: Vec<usize>,
    pub triplets: Vec<Triplet>,
    pub sims: Vec<TripletSims>,
}

impl BatchForward {
    /// Encodes the batch and enumerates all of its triplets.
    pub fn new(params: &EncoderParams, dataset: &[LabeledSample], plan: &BatchPlan) -> Result<Self> {
        Self::with_triplets(params, dataset, plan, enumerate_triplets(&plan.labels))
    }

    pub fn with_triplets(
        params: &EncoderParams,
        dataset: &[LabeledSample],
        plan: &BatchPlan,
        triplets: Vec<Triplet>,
    ) -> Result<Self> {
        if plan.indices.len() != plan.labels.len() {
            return Err(Error::ShapeMismatch {
                expected: plan.indices.len(),
                actual: plan.labels.len(),
            });
        }
        if triplets.is_empty() {
            return Err(Error::NoTriplets);
        }
        let pre = plan
            .indices
            .iter()
            .map(|&i| params.sample_pre_activation(dataset, i))
            .collect::<Result<Vec<_>>>()?;
        let embeddings = pre.iter().map(|z| normalize_slice(z)).collect::<Result<Vec<_>>>()?;
        let sims = triplets
            .iter()
            .map(|&(a, p, n)| {
                TripletSims::new(
                    cosine_sim(&embeddings[a], &embeddings[p])?,
                    cosine_sim(&embeddings[a], &embeddings[n])?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            pre,
            embeddings,
            labels: plan.labels.clone(),
            triplets,
            sims,
        })
    }

    pub fn stats(&self) -> Result<BatchStats> {
        batch_stats(&self.sims)
    }

    /// Smallest distance of any active hinge argument from zero.
    pub fn kink_distance(&self, loss: &LossKind, margins: &MarginState) -> f64 {
        match *loss {
            LossKind::Triplet | LossKind::AdaTriplet => {
                let with_beta = matches!(loss, LossKind::AdaTriplet) && margins.lambda() > 0.0;
                self.sims
                    .iter()
                    .map(|s| {
                        let t = (s.phi_an() - s.phi_ap() + margins.epsilon()).abs();
                        if with_beta {
                            t.min((s.phi_an() - margins.beta()).abs())
                        } else {
                            t
                        }
                    })
                    .fold(f64::INFINITY, f64::min)
            }
            LossKind::Contrastive { m_pos, m_neg } => {
                let mut best = f64::INFINITY;
                for i in 0..self.embeddings.len() {
                    for j in 0..self.embeddings.len() {
                        if i == j {
                            continue;
                        }
                        let dist = 2.0
                            - 2.0 * crate::vector::dot(self.embeddings[i].as_slice(), self.embeddings[j].as_slice());
                        let arg = if self.labels[i] == self.labels[j] {
                            dist - m_pos
                        } else {
                            m_neg - dist
                        };
                        best = best.min(arg.abs());
                    }
                }
                best
            }
        }
    }

    /// Mean loss and its gradient with respect to each batch embedding.
    pub fn loss_and_embedding_grads(&self, loss: &LossKind, margins: &MarginState) -> Result<(f64, Vec<Vec<f64>>)> {
        let dim = self.embeddings[0].dim();
        let mut grads = vec![vec![0.0; dim]; self.embeddings.len()];
        let mut total = 0.0;
        let count = match *loss {
            LossKind::Triplet | LossKind::AdaTriplet => {
                for (&(a, p, n), s) in self.triplets.iter().zip(&self.sims) {
                    let (value, (d_ap, d_an)) = match loss {
                        LossKind::Triplet => (
                            triplet_cos(s, margins.epsilon())?,
                            triplet_cos_grad(s, margins.epsilon())?,
                        ),
                        _ => (adatriplet(s, margins)?, adatriplet_grad(s, margins)?),
                    };
                    total += value;
                    if d_ap == 0.0 && d_an == 0.0 {
                        continue;
                    }
                    let (ea, ep, en) = (
                        self.embeddings[a].as_slice(),
                        self.embeddings[p].as_slice(),
                        self.embeddings[n].as_slice(),
                    );
                    for k in 0..dim {
                        grads[a][k] += d_ap * ep[k] + d_an * en[k];
                        grads[p][k] += d_ap * ea[k];
                        grads[n][k] += d_an * ea[k];
                    }
                }
                self.triplets.len()
            }
            LossKind::Contrastive { m_pos, m_neg } => {
                let b = self.embeddings.len();
                for i in 0..b {
                    for j in 0..b {
                        if i == j {
                            continue;
                        }
                        let positive = self.labels[i] == self.labels[j];
                        let phi = cosine_sim(&self.embeddings[i], &self.embeddings[j])?;
                        total += contrastive(phi, positive, m_pos, m_neg)?;
                        let d = contrastive_grad(phi, positive, m_pos, m_neg)?;
                        if d == 0.0 {
                            continue;
                        }
                        let (ei, ej) = (self.embeddings[i].as_slice(), self.embeddings[j].as_slice());
                        for (g, e) in grads[i].iter_mut().zip(ej) {
                            *g += d * e;
                        }
                        for (g, e) in grads[j].iter_mut().zip(ei) {
                            *g += d * e;
                        }
                    }
                }
                b * (b - 1)
            }
        };
        let scale = 1.0 / count as f64;
        for g in &mut grads {
            g.iter_mut().for_each(|v| *v *= scale);
        }
        Ok((total * scale, grads))
    }
}

/// Loss, parameter gradient, and triplet statistics of one batch.
#[derive(Debug, Clone)]
pub struct BatchResult {
    pub loss: f64,
    pub grads: Vec<f64>,
    pub stats: BatchStats,
}

/// Backpropagates embedding gradients through normalization into `params`.
pub fn backprop_to_params(
    params: &EncoderParams,
    dataset: &[LabeledSample],
    plan: &BatchPlan,
    forward: &BatchForward,
    embedding_grads: &[Vec<f64>],
) -> Result<Vec<f64>> {
    let mut grads = vec![0.0; params.len()];
    let (_, cols) = params.shape();
    for (k, &idx) in plan.indices.iter().enumerate() {
        if embedding_grads[k].iter().all(|g| *g == 0.0) {
            continue;
        }
        let dz = normalize_vjp_slice(&forward.pre[k], &embedding_grads[k])?;
        match params.mode() {
            EncoderMode::FreeEmbedding => {
                let row = &mut grads[idx * cols..(idx + 1) * cols];
                row.iter_mut().zip(&dz).for_each(|(g, d)| *g += d);
            }
            EncoderMode::Linear => {
                let x = dataset[idx].input.as_slice();
                for (r, d) in dz.iter().enumerate() {
                    let row = &mut grads[r * cols..(r + 1) * cols];
                    row.iter_mut().zip(x).for_each(|(g, xi)| *g += d * xi);
                }
            }
        }
    }
    Ok(grads)
}

pub fn batch_loss_and_grad(
    params: &EncoderParams,
    dataset: &[LabeledSample],
    plan: &BatchPlan,
    loss: &LossKind,
    margins: &MarginState,
) -> Result<BatchResult> {
    let forward = BatchForward::new(params, dataset, plan)?;
    result_from_forward(params, dataset, plan, &forward, loss, margins)
}

pub(crate) fn result_from_forward(
    params: &EncoderParams,
    dataset: &[LabeledSample],
    plan: &BatchPlan,
    forward: &BatchForward,
    loss: &LossKind,
    margins: &MarginState,
) -> Result<BatchResult> {
    let (value, emb_grads) = forward.loss_and_embedding_grads(loss, margins)?;
    let grads = backprop_to_params(params, dataset, plan, forward, &emb_grads)?;
    Ok(BatchResult {
        loss: value,
        grads,
        stats: forward.stats()?,
    })
}

/// Loss only, for finite differences.
pub fn batch_loss(
    params: &EncoderParams,
    dataset: &[LabeledSample],
    plan: &BatchPlan,
    triplets: &[Triplet],
    loss: &LossKind,
    margins: &MarginState,
) -> Result<f64> {
    let forward = BatchForward::with_triplets(params, dataset, plan, triplets.to_vec())?;
    Ok(forward.loss_and_embedding_grads(loss, margins)?.0)
}
