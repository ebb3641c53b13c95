//! Central-difference verification of [`batch_loss_and_grad`](super::batch_loss_and_grad).

use std::collections::BTreeSet;

use rand::Rng;

use crate::batching::{enumerate_triplets, sample_batch, BatchPlan};
use crate::dataset::LabeledSample;
use crate::error::{Error, Result};
use crate::losses::MarginState;

use super::encoder::{EncoderMode, EncoderParams};
use super::objective::{batch_loss, BatchForward, LossKind};

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Flat parameter index of the worst entry.
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub n_checked: usize,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(1e-12);
    (analytic - numeric).abs() / denom
}

/// Largest relative error between the analytic gradient and central
/// differences with step `h`.
pub fn finite_diff_check(
    params: &EncoderParams,
    dataset: &[LabeledSample],
    plan: &BatchPlan,
    loss: &LossKind,
    margins: &MarginState,
    h: f64,
) -> Result<f64> {
    Ok(finite_diff_report(params, dataset, plan, loss, margins, h, 0.0)?.max_rel_error)
}

/// Like [`finite_diff_check`], with the analytic gradient scaled by
/// `1 + corrupt` before comparison. `corrupt != 0` exists to test the
/// harness itself.
pub fn finite_diff_report(
    params: &EncoderParams,
    dataset: &[LabeledSample],
    plan: &BatchPlan,
    loss: &LossKind,
    margins: &MarginState,
    h: f64,
    corrupt: f64,
) -> Result<GradCheckReport> {
    if !(1e-8..=1e-3).contains(&h) {
        return Err(Error::StepOutOfRange(h));
    }
    let triplets = enumerate_triplets(&plan.labels);
    let forward = BatchForward::with_triplets(params, dataset, plan, triplets.clone())?;
    let (_, emb_grads) = forward.loss_and_embedding_grads(loss, margins)?;
    let mut analytic = super::objective::backprop_to_params(params, dataset, plan, &forward, &emb_grads)?;
    analytic.iter_mut().for_each(|g| *g *= 1.0 + corrupt);

    // Free-embedding rows outside the batch do not enter the loss, so their
    // numeric derivative is exactly zero.
    let (_, cols) = params.shape();
    let live: Option<BTreeSet<usize>> = match params.mode() {
        EncoderMode::FreeEmbedding => Some(plan.indices.iter().copied().collect()),
        EncoderMode::Linear => None,
    };

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_index: 0,
        analytic: 0.0,
        numeric: 0.0,
        n_checked: 0,
    };
    let mut probe = params.clone();
    for (i, &a) in analytic.iter().enumerate() {
        let numeric = match &live {
            Some(rows) if !rows.contains(&(i / cols)) => 0.0,
            _ => {
                let original = probe.as_slice()[i];
                probe.as_mut_slice()[i] = original + h;
                let up = batch_loss(&probe, dataset, plan, &triplets, loss, margins)?;
                probe.as_mut_slice()[i] = original - h;
                let down = batch_loss(&probe, dataset, plan, &triplets, loss, margins)?;
                probe.as_mut_slice()[i] = original;
                (up - down) / (2.0 * h)
            }
        };
        let err = relative_error(a, numeric);
        report.n_checked += 1;
        if err > report.max_rel_error {
            report.max_rel_error = err;
            report.worst_index = i;
            report.analytic = a;
            report.numeric = numeric;
        }
    }
    Ok(report)
}

/// Minimum distance from a hinge boundary for a batch to be gradient-checked.
pub const KINK_CLEARANCE: f64 = 1e-4;

/// Samples batches until one has a nonzero loss and no hinge argument
/// within `clearance` of zero. Gives up after `max_tries` draws.
#[allow(clippy::too_many_arguments)]
pub fn draw_checkable_batch<R: Rng>(
    params: &EncoderParams,
    dataset: &[LabeledSample],
    batch_size: usize,
    per_subject: usize,
    loss: &LossKind,
    margins: &MarginState,
    clearance: f64,
    max_tries: usize,
    rng: &mut R,
) -> Result<Option<BatchPlan>> {
    for _ in 0..max_tries {
        let plan = sample_batch(dataset, batch_size, per_subject, rng)?;
        let forward = BatchForward::new(params, dataset, &plan)?;
        if forward.kink_distance(loss, margins) < clearance {
            continue;
        }
        if forward.loss_and_embedding_grads(loss, margins)?.0 > 0.0 {
            return Ok(Some(plan));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::RawVector;

    fn toy() -> (Vec<LabeledSample>, EncoderParams, BatchPlan) {
        let xs = [[1.0, 0.2, 0.1], [0.9, -0.3, 0.4], [0.2, 1.0, -0.5], [-0.4, 0.8, 0.3]];
        let data: Vec<LabeledSample> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| LabeledSample {
                input: RawVector::new(x.to_vec()).unwrap(),
                subject_id: i / 2,
                year: i % 2,
            })
            .collect();
        let rows: Vec<Vec<f64>> = xs.iter().map(|x| x.to_vec()).collect();
        let params = EncoderParams::from_rows(EncoderMode::FreeEmbedding, &rows).unwrap();
        let plan = BatchPlan {
            indices: vec![0, 1, 2, 3],
            labels: vec![0, 0, 1, 1],
        };
        (data, params, plan)
    }

    #[test]
    fn step_range_enforced() {
        let (data, params, plan) = toy();
        let m = MarginState::new(0.25, 0.1, 1.0).unwrap();
        assert!(matches!(
            finite_diff_check(&params, &data, &plan, &LossKind::AdaTriplet, &m, 1.0),
            Err(Error::StepOutOfRange(_))
        ));
    }

    #[test]
    fn active_toy_batch_passes_and_corruption_fails() {
        let (data, params, plan) = toy();
        let m = MarginState::new(1.5, 0.0, 1.0).unwrap();
        let ok = finite_diff_report(&params, &data, &plan, &LossKind::AdaTriplet, &m, 1e-6, 0.0).unwrap();
        assert!(ok.max_rel_error < 1e-5, "{ok:?}");
        assert!(ok.analytic != 0.0 || ok.max_rel_error == 0.0);
        let bad = finite_diff_report(&params, &data, &plan, &LossKind::AdaTriplet, &m, 1e-6, 0.01).unwrap();
        assert!(bad.max_rel_error > 1e-3);
    }

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert_eq!(relative_error(1.0, 1.0), 0.0);
        assert!((relative_error(1.0, 0.5) - 0.5).abs() < 1e-15);
    }
}
