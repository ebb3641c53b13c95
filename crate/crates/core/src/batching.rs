//! M-per-class batch sampling and exhaustive in-batch triplet enumeration.

use std::collections::BTreeMap;

use rand::seq::index::sample as sample_indices;
use rand::Rng;

use crate::error::{Error, Result};

pub use crate::dataset::LabeledSample;

/// Dataset indices of one batch with their subject labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchPlan {
    pub indices: Vec<usize>,
    pub labels: Vec<usize>,
}

/// Index triple `(anchor, positive, negative)` into a batch.
pub type Triplet = (usize, usize, usize);

fn check_shape(batch_size: usize, per_subject: usize) -> Result<usize> {
    if per_subject == 0 || batch_size == 0 || !batch_size.is_multiple_of(per_subject) {
        return Err(Error::BatchShape {
            batch_size,
            per_subject,
        });
    }
    Ok(batch_size / per_subject)
}

/// Sample indices grouped by subject, subjects in ascending order.
pub fn group_by_subject(dataset: &[LabeledSample]) -> BTreeMap<usize, Vec<usize>> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, s) in dataset.iter().enumerate() {
        groups.entry(s.subject_id).or_default().push(i);
    }
    groups
}

/// Number of batches that visit every subject once in expectation.
pub fn batches_per_epoch(n_subjects: usize, batch_size: usize, per_subject: usize) -> Result<usize> {
    let groups = check_shape(batch_size, per_subject)?;
    Ok(n_subjects.div_ceil(groups).max(1))
}

/// Draws `batch_size / per_subject` distinct subjects and `per_subject`
/// samples from each. Subjects with fewer samples contribute all of them
/// and are topped up by drawing with replacement.
pub fn sample_batch<R: Rng>(
    dataset: &[LabeledSample],
    batch_size: usize,
    per_subject: usize,
    rng: &mut R,
) -> Result<BatchPlan> {
    let n_groups = check_shape(batch_size, per_subject)?;
    let groups: Vec<(usize, Vec<usize>)> = group_by_subject(dataset).into_iter().collect();
    if groups.len() < n_groups {
        return Err(Error::InsufficientSubjects {
            needed: n_groups,
            available: groups.len(),
        });
    }
    let mut plan = BatchPlan {
        indices: Vec::with_capacity(batch_size),
        labels: Vec::with_capacity(batch_size),
    };
    for g in sample_indices(rng, groups.len(), n_groups) {
        let (subject, members) = &groups[g];
        if members.len() >= per_subject {
            for k in sample_indices(rng, members.len(), per_subject) {
                plan.indices.push(members[k]);
            }
        } else {
            plan.indices.extend(members);
            for _ in members.len()..per_subject {
                plan.indices.push(members[rng.random_range(0..members.len())]);
            }
        }
        plan.labels.extend(std::iter::repeat_n(*subject, per_subject));
    }
    Ok(plan)
}

/// All `(a, p, n)` with `labels[a] == labels[p]`, `a != p`, and
/// `labels[n] != labels[a]`, in lexicographic order.
pub fn enumerate_triplets<T: PartialEq>(labels: &[T]) -> Vec<Triplet> {
    let mut out = Vec::new();
    for a in 0..labels.len() {
        for p in 0..labels.len() {
            if p == a || labels[p] != labels[a] {
                continue;
            }
            for n in 0..labels.len() {
                if labels[n] != labels[a] {
                    out.push((a, p, n));
                }
            }
        }
    }
    out
}

/// Uniform subsample of at most `cap` triplets, preserving order.
pub fn subsample_triplets<R: Rng>(triplets: Vec<Triplet>, cap: usize, rng: &mut R) -> Vec<Triplet> {
    if triplets.len() <= cap {
        return triplets;
    }
    let mut keep: Vec<usize> = sample_indices(rng, triplets.len(), cap).into_vec();
    keep.sort_unstable();
    keep.into_iter().map(|i| triplets[i]).collect()
}
