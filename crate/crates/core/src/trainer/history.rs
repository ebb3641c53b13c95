use std::io::Write;

use crate::error::Result;

/// Fixed-range histogram; values outside the range land in the edge bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        Self {
            lo,
            hi,
            counts: vec![0; bins],
        }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    pub fn bin_edges(&self, k: usize) -> (f64, f64) {
        let w = self.width();
        let right = if k + 1 == self.bins() {
            self.hi
        } else {
            self.lo + w * (k + 1) as f64
        };
        (self.lo + w * k as f64, right)
    }

    pub fn add(&mut self, x: f64) {
        let pos = ((x - self.lo) / self.width()).floor();
        let k = if pos < 0.0 {
            0
        } else {
            (pos as usize).min(self.bins() - 1)
        };
        self.counts[k] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Mean using bin centers.
    pub fn mean(&self) -> Option<f64> {
        let total = self.total();
        if total == 0 {
            return None;
        }
        let weighted: f64 = (0..self.bins())
            .map(|k| {
                let (l, r) = self.bin_edges(k);
                0.5 * (l + r) * self.counts[k] as f64
            })
            .sum();
        Some(weighted / total as f64)
    }
}

/// Per-epoch training record.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochHistory {
    /// 1-based.
    pub epoch: usize,
    /// Mean of the per-batch mean losses.
    pub mean_loss: f64,
    /// Mean of the per-batch margins.
    pub epsilon: f64,
    pub beta: f64,
    /// Exact means over every triplet seen in the epoch.
    pub mean_delta: f64,
    pub mean_phi_an: f64,
    pub n_triplets: u64,
    pub delta_hist: Histogram,
    pub phi_an_hist: Histogram,
}

/// Margin state used for one batch and the statistics it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginTrace {
    pub epoch: usize,
    pub batch: usize,
    pub mu_delta: f64,
    pub mu_an: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub loss: f64,
}

pub fn write_history_csv<W: Write>(history: &[EpochHistory], mut out: W) -> Result<()> {
    writeln!(out, "epoch,mean_loss,epsilon,beta")?;
    for h in history {
        writeln!(out, "{},{},{},{}", h.epoch, h.mean_loss, h.epsilon, h.beta)?;
    }
    Ok(())
}

/// Sidecar histogram CSV for either [`EpochHistory::delta_hist`] or
/// [`EpochHistory::phi_an_hist`].
pub fn write_histogram_csv<W: Write>(
    history: &[EpochHistory],
    select: impl Fn(&EpochHistory) -> &Histogram,
    mut out: W,
) -> Result<()> {
    writeln!(out, "epoch,bin_left,bin_right,count")?;
    for h in history {
        let hist = select(h);
        for k in 0..hist.bins() {
            let (l, r) = hist.bin_edges(k);
            writeln!(out, "{},{},{},{}", h.epoch, l, r, hist.counts[k])?;
        }
    }
    Ok(())
}

pub fn write_margin_trace_csv<W: Write>(trace: &[MarginTrace], mut out: W) -> Result<()> {
    writeln!(out, "epoch,batch,mu_delta,mu_an,epsilon,beta,loss")?;
    for t in trace {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            t.epoch, t.batch, t.mu_delta, t.mu_an, t.epsilon, t.beta, t.loss
        )?;
    }
    Ok(())
}
