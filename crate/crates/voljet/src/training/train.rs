//! Shuffled mini-batch training loop.

use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use crate::error::{Result, VoljetError};
use crate::market::dataset::{fmt_g17, ChainDataset, RelativeQuote};
use crate::market::lb::LbTermStructure;
use crate::neural::VolNetwork;
use crate::seed::{epoch_seed, shuffle};
use crate::training::adam::{adam_step, AdamState};
use crate::training::loss::{
    batch_loss_and_grad, density_loss, evaluate_losses, to_bps, LossBreakdown, VegaWeightMode,
    DEFAULT_VEGA_FLOOR,
};

/// Training hyperparameters; defaults follow the reference experiment setup.
#[derive(Clone, Copy, Debug)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub master_seed: u64,
    pub vega_mode: VegaWeightMode,
    pub vega_floor: f64,
    /// Full-dataset snapshot cadence in epochs.
    pub snapshot_every: usize,
    /// Record wall-clock seconds per epoch. Off by default so identical-seed
    /// runs produce byte-identical history files.
    pub timing: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 1000,
            batch_size: 256,
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.99,
            epsilon: 1e-16,
            master_seed: 0,
            vega_mode: VegaWeightMode::Linear,
            vega_floor: DEFAULT_VEGA_FLOOR,
            snapshot_every: 10,
            timing: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs > 0 && self.batch_size == 0 {
            return Err(VoljetError::ModelInvalid("batch size must be positive".into()));
        }
        if !(self.learning_rate > 0.0)
            || !(0.0..1.0).contains(&self.beta1)
            || !(0.0..1.0).contains(&self.beta2)
            || !(self.epsilon >= 0.0)
            || !(self.vega_floor > 0.0)
        {
            return Err(VoljetError::ModelInvalid(format!(
                "invalid optimizer settings {self:?}"
            )));
        }
        Ok(())
    }
}

/// One epoch's record: the epoch-wise mini-batch-averaged losses, an optional
/// full-dataset snapshot (with density), and the wall-clock time.
#[derive(Clone, Copy, Debug)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Simple average of the per-batch loss breakdowns.
    pub batch_avg: LossBreakdown,
    /// Full training-set losses including the density loss, present on
    /// snapshot epochs.
    pub snapshot: Option<LossBreakdown>,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
}

impl TrainHistory {
    /// First epoch from which the epoch-wise arbitrage losses are zero
    /// through the end of training.
    pub fn arbitrage_zero_epoch(&self) -> Option<usize> {
        let mut first = None;
        for rec in &self.epochs {
            let b = rec.batch_avg;
            if b.calendar == 0.0 && b.vertical == 0.0 && b.butterfly == 0.0 {
                first.get_or_insert(rec.epoch);
            } else {
                first = None;
            }
        }
        first
    }

    pub fn final_batch_avg(&self) -> Option<LossBreakdown> {
        self.epochs.last().map(|r| r.batch_avg)
    }

    /// History CSV: one row per epoch, losses in bps. `loss_D_bps` is empty
    /// on epochs without a full-dataset snapshot; `seconds` is 0.000 unless
    /// timing was enabled.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        w.write_all(
            b"epoch,loss_total_bps,loss_P_bps,loss_C_bps,loss_V_bps,loss_B_bps,loss_D_bps,seconds\n",
        )?;
        for rec in &self.epochs {
            let b = rec.batch_avg;
            let density = rec
                .snapshot
                .and_then(|s| s.density)
                .map(|d| fmt_g17(to_bps(d)))
                .unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{},{},{:.3}",
                rec.epoch,
                fmt_g17(to_bps(b.total())),
                fmt_g17(to_bps(b.price)),
                fmt_g17(to_bps(b.calendar)),
                fmt_g17(to_bps(b.vertical)),
                fmt_g17(to_bps(b.butterfly)),
                density,
                rec.seconds
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Trains `net` in place-by-value: each epoch reshuffles the training set
/// with a seed derived from the master seed, partitions it into
/// `⌈N/batch⌉` mini-batches, and takes one Adam step per batch on the total
/// loss. Full training-set losses (including density) are snapshotted every
/// `snapshot_every` epochs and on the final epoch.
pub fn train(
    mut net: VolNetwork,
    config: &TrainConfig,
    train_set: &ChainDataset,
    market: &LbTermStructure,
) -> Result<(VolNetwork, TrainHistory)> {
    config.validate()?;
    let quotes: Vec<RelativeQuote> = train_set.iter().collect();
    if quotes.is_empty() {
        return Err(VoljetError::Contract("empty training set".into()));
    }
    let mut history = TrainHistory::default();
    let mut state = AdamState::new(&net);
    let mut order: Vec<usize> = (0..quotes.len()).collect();
    let mut batch = Vec::with_capacity(config.batch_size);

    for epoch in 1..=config.epochs {
        let start = Instant::now();
        order.sort_unstable();
        shuffle(&mut order, epoch_seed(config.master_seed, epoch as u64));

        let mut sum = LossBreakdown::default();
        let mut n_batches = 0usize;
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| quotes[i]));
            let (losses, grads) =
                batch_loss_and_grad(&net, &batch, config.vega_mode, config.vega_floor).map_err(
                    |e| {
                        VoljetError::Numeric(format!(
                            "epoch {epoch}, batch {n_batches}: {e}"
                        ))
                    },
                )?;
            sum.price += losses.price;
            sum.calendar += losses.calendar;
            sum.vertical += losses.vertical;
            sum.butterfly += losses.butterfly;
            adam_step(
                &mut net,
                &grads,
                &mut state,
                config.learning_rate,
                config.beta1,
                config.beta2,
                config.epsilon,
            );
            n_batches += 1;
        }
        let nb = n_batches as f64;
        let batch_avg = LossBreakdown {
            price: sum.price / nb,
            calendar: sum.calendar / nb,
            vertical: sum.vertical / nb,
            butterfly: sum.butterfly / nb,
            density: None,
        };
        if !batch_avg.is_finite() {
            return Err(VoljetError::Numeric(format!(
                "non-finite epoch-wise loss at epoch {epoch}: {batch_avg:?}"
            )));
        }

        let snapshot = if epoch % config.snapshot_every.max(1) == 0 || epoch == config.epochs {
            let mut full = evaluate_losses(&net, &quotes, config.vega_mode, config.vega_floor)?;
            full.density = Some(density_loss(&net, train_set, market)?);
            Some(full)
        } else {
            None
        };
        let seconds = if config.timing {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        };
        history.epochs.push(EpochRecord {
            epoch,
            batch_avg,
            snapshot,
            seconds,
        });
    }
    Ok((net, history))
}

/// Full losses (price, arbitrage, density) of a network on a dataset.
pub fn full_evaluation(
    net: &VolNetwork,
    dataset: &ChainDataset,
    market: &LbTermStructure,
    mode: VegaWeightMode,
    vega_floor: f64,
) -> Result<LossBreakdown> {
    let quotes: Vec<RelativeQuote> = dataset.iter().collect();
    let mut losses = evaluate_losses(net, &quotes, mode, vega_floor)?;
    losses.density = Some(density_loss(net, dataset, market)?);
    Ok(losses)
}
