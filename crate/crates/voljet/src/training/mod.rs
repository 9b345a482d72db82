//! Losses, the Adam optimizer, and the mini-batch training loop.

pub mod adam;
pub mod loss;
pub mod train;

pub use adam::{adam_step, AdamState};
pub use loss::{
    batch_loss_and_grad, density_loss, evaluate_losses, to_bps, LossBreakdown, VegaWeightMode,
    DEFAULT_VEGA_FLOOR,
};
pub use train::{full_evaluation, train, EpochRecord, TrainConfig, TrainHistory};
