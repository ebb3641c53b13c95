//! Desk-scale encoders trained with the margin losses.

mod adam;
mod encoder;
mod gradcheck;
mod history;
mod objective;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use encoder::{EncoderInput, EncoderMode, EncoderParams};
pub use gradcheck::{
    draw_checkable_batch, finite_diff_check, finite_diff_report, relative_error, GradCheckReport, KINK_CLEARANCE,
};
pub use history::{
    write_histogram_csv, write_history_csv, write_margin_trace_csv, EpochHistory, Histogram, MarginTrace,
};
pub use objective::{backprop_to_params, batch_loss, batch_loss_and_grad, BatchForward, BatchResult, LossKind};
pub use train::{batch_margins, train, MarginMode, TrainConfig, TrainOutput, HISTOGRAM_BINS};
