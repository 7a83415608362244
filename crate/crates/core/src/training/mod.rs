//! Loss, optimizer, training loop, checkpointing, and horizon-wise
//! evaluation at the 25 fps protocol.

mod checkpoint;
mod evaluate;
mod loss;
mod optimizer;
mod trainer;

pub use checkpoint::{
    checkpoint_from_str, checkpoint_to_string, load_checkpoint, save_checkpoint,
    CHECKPOINT_FORMAT,
};
pub use evaluate::{
    evaluate, evaluate_with, evaluate_zero_velocity, horizon_frame, zero_velocity_prediction,
    EvalReport, FRAME_MS,
};
pub use loss::{mpjpe, sequence_loss, sequence_loss_node};
pub use optimizer::{adam_step, OptimizerKind, OptimizerState};
pub use trainer::{train, LrDecay, TrainConfig, TrainRun};
