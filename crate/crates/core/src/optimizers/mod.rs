//! First-order updates (SGD, Adam, AdamW), mini-batch partitioning and
//! piecewise-constant learning-rate schedules.

mod partition;
mod schedule;
mod step;

pub use partition::{make_partition, BatchSequence, Partition};
pub use schedule::{LrSchedule, ScheduleSegment};
pub use step::{
    adam_step, adamw_step, regularized_loss, sgd_step, AdamHyper, Optimizer, OptimizerConfig,
    OptimizerKind, OptimizerState, ADAM_EPS,
};
