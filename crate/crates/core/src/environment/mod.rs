//! Loss generation, delay schedules and the round loop.

mod delays;
mod losses;
mod runner;

pub use delays::{
    read_delay_file, registry as delay_registry, DelayModel, DelayRegistry, DelaySchedule,
    DelaySpec, FileDelay, FixedDelay, UniformDelay,
};
pub use losses::{
    read_loss_file, registry as loss_registry, BernoulliLosses, FixedSequence, LossGenerator,
    LossRegistry, LossSpec, ShiftingAdversary,
};
pub use runner::{
    run_experiment, simulate, ParamOverrides, RoundRecord, RunConfig, RunRecord, Simulation,
    Streams,
};
