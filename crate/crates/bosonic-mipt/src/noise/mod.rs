//! Open-system layer: CPTP channels on truncated modes, the mixed-state
//! register, and the noisy monitored-circuit runner with per-channel toggles
//! and the residual-entropy budget.

mod channel;
mod circuit;
mod density;

pub use channel::{
    annihilation, dephasing_channel, local_noise_channel, thermal_decay_channel, Channel, LocalOp,
};
pub use circuit::{
    noise_budget, noisy_ensemble, run_noisy_trajectory, CouplerParams, NoiseBudget, NoiseParams,
    NoiseToggles, NoisyTrajectory, OperationDurations, TransmonParams,
};
pub use density::{
    checkerboard_vector, embed_sector_vector, noisy_measure, product_index, Axis, DensityMatrix,
    MAX_JOINT_DIM,
};
