//! GT-HSGD, its reductions, and the DSGD baseline.

mod schedule;
mod simulate;
mod swarm;

pub use schedule::{
    corollary1_schedule, corollary1_threshold, corollary1_valid, theorem1_beta, theorem1_branches,
    theorem1_stepsize_cap, Schedule, StepsizeBranches,
};
pub use simulate::{simulate, Algorithm, Problem, RunOutput, RunSettings, DEFAULT_EPOCH_SIZE};
pub use swarm::{
    init_gt_hsgd, step_dsgd, step_gt_dsgd, step_gt_hsgd, NodeOracles, SwarmState, MEAN_RECURSION_TOL,
    TRACKING_TOL,
};
