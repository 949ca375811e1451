//! Reproducible parallel simulation.
//!
//! Every trial is a pure function of `(master_seed, trial)`: it draws from
//! its own counter-keyed stream and results are reduced in trial order, so
//! reports do not depend on the number of worker threads.

mod collision;
mod experiments;
pub mod rng;
mod stats;
mod walker;

use serde::{Deserialize, Serialize};

pub use collision::{
    comb_collision_experiment, comb_control_experiment, comb_tooth, CollisionReport, RatioSummary, WalkerSummary,
    WindowStats,
};
pub use experiments::{
    collision_inside_expander, escape_experiment, expander_window_experiment, EscapeReport, InsideCollisionReport,
    WindowReport,
};
pub use stats::{chi_square_p_value, two_proportion_p_value, EstimateWithCI, Z95};
pub use walker::{
    empirical_green_function, one_step_chi_square, return_time_tail, sample_hitting_time, sample_return_time, step,
    EmpiricalTail, GreenEstimate, Passage,
};

use crate::error::{Error, Result};

/// Default cap on the total number of simulated steps per experiment.
pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub master_seed: u64,
    pub trials: u64,
    /// Per-walk step cap for experiments that take one.
    pub step_cap: usize,
    pub step_budget: u64,
}

impl TrialPlan {
    pub fn new(master_seed: u64, trials: u64, step_cap: usize) -> Self {
        Self { master_seed, trials, step_cap, step_budget: DEFAULT_STEP_BUDGET }
    }

    pub fn with_step_budget(mut self, budget: u64) -> Self {
        self.step_budget = budget;
        self
    }

    pub fn check_budget(&self, requested: u64) -> Result<()> {
        if requested > self.step_budget {
            return Err(Error::ResourceLimit { requested, limit: self.step_budget });
        }
        Ok(())
    }
}
