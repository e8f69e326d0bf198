//! Next-hop decision making: reward, Q(lambda) learning, constrained
//! selection, the operating-mode machine and the baseline policies.

mod learning;
mod mode;
mod reward;
mod select;

pub use learning::{
    dynamic_discount, dynamic_learning_rate, one_step_q_update, update_q, EligibilityTraces, QTable,
};
pub use mode::{settle_mode, step_mode, Mode, ModeEvents};
pub use reward::{compute_reward, RewardInputs};
pub use select::{
    baseline_greedy, divergence_angle, feasible, select_min_cost, select_next_hop, CandidateState,
    Constraints,
};
