//! Weighted-utility maximization over stationary decision functions.

mod evaluator;
mod exhaustive;
mod joint;
mod region;
mod response;

pub use evaluator::Evaluator;
pub use exhaustive::{all_policies, exhaustive_cost, exhaustive_search, EXHAUSTIVE_LIMIT};
pub use joint::{induced_joint, induced_joint_stochastic, weighted_value_stochastic, JointDistribution};
pub use region::{
    best_of, initial_pairs, pareto_sweep, solve_all_starts, solve_multi_start, upper_right_hull, HullVertex,
    RegionResult, SweepOptions, SweepPoint,
};
pub use response::{sequential_best_response, SolveResult};

use crate::error::Result;
use crate::game::Node;
use crate::instance::Instance;
use crate::policy::DecisionPolicy;

/// `(E[u_1], E[u_2])` for a policy pair.
pub fn expected_utilities(inst: &Instance, f1: &DecisionPolicy, f2: &DecisionPolicy) -> Result<(f64, f64)> {
    Evaluator::new(inst).expected_utilities(f1, f2)
}

/// Best response of `node` to the other node's policy.
pub fn best_response(inst: &Instance, node: Node, lambda: f64, other: &DecisionPolicy) -> Result<DecisionPolicy> {
    Evaluator::new(inst).best_response(node, lambda, other)
}
