//! Direct evaluation of the induced joint law `Q(x0, a1, a2)`.
//!
//! These routines sum over every `(v, x0, s1, s2)` term of the factorized
//! form and score profiles with [`Game::utility`](crate::game::Game::utility),
//! independently of the cached tables in [`Evaluator`](super::Evaluator).
//! They are meant for small instances and cross-checks.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::game::{Action, Node};
use crate::instance::Instance;
use crate::policy::{DecisionPolicy, StochasticPolicy};

/// Sparse joint distribution over `(state index, a1, a2)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct JointDistribution {
    pub masses: BTreeMap<(usize, Action, Action), f64>,
}

impl JointDistribution {
    pub fn total_mass(&self) -> f64 {
        self.masses.values().sum()
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// `(sum Q u_1, sum Q u_2)`.
    pub fn expected_utilities(&self, inst: &Instance) -> (f64, f64) {
        let space = inst.game.state_space();
        let (mut u1, mut u2) = (0.0, 0.0);
        for (&(x0, a1, a2), &q) in &self.masses {
            let x = space.state(x0);
            u1 += q * inst.game.utility(Node::One, &x, &a1, &a2);
            u2 += q * inst.game.utility(Node::Two, &x, &a1, &a2);
        }
        (u1, u2)
    }
}

fn check_stochastic(inst: &Instance, p: &StochasticPolicy, node: Node) -> Result<()> {
    if p.num_signals() != inst.num_signals(node)
        || p.num_lottery() != inst.lottery.len()
        || p.num_actions() != inst.num_actions()
    {
        return Err(Error::DimensionMismatch(format!(
            "conditional policy of node {} does not match the instance",
            node.label()
        )));
    }
    Ok(())
}

/// Joint law induced by two deterministic decision functions.
pub fn induced_joint(inst: &Instance, f1: &DecisionPolicy, f2: &DecisionPolicy) -> Result<JointDistribution> {
    inst.check_policy(f1, Node::One)?;
    inst.check_policy(f2, Node::Two)?;
    let rho = inst.rho.probs();
    let (n1, n2) = (inst.num_signals(Node::One), inst.num_signals(Node::Two));
    let mut q = JointDistribution::default();
    for (v, &pv) in inst.lottery.pmf().iter().enumerate() {
        for (x0, &px) in rho.iter().enumerate() {
            for s1 in 0..n1 {
                for s2 in 0..n2 {
                    let w = px * pv * inst.obs.joint(x0, s1, s2);
                    if w == 0.0 {
                        continue;
                    }
                    *q.masses.entry((x0, f1.get(s1, v), f2.get(s2, v))).or_insert(0.0) += w;
                }
            }
        }
    }
    Ok(q)
}

/// Joint law induced by two conditional action distributions.
pub fn induced_joint_stochastic(
    inst: &Instance,
    p1: &StochasticPolicy,
    p2: &StochasticPolicy,
) -> Result<JointDistribution> {
    check_stochastic(inst, p1, Node::One)?;
    check_stochastic(inst, p2, Node::Two)?;
    let rho = inst.rho.probs();
    let m = inst.num_powers();
    let (n1, n2) = (inst.num_signals(Node::One), inst.num_signals(Node::Two));
    let mut q = JointDistribution::default();
    for (v, &pv) in inst.lottery.pmf().iter().enumerate() {
        for (x0, &px) in rho.iter().enumerate() {
            for s1 in 0..n1 {
                for s2 in 0..n2 {
                    let w = px * pv * inst.obs.joint(x0, s1, s2);
                    if w == 0.0 {
                        continue;
                    }
                    for (k1, &q1) in p1.row(s1, v).iter().enumerate() {
                        if q1 == 0.0 {
                            continue;
                        }
                        for (k2, &q2) in p2.row(s2, v).iter().enumerate() {
                            if q2 == 0.0 {
                                continue;
                            }
                            let key = (x0, Action::from_index(k1, m), Action::from_index(k2, m));
                            *q.masses.entry(key).or_insert(0.0) += w * q1 * q2;
                        }
                    }
                }
            }
        }
    }
    Ok(q)
}

/// Weighted objective of a conditional policy pair by the full factorized sum.
pub fn weighted_value_stochastic(
    inst: &Instance,
    lambda: f64,
    p1: &StochasticPolicy,
    p2: &StochasticPolicy,
) -> Result<f64> {
    let (u1, u2) = induced_joint_stochastic(inst, p1, p2)?.expected_utilities(inst);
    Ok(lambda * u1 + (1.0 - lambda) * u2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{EfficiencyFunction, GainGrid, Game, PowerGrid, UtilityParams};
    use crate::model::{Lottery, ObservationStructure, StateDistribution};

    fn two_state_instance() -> Instance {
        let gains = [
            GainGrid::from_levels(vec![0.5, 2.0]).unwrap(),
            GainGrid::from_levels(vec![1.0]).unwrap(),
            GainGrid::from_levels(vec![1.0]).unwrap(),
            GainGrid::from_levels(vec![1.0]).unwrap(),
        ];
        let params = UtilityParams::new(0.05, 1.0, EfficiencyFunction::exp_ratio(1.0).unwrap()).unwrap();
        let game = Game::new(gains, PowerGrid::uniform_db(-10.0, 10.0, 2).unwrap(), params);
        let rho = StateDistribution::product(&[0.5, 0.5], &[1.0], &[1.0], &[1.0]).unwrap();
        let obs = ObservationStructure::global_csi(game.state_space());
        Instance::new(game, rho, obs, Lottery::uniform(1).unwrap()).unwrap()
    }

    #[test]
    fn point_mass_chain() {
        let inst = two_state_instance();
        let rho = StateDistribution::product(&[1.0, 0.0], &[1.0], &[1.0], &[1.0]).unwrap();
        let inst = Instance::new(inst.game.clone(), rho, inst.obs.clone(), inst.lottery.clone()).unwrap();
        let f1 = DecisionPolicy::constant(Node::One, 2, 1, Action::new(1, 0));
        let f2 = DecisionPolicy::constant(Node::Two, 2, 1, Action::new(0, 1));
        let q = induced_joint(&inst, &f1, &f2).unwrap();
        assert_eq!(q.len(), 1);
        assert_eq!(q.masses[&(0, Action::new(1, 0), Action::new(0, 1))], 1.0);
    }

    #[test]
    fn constant_policies_reproduce_rho() {
        let inst = two_state_instance();
        let a = Action::new(1, 1);
        let f1 = DecisionPolicy::constant(Node::One, 2, 1, a);
        let f2 = DecisionPolicy::constant(Node::Two, 2, 1, a);
        let q = induced_joint(&inst, &f1, &f2).unwrap();
        assert_eq!(q.masses[&(0, a, a)], 0.5);
        assert_eq!(q.masses[&(1, a, a)], 0.5);
    }

    #[test]
    fn state_dependent_policy_has_two_support_points() {
        let inst = two_state_instance();
        let f1 = DecisionPolicy::from_table(Node::One, 2, 1, vec![Action::new(0, 0), Action::new(1, 1)]).unwrap();
        let f2 = DecisionPolicy::constant(Node::Two, 2, 1, Action::new(0, 1));
        let q = induced_joint(&inst, &f1, &f2).unwrap();
        assert_eq!(q.len(), 2);
        assert_eq!(q.masses[&(0, Action::new(0, 0), Action::new(0, 1))], 0.5);
        assert_eq!(q.masses[&(1, Action::new(1, 1), Action::new(0, 1))], 0.5);
    }

    #[test]
    fn mismatched_policy_is_rejected() {
        let inst = two_state_instance();
        let f1 = DecisionPolicy::constant(Node::One, 3, 1, Action::default());
        let f2 = DecisionPolicy::constant(Node::Two, 2, 1, Action::default());
        assert!(matches!(
            induced_joint(&inst, &f1, &f2),
            Err(Error::DimensionMismatch(_))
        ));
        let f1 = DecisionPolicy::constant(Node::One, 2, 1, Action::new(2, 0));
        assert!(induced_joint(&inst, &f1, &f2).is_err());
    }
}
