use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Game, Node};
use crate::model::{Lottery, ObservationStructure, StateDistribution};
use crate::policy::DecisionPolicy;

/// A fully specified problem: game, state law, observation structure and lottery.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub game: Game,
    pub rho: StateDistribution,
    pub obs: ObservationStructure,
    pub lottery: Lottery,
}

impl Instance {
    pub fn new(game: Game, rho: StateDistribution, obs: ObservationStructure, lottery: Lottery) -> Result<Self> {
        let space = game.state_space();
        if rho.space() != space {
            return Err(Error::DimensionMismatch(format!(
                "state distribution is over {:?}, grids give {:?}",
                rho.space().dims,
                space.dims
            )));
        }
        if obs.num_states() != space.len() {
            return Err(Error::DimensionMismatch(format!(
                "observation structure covers {} states, grids give {}",
                obs.num_states(),
                space.len()
            )));
        }
        if let ObservationStructure::Deterministic { maps, .. } = &obs {
            for node in Node::BOTH {
                let n = obs.num_signals(node);
                if maps[node.index()].iter().any(|&s| s >= n) {
                    return Err(Error::DimensionMismatch(format!(
                        "signal map of node {} exceeds its alphabet of {n}",
                        node.label()
                    )));
                }
            }
        }
        Ok(Instance {
            game,
            rho,
            obs,
            lottery,
        })
    }

    pub fn num_signals(&self, node: Node) -> usize {
        self.obs.num_signals(node)
    }

    pub fn num_powers(&self) -> usize {
        self.game.powers.len()
    }

    pub fn num_actions(&self) -> usize {
        self.game.num_actions()
    }

    /// Checks that a policy fits this instance's signal alphabet, lottery and grid.
    pub fn check_policy(&self, policy: &DecisionPolicy, node: Node) -> Result<()> {
        let m = self.num_powers();
        if policy.owner() != node {
            return Err(Error::DimensionMismatch(format!(
                "policy of node {} used for node {}",
                policy.owner().label(),
                node.label()
            )));
        }
        if policy.num_signals() != self.num_signals(node) || policy.num_lottery() != self.lottery.len() {
            return Err(Error::DimensionMismatch(format!(
                "policy for node {} is {} x {}, instance needs {} x {}",
                node.label(),
                policy.num_signals(),
                policy.num_lottery(),
                self.num_signals(node),
                self.lottery.len()
            )));
        }
        if policy.table().iter().any(|a| a.ip >= m || a.ipp >= m) {
            return Err(Error::DimensionMismatch(format!(
                "policy for node {} uses a power index beyond the grid of {m}",
                node.label()
            )));
        }
        Ok(())
    }

    /// All-minimum-power policy for `node`.
    pub fn min_policy(&self, node: Node) -> DecisionPolicy {
        DecisionPolicy::constant(node, self.num_signals(node), self.lottery.len(), Default::default())
    }

    /// All-maximum-power policy for `node`.
    pub fn max_policy(&self, node: Node) -> DecisionPolicy {
        let top = self.num_powers() - 1;
        DecisionPolicy::constant(
            node,
            self.num_signals(node),
            self.lottery.len(),
            crate::game::Action::new(top, top),
        )
    }
}
