//! Non-cooperative reference points: the classic "drop everything"
//! equilibrium embedded as the all-minimum-power profile, and an iterated
//! best response over constant (channel-blind) actions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Action, ChannelState, Game, Node};
use crate::model::StateDistribution;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NashBaseline {
    pub actions: (Action, Action),
    pub u1: f64,
    pub u2: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Expected one-shot utilities `E_rho[u_i(x0, a1, a2)]` of a constant profile.
pub fn expected_one_shot(game: &Game, rho: &StateDistribution, a1: &Action, a2: &Action) -> (f64, f64) {
    let space = game.state_space();
    let (mut u1, mut u2) = (0.0, 0.0);
    for (x0, p) in rho.probs().into_iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let x = space.state(x0);
        u1 += p * game.utility(Node::One, &x, a1, a2);
        u2 += p * game.utility(Node::Two, &x, a1, a2);
    }
    (u1, u2)
}

/// Both sources at minimum own and relay power.
pub fn hub_nash(game: &Game, rho: &StateDistribution) -> NashBaseline {
    let a = Action::new(0, 0);
    let (u1, u2) = expected_one_shot(game, rho, &a, &a);
    NashBaseline {
        actions: (a, a),
        u1,
        u2,
        converged: true,
        iterations: 0,
    }
}

/// `E_rho[phi(SNR)]` of `node` for every (own power, partner relay power),
/// using the product form of `rho`.
fn mean_efficiency(game: &Game, rho: &StateDistribution, node: Node) -> Vec<f64> {
    let m = game.powers.len();
    let [m1, m1p, m2, m2p] = rho.marginals();
    let (own, relay) = match node {
        Node::One => (m1, m2p),
        Node::Two => (m2, m1p),
    };
    let mut table = vec![0.0; m * m];
    for ip in 0..m {
        for ipp in 0..m {
            let mut acc = 0.0;
            for (g_own, &q_own) in own.iter().enumerate() {
                for (g_rel, &q_rel) in relay.iter().enumerate() {
                    let (x, a1, a2) = match node {
                        Node::One => (
                            ChannelState::new(g_own, 0, 0, g_rel),
                            Action::new(ip, 0),
                            Action::new(0, ipp),
                        ),
                        Node::Two => (
                            ChannelState::new(0, g_rel, g_own, 0),
                            Action::new(0, ipp),
                            Action::new(ip, 0),
                        ),
                    };
                    acc += q_own * q_rel * game.efficiency_term(node, &x, &a1, &a2);
                }
            }
            table[ip * m + ipp] = acc;
        }
    }
    table
}

/// Alternating exact best responses over constant actions on the expected
/// one-shot game, starting from all-min. Ties go to the lowest row-major
/// action index. `converged` is false if `max_iters` rounds pass without a
/// fixed point.
pub fn one_shot_nash(game: &Game, rho: &StateDistribution, max_iters: usize) -> Result<NashBaseline> {
    if max_iters == 0 {
        return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
    }
    let m = game.powers.len();
    let eff = [
        mean_efficiency(game, rho, Node::One),
        mean_efficiency(game, rho, Node::Two),
    ];
    let respond = |node: Node, other: &Action| -> Action {
        let mut best = Action::new(0, 0);
        let mut best_u = f64::NEG_INFINITY;
        for a in Action::all(m) {
            let u = eff[node.index()][a.ip * m + other.ipp] + game.energy_term(&a);
            if u > best_u {
                best_u = u;
                best = a;
            }
        }
        best
    };
    let (mut a1, mut a2) = (Action::new(0, 0), Action::new(0, 0));
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let b1 = respond(Node::One, &a2);
        let b2 = respond(Node::Two, &b1);
        let fixed = b1 == a1 && b2 == a2;
        a1 = b1;
        a2 = b2;
        if fixed {
            converged = true;
            break;
        }
    }
    let (u1, u2) = expected_one_shot(game, rho, &a1, &a2);
    Ok(NashBaseline {
        actions: (a1, a2),
        u1,
        u2,
        converged,
        iterations,
    })
}

/// Largest gain any node gets from a unilateral constant deviation.
pub fn max_deviation_gain(game: &Game, rho: &StateDistribution, a1: &Action, a2: &Action) -> f64 {
    let m = game.powers.len();
    let (u1, u2) = expected_one_shot(game, rho, a1, a2);
    let mut gain = f64::NEG_INFINITY;
    for d in Action::all(m) {
        gain = gain.max(expected_one_shot(game, rho, &d, a2).0 - u1);
        gain = gain.max(expected_one_shot(game, rho, a1, &d).1 - u2);
    }
    gain
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{EfficiencyFunction, GainGrid, PowerGrid, UtilityParams};
    use crate::model::{discretized_marginal, GainLaw};

    fn game(alpha: f64, r: f64, n: usize, m: usize, g: (f64, f64), p_db: (f64, f64)) -> (Game, StateDistribution) {
        let grid = GainGrid::uniform(g.0, g.1, n).unwrap();
        let powers = PowerGrid::uniform_db(p_db.0, p_db.1, m).unwrap();
        let params = UtilityParams::new(alpha, 1.0, EfficiencyFunction::from_spectral_efficiency(r).unwrap()).unwrap();
        let marg = |mean| discretized_marginal(&grid, &GainLaw::Exponential { mean }).unwrap();
        let rho = StateDistribution::product(&marg(1.0), &marg(1.9), &marg(1.0), &marg(1.9)).unwrap();
        (Game::symmetric(grid, powers, params), rho)
    }

    #[test]
    fn hub_nash_at_minimum_power() {
        let (g, rho) = game(0.1, 1.0, 5, 7, (0.01, 10.0), (-20.0, 20.0));
        let nash = hub_nash(&g, &rho);
        assert_eq!(nash.actions, (Action::new(0, 0), Action::new(0, 0)));
        // phi at SNR <= 1e-4 * 100 = 0.01 is below e^-100
        assert!((nash.u1 + 0.002).abs() < 1e-12);
        assert!((nash.u2 + 0.002).abs() < 1e-12);
    }

    #[test]
    fn hub_nash_without_energy_cost_is_nonnegative() {
        let (g, rho) = game(0.0, 1.0, 3, 3, (0.5, 3.0), (0.0, 10.0));
        let nash = hub_nash(&g, &rho);
        assert!(nash.u1 >= 0.0 && nash.u2 >= 0.0);
        assert!(nash.u1 > 0.0);
    }

    #[test]
    fn single_action_game() {
        let (g, rho) = game(0.3, 1.0, 2, 1, (0.5, 2.0), (0.0, 0.0));
        let hub = hub_nash(&g, &rho);
        let ne = one_shot_nash(&g, &rho, 10).unwrap();
        assert!(ne.converged);
        assert_eq!(ne.actions, hub.actions);
        assert_eq!(ne.u1, hub.u1);
    }

    #[test]
    fn dominated_relaying_gives_all_min() {
        let (g, rho) = game(1.0, 1.0, 3, 5, (0.01, 10.0), (-20.0, 20.0));
        let ne = one_shot_nash(&g, &rho, 50).unwrap();
        assert!(ne.converged);
        assert_eq!(ne.actions, hub_nash(&g, &rho).actions);
        // every unilateral deviation from all-min loses
        let a = Action::new(0, 0);
        let (u1, _) = expected_one_shot(&g, &rho, &a, &a);
        for d in Action::all(5).skip(1) {
            assert!(expected_one_shot(&g, &rho, &d, &a).0 < u1);
        }
    }

    #[test]
    fn two_power_equilibrium_checked_by_enumeration() {
        let (g, rho) = game(0.02, 1.0, 2, 2, (0.1, 2.0), (-10.0, 10.0));
        let ne = one_shot_nash(&g, &rho, 50).unwrap();
        assert!(ne.converged);
        let mut equilibria = Vec::new();
        for a1 in Action::all(2) {
            for a2 in Action::all(2) {
                if max_deviation_gain(&g, &rho, &a1, &a2) <= 1e-12 {
                    equilibria.push((a1, a2));
                }
            }
        }
        assert!(
            equilibria.contains(&ne.actions),
            "{:?} not in {:?}",
            ne.actions,
            equilibria
        );
    }

    #[test]
    fn zero_iterations_rejected() {
        let (g, rho) = game(0.1, 1.0, 2, 2, (0.1, 2.0), (-10.0, 10.0));
        assert!(one_shot_nash(&g, &rho, 0).is_err());
    }
}
