//! Reference computations used as oracles by the integration tests. They sum
//! the factorized joint law term by term and share no code with the compiled
//! evaluator.

#![allow(dead_code)]

use fdpc::config::CsiMode;
use fdpc::game::{Action, Node};
use fdpc::model::ObservationStructure;
use fdpc::{DecisionPolicy, Instance};

/// `(E[u1], E[u2])` by the literal sum over `(v, x0, s1, s2)`.
pub fn brute_expected(inst: &Instance, f1: &DecisionPolicy, f2: &DecisionPolicy) -> (f64, f64) {
    let space = inst.game.state_space();
    let rho = inst.rho.probs();
    let (n1, n2) = (inst.num_signals(Node::One), inst.num_signals(Node::Two));
    let (mut u1, mut u2) = (0.0, 0.0);
    for (v, &pv) in inst.lottery.pmf().iter().enumerate() {
        for (x0, &px) in rho.iter().enumerate() {
            let x = space.state(x0);
            for s1 in 0..n1 {
                for s2 in 0..n2 {
                    let w = pv * px * inst.obs.joint(x0, s1, s2);
                    if w == 0.0 {
                        continue;
                    }
                    let (a1, a2) = (f1.get(s1, v), f2.get(s2, v));
                    u1 += w * inst.game.utility(Node::One, &x, &a1, &a2);
                    u2 += w * inst.game.utility(Node::Two, &x, &a1, &a2);
                }
            }
        }
    }
    (u1, u2)
}

pub fn brute_weighted(inst: &Instance, lambda: f64, f1: &DecisionPolicy, f2: &DecisionPolicy) -> f64 {
    let (u1, u2) = brute_expected(inst, f1, f2);
    lambda * u1 + (1.0 - lambda) * u2
}

/// Every table of `node`, by counting in base `|A|`.
pub fn enumerate_policies(inst: &Instance, node: Node) -> Vec<DecisionPolicy> {
    let m = inst.num_powers();
    let na = m * m;
    let cells = inst.num_signals(node) * inst.lottery.len();
    let total = na.pow(cells as u32);
    (0..total)
        .map(|mut code| {
            let table: Vec<Action> = (0..cells)
                .map(|_| {
                    let a = Action::from_index(code % na, m);
                    code /= na;
                    a
                })
                .collect();
            DecisionPolicy::from_table(node, inst.num_signals(node), inst.lottery.len(), table).unwrap()
        })
        .collect()
}

/// Same game, law and lottery under another information structure.
pub fn with_structure(inst: &Instance, csi: CsiMode) -> Instance {
    let space = inst.game.state_space();
    let obs = match csi {
        CsiMode::Global => ObservationStructure::global_csi(space),
        CsiMode::Local => ObservationStructure::local_csi(space),
        CsiMode::Blind => ObservationStructure::blind(space),
        CsiMode::Custom => panic!("custom structures need a kernel"),
    };
    Instance::new(inst.game.clone(), inst.rho.clone(), obs, inst.lottery.clone()).unwrap()
}
