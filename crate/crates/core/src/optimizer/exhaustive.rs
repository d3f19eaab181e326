//! Brute-force global optimum over deterministic policy pairs.
//!
//! The weighted objective is a sum over lottery outcomes and over the
//! connected components of the bipartite graph linking signals of node 1 to
//! signals of node 2 through states of positive mass. Cells in different
//! components never interact, so enumerating every action assignment of each
//! component separately is exact. Under global CSI each component is a single
//! signal pair, which keeps the enumeration small.

use super::evaluator::check_lambda;
use super::joint::induced_joint;
use super::response::{weighted, SolveResult};
use crate::error::{Error, Result};
use crate::game::{Action, Node};
use crate::instance::Instance;
use crate::policy::DecisionPolicy;

/// Enumeration budget: total number of component assignments visited.
pub const EXHAUSTIVE_LIMIT: f64 = 1e7;

struct Component {
    signals: [Vec<usize>; 2],
    // (local index of s1, local index of s2, rho * P(s1, s2 | x0), x0)
    terms: Vec<(usize, usize, f64, usize)>,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn components(inst: &Instance) -> Vec<Component> {
    let n1 = inst.num_signals(Node::One);
    let n2 = inst.num_signals(Node::Two);
    let rho = inst.rho.probs();
    let mut terms = Vec::new();
    for (x0, &px) in rho.iter().enumerate() {
        for s1 in 0..n1 {
            for s2 in 0..n2 {
                let w = px * inst.obs.joint(x0, s1, s2);
                if w > 0.0 {
                    terms.push((s1, s2, w, x0));
                }
            }
        }
    }
    // union-find over n1 + n2 signal vertices
    let mut parent: Vec<usize> = (0..n1 + n2).collect();
    for &(s1, s2, _, _) in &terms {
        let (a, b) = (find(&mut parent, s1), find(&mut parent, n1 + s2));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut root_to_comp = std::collections::BTreeMap::new();
    let mut comps: Vec<Component> = Vec::new();
    let mut local = vec![usize::MAX; n1 + n2];
    for &(s1, s2, w, x0) in &terms {
        let root = find(&mut parent, s1);
        let c = *root_to_comp.entry(root).or_insert_with(|| {
            comps.push(Component {
                signals: [Vec::new(), Vec::new()],
                terms: Vec::new(),
            });
            comps.len() - 1
        });
        for (side, vertex, s) in [(0, s1, s1), (1, n1 + s2, s2)] {
            if local[vertex] == usize::MAX {
                local[vertex] = comps[c].signals[side].len();
                comps[c].signals[side].push(s);
            }
        }
        comps[c].terms.push((local[s1], local[n1 + s2], w, x0));
    }
    comps
}

/// Number of assignments `exhaustive_search` would visit.
pub fn exhaustive_cost(inst: &Instance) -> f64 {
    cost_of(&components(inst), inst)
}

fn cost_of(comps: &[Component], inst: &Instance) -> f64 {
    let na = inst.num_actions() as f64;
    let per_v: f64 = comps
        .iter()
        .map(|c| na.powi((c.signals[0].len() + c.signals[1].len()) as i32))
        .sum();
    per_v * inst.lottery.len() as f64
}

/// Globally optimal weighted objective over all deterministic policy pairs.
///
/// Signals that never occur with positive probability keep action `(0, 0)`.
/// Among equally good assignments the first in enumeration order wins.
pub fn exhaustive_search(inst: &Instance, lambda: f64) -> Result<SolveResult> {
    check_lambda(lambda)?;
    let comps = components(inst);
    let na = inst.num_actions();
    let m = inst.num_powers();
    let cost = cost_of(&comps, inst);
    if cost > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge {
            required: cost,
            limit: EXHAUSTIVE_LIMIT,
        });
    }

    let space = inst.game.state_space();
    let n_v = inst.lottery.len();
    let mut f1 = inst.min_policy(Node::One);
    let mut f2 = inst.min_policy(Node::Two);
    for comp in &comps {
        // value[t][a1 * na + a2] for every term of the component
        let values: Vec<Vec<f64>> = comp
            .terms
            .iter()
            .map(|&(_, _, w, x0)| {
                let x = space.state(x0);
                let mut row = Vec::with_capacity(na * na);
                for a1 in Action::all(m) {
                    for a2 in Action::all(m) {
                        row.push(w * inst.game.weighted_utility(lambda, &x, &a1, &a2));
                    }
                }
                row
            })
            .collect();
        let k1 = comp.signals[0].len();
        let k = k1 + comp.signals[1].len();
        for v in 0..n_v {
            let pv = inst.lottery.pmf()[v];
            let mut digits = vec![0usize; k];
            let mut best_digits = digits.clone();
            let mut best = f64::NEG_INFINITY;
            'enumerate: loop {
                let total: f64 = comp
                    .terms
                    .iter()
                    .zip(&values)
                    .map(|(&(l1, l2, _, _), row)| row[digits[l1] * na + digits[k1 + l2]])
                    .sum::<f64>()
                    * pv;
                if total > best {
                    best = total;
                    best_digits.copy_from_slice(&digits);
                }
                // odometer increment, last digit fastest
                let mut pos = k;
                loop {
                    if pos == 0 {
                        break 'enumerate;
                    }
                    pos -= 1;
                    digits[pos] += 1;
                    if digits[pos] < na {
                        break;
                    }
                    digits[pos] = 0;
                }
            }
            for (l, &s) in comp.signals[0].iter().enumerate() {
                f1.set(s, v, Action::from_index(best_digits[l], m));
            }
            for (l, &s) in comp.signals[1].iter().enumerate() {
                f2.set(s, v, Action::from_index(best_digits[k1 + l], m));
            }
        }
    }

    let (u1, u2) = induced_joint(inst, &f1, &f2)?.expected_utilities(inst);
    let w = weighted(lambda, u1, u2);
    Ok(SolveResult {
        lambda,
        w,
        u1,
        u2,
        policies: (f1, f2),
        sweeps: 0,
        converged: true,
        trace: vec![w],
    })
}

/// Helper for tests and the verification suite: every deterministic policy of
/// `node` as a flat list, for instances small enough to enumerate.
pub fn all_policies(inst: &Instance, node: Node, limit: usize) -> Result<Vec<DecisionPolicy>> {
    let na = inst.num_actions();
    let m = inst.num_powers();
    let cells = inst.num_signals(node) * inst.lottery.len();
    let count = (na as f64).powi(cells as i32);
    if count > limit as f64 {
        return Err(Error::TooLarge {
            required: count,
            limit: limit as f64,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    for mut code in 0..count as usize {
        let mut table = Vec::with_capacity(cells);
        for _ in 0..cells {
            table.push(Action::from_index(code % na, m));
            code /= na;
        }
        out.push(DecisionPolicy::from_table(
            node,
            inst.num_signals(node),
            inst.lottery.len(),
            table,
        )?);
    }
    Ok(out)
}
