//! Compiled form of an [`Instance`] used by the solvers.
//!
//! The observation structure is flattened into a sparse support list of
//! `(x0, s1, s2, rho(x0) P(s1, s2 | x0))` entries with positive mass, grouped
//! by each node's signal. For deterministic structures this is exactly one
//! entry per state, i.e. the preimage of every signal; no
//! `|S1| x |S2| x |X0|` table is ever built. Efficiency values are cached per
//! `(own gain, partner relay gain, own power, partner relay power)`.

use crate::error::{Error, Result};
use crate::game::{Action, ChannelState, Node};
use crate::instance::Instance;
use crate::policy::DecisionPolicy;

#[derive(Clone, Copy, Debug)]
pub(crate) struct SupportEntry {
    pub state: [u32; 4],
    pub signals: [u32; 2],
    pub mass: f64,
}

pub struct Evaluator<'a> {
    inst: &'a Instance,
    entries: Vec<SupportEntry>,
    // entry indices grouped by signal, CSR layout
    offsets: [Vec<usize>; 2],
    members: [Vec<usize>; 2],
    // phi tables: node 1 keyed by (g1, g2', p1, p2'), node 2 by (g2, g1', p2, p1')
    phi: [Vec<f64>; 2],
    phi_dims: [usize; 2],
    energy: Vec<f64>,
    powers: Vec<f64>,
    m: usize,
}

impl<'a> Evaluator<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        let game = &inst.game;
        let space = game.state_space();
        let rho = inst.rho.probs();
        let mut entries = Vec::with_capacity(space.len());
        for (x0, &p) in rho.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let x = space.state(x0);
            let state = [x.ig1 as u32, x.ig1p as u32, x.ig2 as u32, x.ig2p as u32];
            inst.obs.for_each_signal_pair(x0, |s1, s2, w| {
                let mass = p * w;
                if mass > 0.0 {
                    entries.push(SupportEntry {
                        state,
                        signals: [s1 as u32, s2 as u32],
                        mass,
                    });
                }
            });
        }

        let mut offsets: [Vec<usize>; 2] = Default::default();
        let mut members: [Vec<usize>; 2] = Default::default();
        for node in Node::BOTH {
            let i = node.index();
            let n = inst.num_signals(node);
            let mut counts = vec![0usize; n + 1];
            for e in &entries {
                counts[e.signals[i] as usize + 1] += 1;
            }
            for k in 0..n {
                counts[k + 1] += counts[k];
            }
            let mut cursor = counts.clone();
            let mut list = vec![0usize; entries.len()];
            for (idx, e) in entries.iter().enumerate() {
                let s = e.signals[i] as usize;
                list[cursor[s]] = idx;
                cursor[s] += 1;
            }
            offsets[i] = counts;
            members[i] = list;
        }

        let m = game.powers.len();
        let dims = space.dims;
        let mut phi: [Vec<f64>; 2] = Default::default();
        // node 1: own gain g1 (dims[0]), partner relay gain g2' (dims[3])
        // node 2: own gain g2 (dims[2]), partner relay gain g1' (dims[1])
        let phi_dims = [dims[3], dims[1]];
        for node in Node::BOTH {
            let (n_own, n_rel) = match node {
                Node::One => (dims[0], dims[3]),
                Node::Two => (dims[2], dims[1]),
            };
            let mut table = Vec::with_capacity(n_own * n_rel * m * m);
            for g_own in 0..n_own {
                for g_rel in 0..n_rel {
                    for ip in 0..m {
                        for ipp in 0..m {
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
                            table.push(game.efficiency_term(node, &x, &a1, &a2));
                        }
                    }
                }
            }
            phi[node.index()] = table;
        }
        let energy = Action::all(m).map(|a| game.energy_term(&a)).collect();

        Evaluator {
            inst,
            entries,
            offsets,
            members,
            phi,
            phi_dims,
            energy,
            powers: game.powers.levels().to_vec(),
            m,
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    /// Number of support entries; equals the number of states with positive
    /// mass for deterministic observation structures.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// `phi(SNR)` of `node` with own power `ip` and partner relay power `ipp`.
    #[inline]
    fn phi_of(&self, node: Node, e: &SupportEntry, ip: usize, ipp: usize) -> f64 {
        let (g_own, g_rel) = match node {
            Node::One => (e.state[0] as usize, e.state[3] as usize),
            Node::Two => (e.state[2] as usize, e.state[1] as usize),
        };
        let i = node.index();
        self.phi[i][((g_own * self.phi_dims[i] + g_rel) * self.m + ip) * self.m + ipp]
    }

    pub fn check_pair(&self, f1: &DecisionPolicy, f2: &DecisionPolicy) -> Result<()> {
        self.inst.check_policy(f1, Node::One)?;
        self.inst.check_policy(f2, Node::Two)
    }

    /// `(E[u_1], E[u_2])` under the joint law induced by `f1, f2`.
    pub fn expected_utilities(&self, f1: &DecisionPolicy, f2: &DecisionPolicy) -> Result<(f64, f64)> {
        self.check_pair(f1, f2)?;
        Ok(self.expected_utilities_unchecked(f1, f2))
    }

    pub(crate) fn expected_utilities_unchecked(&self, f1: &DecisionPolicy, f2: &DecisionPolicy) -> (f64, f64) {
        let (mut u1, mut u2) = (0.0, 0.0);
        for (v, &pv) in self.inst.lottery.pmf().iter().enumerate() {
            let (mut w1, mut w2) = (0.0, 0.0);
            for e in &self.entries {
                let a1 = f1.get(e.signals[0] as usize, v);
                let a2 = f2.get(e.signals[1] as usize, v);
                w1 += e.mass * (self.phi_of(Node::One, e, a1.ip, a2.ipp) + self.energy[a1.index(self.m)]);
                w2 += e.mass * (self.phi_of(Node::Two, e, a2.ip, a1.ipp) + self.energy[a2.index(self.m)]);
            }
            u1 += pv * w1;
            u2 += pv * w2;
        }
        (u1, u2)
    }

    /// Exact best response of `node` to `other` for the weighted objective.
    ///
    /// Every `(s, v)` cell is set to the action maximizing the conditional
    /// weighted score. Ties go to the lowest row-major `(ip, ipp)` index.
    pub fn best_response(&self, node: Node, lambda: f64, other: &DecisionPolicy) -> Result<DecisionPolicy> {
        check_lambda(lambda)?;
        self.inst.check_policy(other, node.other())?;
        Ok(self.best_response_unchecked(node, lambda, other))
    }

    pub(crate) fn best_response_unchecked(&self, node: Node, lambda: f64, other: &DecisionPolicy) -> DecisionPolicy {
        let m = self.m;
        let alpha = self.inst.game.params.alpha;
        let i = node.index();
        let j = node.other().index();
        // weight on this node's own utility and on the partner's
        let own_w = if node == Node::One { lambda } else { 1.0 - lambda };
        let partner_w = 1.0 - own_w;
        let n_signals = self.inst.num_signals(node);
        let n_lottery = self.inst.lottery.len();

        let mut table = Vec::with_capacity(n_signals * n_lottery);
        let mut own_part = vec![0.0; m];
        let mut relay_part = vec![0.0; m];
        for (v, &pv) in self.inst.lottery.pmf().iter().enumerate() {
            for s in 0..n_signals {
                own_part.iter_mut().for_each(|x| *x = 0.0);
                relay_part.iter_mut().for_each(|x| *x = 0.0);
                let mut total = 0.0;
                for &idx in &self.members[i][self.offsets[i][s]..self.offsets[i][s + 1]] {
                    let e = &self.entries[idx];
                    let b = other.get(e.signals[j] as usize, v);
                    let w = pv * e.mass;
                    total += w;
                    // own power drives this node's SNR with the partner's relay power
                    for (ip, acc) in own_part.iter_mut().enumerate() {
                        *acc += w * self.phi_of(node, e, ip, b.ipp);
                    }
                    // relay power drives the partner's SNR with the partner's own power
                    for (ipp, acc) in relay_part.iter_mut().enumerate() {
                        *acc += w * self.phi_of(node.other(), e, b.ip, ipp);
                    }
                }
                let energy_w = own_w * alpha * total;
                for ip in 0..m {
                    own_part[ip] = own_w * own_part[ip] - energy_w * self.powers[ip];
                    relay_part[ip] = partner_w * relay_part[ip] - energy_w * self.powers[ip];
                }
                let mut best = Action::new(0, 0);
                let mut best_score = f64::NEG_INFINITY;
                for (ip, own) in own_part.iter().enumerate() {
                    for (ipp, relay) in relay_part.iter().enumerate() {
                        let score = own + relay;
                        if score > best_score {
                            best_score = score;
                            best = Action::new(ip, ipp);
                        }
                    }
                }
                table.push(best);
            }
        }
        DecisionPolicy::from_table(node, n_signals, n_lottery, table).expect("table sized from instance")
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::InvalidLambda(lambda))
    }
}
