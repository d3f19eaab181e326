//! Population experiment: many overlapping four-node interactions in one ad
//! hoc network, with a fraction of "advanced" sources playing the optimized
//! policy and the rest playing the minimum-power equilibrium action.
//!
//! Channel draws are integrated out exactly; randomness only enters through
//! the network layout and the choice of advanced nodes.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Action, Node};
use crate::optimizer::Evaluator;
use crate::policy::DecisionPolicy;
use crate::seed::derive_seed;

/// Sources 1 and 2 and their destinations; all four ids distinct.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interaction {
    pub source1: usize,
    pub source2: usize,
    pub dest1: usize,
    pub dest2: usize,
}

impl Interaction {
    pub fn ids(&self) -> [usize; 4] {
        [self.source1, self.source2, self.dest1, self.dest2]
    }

    fn node_set(&self) -> [usize; 4] {
        let mut ids = self.ids();
        ids.sort_unstable();
        ids
    }
}

fn choose4(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) * (n - 2.0) * (n - 3.0) / 24.0
}

/// Samples `n_interactions` interactions over `n_nodes` nodes.
///
/// Each interaction draws four distinct nodes; the draw order assigns the
/// roles (source 1, source 2, destination 1, destination 2). Two interactions
/// may share up to three nodes but never the same four.
pub fn build_network(n_nodes: usize, n_interactions: usize, seed: u64) -> Result<Vec<Interaction>> {
    if n_nodes < 4 {
        return Err(Error::InvalidArgument(format!(
            "a network needs at least 4 nodes, got {n_nodes}"
        )));
    }
    if n_interactions == 0 {
        return Err(Error::InvalidArgument("at least one interaction is required".into()));
    }
    if n_interactions as f64 > choose4(n_nodes) {
        return Err(Error::InvalidArgument(format!(
            "{n_interactions} interactions with distinct node sets do not fit in {n_nodes} nodes"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x6e6574]));
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n_interactions);
    while out.len() < n_interactions {
        let ids = sample(&mut rng, n_nodes, 4).into_vec();
        let it = Interaction {
            source1: ids[0],
            source2: ids[1],
            dest1: ids[2],
            dest2: ids[3],
        };
        if seen.insert(it.node_set()) {
            out.push(it);
        }
    }
    Ok(out)
}

/// Result of one advanced-set draw at a given fraction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixRun {
    pub fraction: f64,
    pub advanced: BTreeSet<usize>,
    /// `E[u_1 + u_2]` of each interaction's two sources.
    pub per_interaction: Vec<f64>,
    pub total: f64,
}

/// Policies available to the sources of an interaction.
pub struct PopulationPolicies {
    /// Optimized pair, indexed by role.
    pub advanced: (DecisionPolicy, DecisionPolicy),
    /// Constant policies at the equilibrium action, indexed by role.
    pub ne: (DecisionPolicy, DecisionPolicy),
}

impl PopulationPolicies {
    pub fn new(eval: &Evaluator<'_>, advanced: (DecisionPolicy, DecisionPolicy), ne_action: Action) -> Result<Self> {
        eval.check_pair(&advanced.0, &advanced.1)?;
        let inst = eval.instance();
        let m = inst.num_powers();
        if ne_action.ip >= m || ne_action.ipp >= m {
            return Err(Error::DimensionMismatch(
                "equilibrium action outside the power grid".into(),
            ));
        }
        let nv = inst.lottery.len();
        let ne = (
            DecisionPolicy::constant(Node::One, inst.num_signals(Node::One), nv, ne_action),
            DecisionPolicy::constant(Node::Two, inst.num_signals(Node::Two), nv, ne_action),
        );
        Ok(PopulationPolicies { advanced, ne })
    }

    fn for_role(&self, node: Node, advanced: bool) -> &DecisionPolicy {
        match (node, advanced) {
            (Node::One, true) => &self.advanced.0,
            (Node::Two, true) => &self.advanced.1,
            (Node::One, false) => &self.ne.0,
            (Node::Two, false) => &self.ne.1,
        }
    }

    /// Expected sum-utility of an interaction given which sources are advanced.
    pub fn pair_value(&self, eval: &Evaluator<'_>, adv1: bool, adv2: bool) -> Result<f64> {
        let (u1, u2) = eval.expected_utilities(self.for_role(Node::One, adv1), self.for_role(Node::Two, adv2))?;
        Ok(u1 + u2)
    }

    /// The four type combinations, indexed `[adv1 as usize][adv2 as usize]`.
    pub fn pair_table(&self, eval: &Evaluator<'_>) -> Result<[[f64; 2]; 2]> {
        let mut t = [[0.0; 2]; 2];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.pair_value(eval, i == 1, j == 1)?;
            }
        }
        Ok(t)
    }
}

fn advanced_count(fraction: f64, n_nodes: usize) -> usize {
    (fraction * n_nodes as f64).round() as usize
}

fn check_fraction(fraction: f64) -> Result<()> {
    if (0.0..=1.0).contains(&fraction) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("fraction {fraction} is outside [0, 1]")))
    }
}

/// One population draw: `round(fraction * n_nodes)` advanced nodes chosen
/// uniformly with `rng`, each interaction scored exactly.
pub fn mixed_population_run<R: Rng + ?Sized>(
    interactions: &[Interaction],
    n_nodes: usize,
    fraction: f64,
    pair_values: &[[f64; 2]; 2],
    rng: &mut R,
) -> Result<MixRun> {
    check_fraction(fraction)?;
    if interactions.iter().any(|it| it.ids().iter().any(|&id| id >= n_nodes)) {
        return Err(Error::DimensionMismatch(
            "interaction refers to a node outside the network".into(),
        ));
    }
    let k = advanced_count(fraction, n_nodes);
    let advanced: BTreeSet<usize> = sample(rng, n_nodes, k).into_iter().collect();
    let per_interaction: Vec<f64> = interactions
        .iter()
        .map(|it| {
            let a1 = advanced.contains(&it.source1) as usize;
            let a2 = advanced.contains(&it.source2) as usize;
            pair_values[a1][a2]
        })
        .collect();
    let total = per_interaction.iter().sum();
    Ok(MixRun {
        fraction,
        advanced,
        per_interaction,
        total,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionSummary {
    pub fraction: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub replications: usize,
}

/// Averages over `replications` advanced-set draws per fraction. Draw `r` at
/// fraction index `f` uses a stream derived from `(seed, f, r)`.
pub fn fraction_sweep(
    interactions: &[Interaction],
    n_nodes: usize,
    fractions: &[f64],
    replications: usize,
    pair_values: &[[f64; 2]; 2],
    seed: u64,
) -> Result<Vec<FractionSummary>> {
    if replications == 0 {
        return Err(Error::InvalidArgument("replications must be at least 1".into()));
    }
    if fractions.is_empty() {
        return Err(Error::InvalidArgument("fraction list is empty".into()));
    }
    fractions
        .iter()
        .enumerate()
        .map(|(fi, &fraction)| {
            let mut totals = Vec::with_capacity(replications);
            for r in 0..replications {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[fi as u64, r as u64]));
                totals.push(mixed_population_run(interactions, n_nodes, fraction, pair_values, &mut rng)?.total);
            }
            let mean = totals.iter().sum::<f64>() / replications as f64;
            let min = totals.iter().copied().fold(f64::INFINITY, f64::min);
            let max = totals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(FractionSummary {
                fraction,
                mean,
                min,
                max,
                replications,
            })
        })
        .collect()
}

/// Least-squares line `y = intercept + slope x` and its R^2.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_nodes_one_interaction() {
        let net = build_network(4, 1, 5).unwrap();
        assert_eq!(net.len(), 1);
        let mut ids = net[0].ids();
        ids.sort_unstable();
        assert_eq!(ids, [0, 1, 2, 3]);
        assert!(build_network(4, 2, 5).is_err());
        assert!(build_network(3, 1, 5).is_err());
        assert!(build_network(10, 0, 5).is_err());
    }

    #[test]
    fn network_is_seeded_and_valid() {
        let a = build_network(50, 25, 11).unwrap();
        let b = build_network(50, 25, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, build_network(50, 25, 12).unwrap());
        let mut sets = BTreeSet::new();
        for it in &a {
            let ids = it.ids();
            assert!(ids.iter().all(|&i| i < 50));
            let distinct: BTreeSet<_> = ids.iter().collect();
            assert_eq!(distinct.len(), 4);
            assert!(sets.insert(it.node_set()));
        }
    }

    #[test]
    fn homogeneous_populations() {
        let net = build_network(20, 8, 3).unwrap();
        let values = [[1.0, 2.0], [3.0, 10.0]];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let none = mixed_population_run(&net, 20, 0.0, &values, &mut rng).unwrap();
        assert!(none.advanced.is_empty());
        assert_eq!(none.total, 8.0);
        let all = mixed_population_run(&net, 20, 1.0, &values, &mut rng).unwrap();
        assert_eq!(all.advanced.len(), 20);
        assert_eq!(all.total, 80.0);
        let half = mixed_population_run(&net, 20, 0.5, &values, &mut rng).unwrap();
        assert_eq!(half.advanced.len(), 10);
        assert!((half.total - half.per_interaction.iter().sum::<f64>()).abs() < 1e-12);
        assert!(mixed_population_run(&net, 20, 1.5, &values, &mut rng).is_err());
        assert!(mixed_population_run(&net, 10, 0.5, &values, &mut rng).is_err());
    }

    #[test]
    fn sweep_endpoints_and_determinism() {
        let net = build_network(50, 25, 3).unwrap();
        let values = [[-0.004, -0.3], [-0.2, 1.1]];
        let s1 = fraction_sweep(&net, 50, &[0.0, 0.5, 1.0], 4, &values, 9).unwrap();
        let s2 = fraction_sweep(&net, 50, &[0.0, 0.5, 1.0], 4, &values, 9).unwrap();
        assert_eq!(s1, s2);
        assert!((s1[0].mean - 25.0 * -0.004).abs() < 1e-12);
        assert!((s1[2].mean - 25.0 * 1.1).abs() < 1e-12);
        assert_eq!(s1[0].min, s1[0].max);
        assert!(s1[1].min <= s1[1].mean && s1[1].mean <= s1[1].max);
    }

    #[test]
    fn fit_of_exact_line() {
        let (slope, intercept, r2) = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((slope - 2.0).abs() < 1e-12);
        assert!((intercept - 1.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }
}
