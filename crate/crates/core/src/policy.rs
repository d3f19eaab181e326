//! Stationary decision functions `f_i : S_i x V -> A_i` and their randomized
//! counterparts (conditional distributions over actions).

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Action, Node};

/// Deterministic policy table indexed by `(signal, lottery outcome)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DecisionPolicy {
    owner: Node,
    num_signals: usize,
    num_lottery: usize,
    table: Vec<Action>,
}

impl DecisionPolicy {
    pub fn constant(owner: Node, num_signals: usize, num_lottery: usize, action: Action) -> Self {
        DecisionPolicy {
            owner,
            num_signals,
            num_lottery,
            table: vec![action; num_signals * num_lottery],
        }
    }

    /// Uniformly random action in every cell; `num_powers` is the power grid size.
    pub fn random<R: Rng + ?Sized>(
        owner: Node,
        num_signals: usize,
        num_lottery: usize,
        num_powers: usize,
        rng: &mut R,
    ) -> Self {
        let table = (0..num_signals * num_lottery)
            .map(|_| Action::new(rng.random_range(0..num_powers), rng.random_range(0..num_powers)))
            .collect();
        DecisionPolicy {
            owner,
            num_signals,
            num_lottery,
            table,
        }
    }

    /// Table laid out lottery-major: entry `v * num_signals + s`.
    pub fn from_table(owner: Node, num_signals: usize, num_lottery: usize, table: Vec<Action>) -> Result<Self> {
        if table.len() != num_signals * num_lottery {
            return Err(Error::DimensionMismatch(format!(
                "policy table has {} entries, expected {} x {}",
                table.len(),
                num_signals,
                num_lottery
            )));
        }
        Ok(DecisionPolicy {
            owner,
            num_signals,
            num_lottery,
            table,
        })
    }

    pub fn owner(&self) -> Node {
        self.owner
    }

    pub fn num_signals(&self) -> usize {
        self.num_signals
    }

    pub fn num_lottery(&self) -> usize {
        self.num_lottery
    }

    pub fn table(&self) -> &[Action] {
        &self.table
    }

    #[inline]
    pub fn get(&self, s: usize, v: usize) -> Action {
        self.table[v * self.num_signals + s]
    }

    pub fn set(&mut self, s: usize, v: usize, a: Action) {
        self.table[v * self.num_signals + s] = a;
    }

    /// Same table re-labelled as the other node's policy.
    pub fn with_owner(mut self, owner: Node) -> Self {
        self.owner = owner;
        self
    }

    /// Point-mass conditional distribution equivalent to this table.
    pub fn to_stochastic(&self, num_powers: usize) -> StochasticPolicy {
        let na = num_powers * num_powers;
        let mut probs = vec![0.0; self.table.len() * na];
        for (cell, a) in self.table.iter().enumerate() {
            probs[cell * na + a.index(num_powers)] = 1.0;
        }
        StochasticPolicy {
            owner: self.owner,
            num_signals: self.num_signals,
            num_lottery: self.num_lottery,
            num_powers,
            probs,
        }
    }
}

/// Conditional distribution `P(a_i | s_i, v)` over the row-major action set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StochasticPolicy {
    owner: Node,
    num_signals: usize,
    num_lottery: usize,
    num_powers: usize,
    probs: Vec<f64>,
}

impl StochasticPolicy {
    /// Every cell drawn uniformly from the probability simplex.
    pub fn random_simplex<R: Rng + ?Sized>(
        owner: Node,
        num_signals: usize,
        num_lottery: usize,
        num_powers: usize,
        rng: &mut R,
    ) -> Self {
        let na = num_powers * num_powers;
        let mut probs = Vec::with_capacity(num_signals * num_lottery * na);
        for _ in 0..num_signals * num_lottery {
            let draws: Vec<f64> = (0..na).map(|_| Exp1.sample(rng)).collect();
            let total: f64 = draws.iter().sum();
            probs.extend(draws.into_iter().map(|d| d / total));
        }
        StochasticPolicy {
            owner,
            num_signals,
            num_lottery,
            num_powers,
            probs,
        }
    }

    pub fn owner(&self) -> Node {
        self.owner
    }

    pub fn num_signals(&self) -> usize {
        self.num_signals
    }

    pub fn num_lottery(&self) -> usize {
        self.num_lottery
    }

    pub fn num_actions(&self) -> usize {
        self.num_powers * self.num_powers
    }

    /// Distribution over actions (row-major index) for one cell.
    pub fn row(&self, s: usize, v: usize) -> &[f64] {
        let na = self.num_actions();
        let cell = v * self.num_signals + s;
        &self.probs[cell * na..(cell + 1) * na]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn table_layout() {
        let mut p = DecisionPolicy::constant(Node::One, 3, 2, Action::new(0, 0));
        p.set(2, 1, Action::new(1, 1));
        assert_eq!(p.table()[5], Action::new(1, 1));
        assert_eq!(p.get(2, 1), Action::new(1, 1));
        assert_eq!(p.get(2, 0), Action::new(0, 0));
        assert!(DecisionPolicy::from_table(Node::Two, 2, 2, vec![Action::default(); 3]).is_err());
    }

    #[test]
    fn random_tables_are_valid_and_seeded() {
        let mut r1 = ChaCha8Rng::seed_from_u64(3);
        let mut r2 = ChaCha8Rng::seed_from_u64(3);
        let a = DecisionPolicy::random(Node::One, 10, 2, 4, &mut r1);
        let b = DecisionPolicy::random(Node::One, 10, 2, 4, &mut r2);
        assert_eq!(a, b);
        assert!(a.table().iter().all(|x| x.ip < 4 && x.ipp < 4));
    }

    #[test]
    fn simplex_rows_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = StochasticPolicy::random_simplex(Node::Two, 4, 2, 2, &mut rng);
        for v in 0..2 {
            for s in 0..4 {
                let row = p.row(s, v);
                assert_eq!(row.len(), 4);
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(row.iter().all(|&q| q >= 0.0));
            }
        }
    }

    #[test]
    fn point_mass_conversion() {
        let p = DecisionPolicy::constant(Node::One, 2, 1, Action::new(1, 0));
        let q = p.to_stochastic(2);
        assert_eq!(q.row(1, 0), &[0.0, 0.0, 1.0, 0.0]);
    }
}
