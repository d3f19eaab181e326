//! Channel-state distribution, observation structures and the shared lottery.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{ChannelState, GainGrid, Node, StateSpace};

const PMF_TOL: f64 = 1e-9;

/// Law of a single channel gain before it is binned onto its grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GainLaw {
    /// Exponential power gain (Rayleigh amplitude) with the given mean.
    Exponential {
        mean: f64,
    },
    Uniform,
    Explicit {
        pmf: Vec<f64>,
    },
}

/// Probability mass of each grid level under `law`.
///
/// For the exponential law each level collects the mass of its Voronoi cell:
/// boundaries sit at the midpoints between levels, the first cell starts at 0
/// and the last one is unbounded.
pub fn discretized_marginal(grid: &GainGrid, law: &GainLaw) -> Result<Vec<f64>> {
    let n = grid.len();
    match law {
        GainLaw::Uniform => Ok(vec![1.0 / n as f64; n]),
        GainLaw::Explicit { pmf } => {
            if pmf.len() != n {
                return Err(Error::InvalidDistribution(format!(
                    "explicit pmf has {} entries for a grid of {n}",
                    pmf.len()
                )));
            }
            validate_pmf(pmf)
        }
        GainLaw::Exponential { mean } => {
            if !(mean.is_finite() && *mean > 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "exponential mean {mean} must be positive"
                )));
            }
            if n == 1 {
                return Ok(vec![1.0]);
            }
            let levels = grid.levels();
            // survival function at each cell boundary
            let mut tail = Vec::with_capacity(n + 1);
            tail.push(1.0);
            for w in levels.windows(2) {
                tail.push((-(0.5 * (w[0] + w[1])) / mean).exp());
            }
            tail.push(0.0);
            let masses: Vec<f64> = tail.windows(2).map(|t| t[0] - t[1]).collect();
            Ok(normalize(masses))
        }
    }
}

/// Checks a pmf (non-negative, sums to one within 1e-9) and renormalizes it.
pub fn validate_pmf(pmf: &[f64]) -> Result<Vec<f64>> {
    if pmf.is_empty() {
        return Err(Error::InvalidDistribution("empty pmf".into()));
    }
    if pmf.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidDistribution(
            "pmf entries must be finite and non-negative".into(),
        ));
    }
    let total: f64 = pmf.iter().sum();
    if (total - 1.0).abs() > PMF_TOL {
        return Err(Error::InvalidDistribution(format!("pmf sums to {total}, not 1")));
    }
    Ok(normalize(pmf.to_vec()))
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    for p in &mut v {
        *p /= total;
    }
    v
}

/// Product-form distribution of the global channel state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDistribution {
    marginals: [Vec<f64>; 4],
}

impl StateDistribution {
    /// `rho(x0) = m1[g1] m1p[g1'] m2[g2] m2p[g2']`.
    pub fn product(m1: &[f64], m1p: &[f64], m2: &[f64], m2p: &[f64]) -> Result<Self> {
        Ok(StateDistribution {
            marginals: [
                validate_pmf(m1)?,
                validate_pmf(m1p)?,
                validate_pmf(m2)?,
                validate_pmf(m2p)?,
            ],
        })
    }

    pub fn marginals(&self) -> &[Vec<f64>; 4] {
        &self.marginals
    }

    pub fn space(&self) -> StateSpace {
        StateSpace::new([
            self.marginals[0].len(),
            self.marginals[1].len(),
            self.marginals[2].len(),
            self.marginals[3].len(),
        ])
    }

    pub fn prob(&self, x: &ChannelState) -> f64 {
        let [m1, m1p, m2, m2p] = &self.marginals;
        m1[x.ig1] * m1p[x.ig1p] * m2[x.ig2] * m2p[x.ig2p]
    }

    /// Dense vector of `rho` over the state space.
    pub fn probs(&self) -> Vec<f64> {
        let space = self.space();
        space.states().map(|x| self.prob(&x)).collect()
    }
}

/// `product_state_distribution` over explicit marginals.
pub fn product_state_distribution(m1: &[f64], m1p: &[f64], m2: &[f64], m2p: &[f64]) -> Result<StateDistribution> {
    StateDistribution::product(m1, m1p, m2, m2p)
}

/// What a node's signal alphabet encodes; used to describe signal indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SignalSpace {
    /// The full channel state.
    Global(StateSpace),
    /// The pair `(g_i, g'_i)` of the owning node, `dims` being the two grid sizes.
    Local { node: Node, dims: [usize; 2] },
    /// A single uninformative signal.
    Blind,
    /// An opaque alphabet, typically from a custom kernel.
    Opaque(usize),
}

impl SignalSpace {
    pub fn cardinality(&self) -> usize {
        match self {
            SignalSpace::Global(space) => space.len(),
            SignalSpace::Local { dims, .. } => dims[0] * dims[1],
            SignalSpace::Blind => 1,
            SignalSpace::Opaque(n) => *n,
        }
    }

    pub fn describe(&self, s: usize) -> String {
        match self {
            SignalSpace::Global(space) => {
                let x = space.state(s);
                format!("x0=({},{},{},{})", x.ig1, x.ig1p, x.ig2, x.ig2p)
            }
            SignalSpace::Local { node, dims } => {
                let (g, gp) = (s / dims[1], s % dims[1]);
                let n = node.label();
                format!("g{n}={g},g{n}'={gp}")
            }
            SignalSpace::Blind => "none".to_string(),
            SignalSpace::Opaque(_) => format!("s={s}"),
        }
    }
}

/// Observation structure `P(s_1, s_2 | x0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ObservationStructure {
    /// Each node's signal is a deterministic function of the state.
    Deterministic {
        maps: [Vec<usize>; 2],
        spaces: [SignalSpace; 2],
    },
    /// Signals drawn independently given the state, `kernels[i][x0][s_i]`.
    ProductKernel { kernels: [Vec<Vec<f64>>; 2] },
}

impl ObservationStructure {
    /// Both nodes observe the full channel state.
    pub fn global_csi(space: StateSpace) -> Self {
        let identity: Vec<usize> = (0..space.len()).collect();
        ObservationStructure::Deterministic {
            maps: [identity.clone(), identity],
            spaces: [SignalSpace::Global(space), SignalSpace::Global(space)],
        }
    }

    /// Node `i` observes the gains `(g_i, g'_i)` of its own two links.
    pub fn local_csi(space: StateSpace) -> Self {
        let [d1, d1p, d2, d2p] = space.dims;
        let h1 = space.states().map(|x| x.ig1 * d1p + x.ig1p).collect();
        let h2 = space.states().map(|x| x.ig2 * d2p + x.ig2p).collect();
        ObservationStructure::Deterministic {
            maps: [h1, h2],
            spaces: [
                SignalSpace::Local {
                    node: Node::One,
                    dims: [d1, d1p],
                },
                SignalSpace::Local {
                    node: Node::Two,
                    dims: [d2, d2p],
                },
            ],
        }
    }

    /// No channel knowledge: a single constant signal per node.
    pub fn blind(space: StateSpace) -> Self {
        ObservationStructure::Deterministic {
            maps: [vec![0; space.len()], vec![0; space.len()]],
            spaces: [SignalSpace::Blind, SignalSpace::Blind],
        }
    }

    /// Deterministic structure from arbitrary lookup tables.
    pub fn deterministic(h1: Vec<usize>, h2: Vec<usize>) -> Result<Self> {
        if h1.len() != h2.len() {
            return Err(Error::DimensionMismatch(
                "signal maps cover different state counts".into(),
            ));
        }
        let n1 = h1.iter().max().map_or(0, |m| m + 1);
        let n2 = h2.iter().max().map_or(0, |m| m + 1);
        Ok(ObservationStructure::Deterministic {
            maps: [h1, h2],
            spaces: [SignalSpace::Opaque(n1), SignalSpace::Opaque(n2)],
        })
    }

    /// Conditionally independent memoryless channels; rows must sum to one.
    pub fn product_kernel(k1: Vec<Vec<f64>>, k2: Vec<Vec<f64>>) -> Result<Self> {
        if k1.len() != k2.len() {
            return Err(Error::DimensionMismatch(format!(
                "kernels have {} and {} rows",
                k1.len(),
                k2.len()
            )));
        }
        let check = |k: Vec<Vec<f64>>, who: usize| -> Result<Vec<Vec<f64>>> {
            let width = k.first().map_or(0, Vec::len);
            if width == 0 {
                return Err(Error::InvalidKernel(format!("kernel {who} has no signals")));
            }
            k.into_iter()
                .enumerate()
                .map(|(x, row)| {
                    if row.len() != width {
                        return Err(Error::InvalidKernel(format!("kernel {who} row {x} has ragged length")));
                    }
                    validate_pmf(&row).map_err(|e| Error::InvalidKernel(format!("kernel {who} row {x}: {e}")))
                })
                .collect()
        };
        Ok(ObservationStructure::ProductKernel {
            kernels: [check(k1, 1)?, check(k2, 2)?],
        })
    }

    pub fn num_states(&self) -> usize {
        match self {
            ObservationStructure::Deterministic { maps, .. } => maps[0].len(),
            ObservationStructure::ProductKernel { kernels } => kernels[0].len(),
        }
    }

    pub fn num_signals(&self, node: Node) -> usize {
        match self {
            ObservationStructure::Deterministic { spaces, .. } => spaces[node.index()].cardinality(),
            ObservationStructure::ProductKernel { kernels } => kernels[node.index()].first().map_or(0, Vec::len),
        }
    }

    pub fn signal_space(&self, node: Node) -> SignalSpace {
        match self {
            ObservationStructure::Deterministic { spaces, .. } => spaces[node.index()].clone(),
            ObservationStructure::ProductKernel { .. } => SignalSpace::Opaque(self.num_signals(node)),
        }
    }

    /// `P(s_1, s_2 | x0)` for the state with dense index `x0`.
    pub fn joint(&self, x0: usize, s1: usize, s2: usize) -> f64 {
        match self {
            ObservationStructure::Deterministic { maps, .. } => {
                if maps[0][x0] == s1 && maps[1][x0] == s2 {
                    1.0
                } else {
                    0.0
                }
            }
            ObservationStructure::ProductKernel { kernels } => kernels[0][x0][s1] * kernels[1][x0][s2],
        }
    }

    /// Calls `f(s1, s2, weight)` for every signal pair with positive weight at `x0`.
    pub fn for_each_signal_pair(&self, x0: usize, mut f: impl FnMut(usize, usize, f64)) {
        match self {
            ObservationStructure::Deterministic { maps, .. } => f(maps[0][x0], maps[1][x0], 1.0),
            ObservationStructure::ProductKernel { kernels } => {
                for (s1, &w1) in kernels[0][x0].iter().enumerate() {
                    if w1 == 0.0 {
                        continue;
                    }
                    for (s2, &w2) in kernels[1][x0].iter().enumerate() {
                        let w = w1 * w2;
                        if w > 0.0 {
                            f(s1, s2, w);
                        }
                    }
                }
            }
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, ObservationStructure::Deterministic { .. })
    }
}

/// Shared lottery `P_V` over `{0, .., |V| - 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lottery {
    pmf: Vec<f64>,
}

impl Lottery {
    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidDistribution("lottery alphabet must be non-empty".into()));
        }
        Ok(Lottery {
            pmf: vec![1.0 / size as f64; size],
        })
    }

    pub fn from_pmf(pmf: &[f64]) -> Result<Self> {
        Ok(Lottery {
            pmf: validate_pmf(pmf)?,
        })
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }
}

pub fn uniform_lottery(size: usize) -> Result<Lottery> {
    Lottery::uniform(size)
}
