//! One-shot game: discrete gain and power grids, channel states, actions,
//! the efficiency function and the per-block utilities of both sources.
//!
//! Node `i` transmits its own packet with power `p_i` over gain `g_i` and
//! relays the other source's packet with power `p'_i` over gain `g'_i`, so
//! the two-hop SNR of node 1 is `p_1 g_1 p'_2 g'_2 / sigma2` and symmetrically
//! for node 2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the two source nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Node {
    One,
    Two,
}

impl Node {
    pub const BOTH: [Node; 2] = [Node::One, Node::Two];

    /// Zero-based index (0 for node 1).
    pub fn index(self) -> usize {
        match self {
            Node::One => 0,
            Node::Two => 1,
        }
    }

    pub fn other(self) -> Node {
        match self {
            Node::One => Node::Two,
            Node::Two => Node::One,
        }
    }

    /// One-based label as used in reports.
    pub fn label(self) -> u8 {
        self.index() as u8 + 1
    }
}

/// Ordered set of channel power gains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainGrid {
    levels: Vec<f64>,
}

impl GainGrid {
    /// Uniform grid of `n` gains from `g_min` to `g_max`, endpoints exact.
    pub fn uniform(g_min: f64, g_max: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("gain grid needs at least one level".into()));
        }
        if !(g_min.is_finite() && g_max.is_finite()) {
            return Err(Error::InvalidGrid("gain bounds must be finite".into()));
        }
        if g_min <= 0.0 {
            return Err(Error::InvalidGrid(format!("g_min = {g_min} must be positive")));
        }
        if g_min > g_max {
            return Err(Error::InvalidGrid(format!("g_min = {g_min} exceeds g_max = {g_max}")));
        }
        if n == 1 {
            if g_min != g_max {
                return Err(Error::InvalidGrid(
                    "a single-level gain grid requires g_min = g_max".into(),
                ));
            }
            return Ok(GainGrid { levels: vec![g_min] });
        }
        if g_min == g_max {
            return Err(Error::InvalidGrid(format!(
                "{n} levels cannot be strictly increasing with g_min = g_max"
            )));
        }
        let step = (g_max - g_min) / (n - 1) as f64;
        let mut levels: Vec<f64> = (0..n).map(|k| g_min + step * k as f64).collect();
        levels[n - 1] = g_max;
        Ok(GainGrid { levels })
    }

    /// Grid from explicit levels, which must be positive and strictly increasing.
    pub fn from_levels(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidGrid("gain grid needs at least one level".into()));
        }
        if levels.iter().any(|g| !g.is_finite() || *g <= 0.0) {
            return Err(Error::InvalidGrid("gains must be finite and positive".into()));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("gains must be strictly increasing".into()));
        }
        Ok(GainGrid { levels })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, k: usize) -> f64 {
        self.levels[k]
    }
}

/// Ordered set of transmit powers, uniform in dB.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerGrid {
    levels: Vec<f64>,
    levels_db: Vec<f64>,
}

impl PowerGrid {
    /// `m` powers uniformly spaced in dB from `p_min_db` to `p_max_db`.
    pub fn uniform_db(p_min_db: f64, p_max_db: f64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidGrid("power grid needs at least one level".into()));
        }
        if !(p_min_db.is_finite() && p_max_db.is_finite()) {
            return Err(Error::InvalidGrid("power bounds must be finite".into()));
        }
        if p_min_db > p_max_db {
            return Err(Error::InvalidGrid(format!(
                "P_min = {p_min_db} dB exceeds P_max = {p_max_db} dB"
            )));
        }
        let levels_db: Vec<f64> = if m == 1 {
            if p_min_db != p_max_db {
                return Err(Error::InvalidGrid(
                    "a single-level power grid requires P_min = P_max".into(),
                ));
            }
            vec![p_min_db]
        } else {
            if p_min_db == p_max_db {
                return Err(Error::InvalidGrid(format!(
                    "{m} levels cannot be strictly increasing with P_min = P_max"
                )));
            }
            let step = (p_max_db - p_min_db) / (m - 1) as f64;
            let mut db: Vec<f64> = (0..m).map(|k| p_min_db + step * k as f64).collect();
            db[m - 1] = p_max_db;
            db
        };
        let levels = levels_db.iter().map(|db| db_to_linear(*db)).collect();
        Ok(PowerGrid { levels, levels_db })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn levels_db(&self) -> &[f64] {
        &self.levels_db
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, k: usize) -> f64 {
        self.levels[k]
    }

    pub fn p_min(&self) -> f64 {
        self.levels[0]
    }

    pub fn p_max(&self) -> f64 {
        self.levels[self.levels.len() - 1]
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Global channel state `(g_1, g'_1, g_2, g'_2)` as grid indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChannelState {
    pub ig1: usize,
    pub ig1p: usize,
    pub ig2: usize,
    pub ig2p: usize,
}

impl ChannelState {
    pub fn new(ig1: usize, ig1p: usize, ig2: usize, ig2p: usize) -> Self {
        ChannelState { ig1, ig1p, ig2, ig2p }
    }

    /// Indices of the gains node `node` transmits on: `(g_i, g'_i)`.
    pub fn own_links(&self, node: Node) -> (usize, usize) {
        match node {
            Node::One => (self.ig1, self.ig1p),
            Node::Two => (self.ig2, self.ig2p),
        }
    }

    /// Same physical state with the node labels exchanged.
    pub fn swapped(&self) -> Self {
        ChannelState::new(self.ig2, self.ig2p, self.ig1, self.ig1p)
    }
}

/// Dense enumeration of all channel states over four gain grids.
///
/// States are numbered row-major in `(g_1, g'_1, g_2, g'_2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSpace {
    pub dims: [usize; 4],
}

impl StateSpace {
    pub fn new(dims: [usize; 4]) -> Self {
        StateSpace { dims }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, x: &ChannelState) -> usize {
        let [_, d1p, d2, d2p] = self.dims;
        ((x.ig1 * d1p + x.ig1p) * d2 + x.ig2) * d2p + x.ig2p
    }

    pub fn state(&self, mut idx: usize) -> ChannelState {
        let [_, d1p, d2, d2p] = self.dims;
        let ig2p = idx % d2p;
        idx /= d2p;
        let ig2 = idx % d2;
        idx /= d2;
        let ig1p = idx % d1p;
        let ig1 = idx / d1p;
        ChannelState { ig1, ig1p, ig2, ig2p }
    }

    pub fn contains(&self, x: &ChannelState) -> bool {
        x.ig1 < self.dims[0] && x.ig1p < self.dims[1] && x.ig2 < self.dims[2] && x.ig2p < self.dims[3]
    }

    pub fn states(&self) -> impl Iterator<Item = ChannelState> + '_ {
        (0..self.len()).map(move |i| self.state(i))
    }
}

/// A node's action: indices of its own-packet power `p_i` and relay power `p'_i`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Action {
    pub ip: usize,
    pub ipp: usize,
}

impl Action {
    pub fn new(ip: usize, ipp: usize) -> Self {
        Action { ip, ipp }
    }

    /// Row-major index in `(ip, ipp)` for a grid of `m` powers.
    pub fn index(&self, m: usize) -> usize {
        self.ip * m + self.ipp
    }

    pub fn from_index(idx: usize, m: usize) -> Self {
        Action {
            ip: idx / m,
            ipp: idx % m,
        }
    }

    pub fn all(m: usize) -> impl Iterator<Item = Action> {
        (0..m * m).map(move |k| Action::from_index(k, m))
    }
}

/// Map from SNR to a success probability in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EfficiencyFunction {
    /// `exp(-c / x)`; `c = 2^r - 1` for spectral efficiency `r`.
    ExpRatio { c: f64 },
    /// `(1 - exp(-x))^L` for packets of `L` symbols.
    PacketSuccess { symbols: u32 },
}

impl EfficiencyFunction {
    pub fn exp_ratio(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "efficiency constant c = {c} must be positive"
            )));
        }
        Ok(EfficiencyFunction::ExpRatio { c })
    }

    /// `exp(-(2^r - 1) / x)`.
    pub fn from_spectral_efficiency(r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "spectral efficiency r = {r} must be positive"
            )));
        }
        Self::exp_ratio(2f64.powf(r) - 1.0)
    }

    pub fn packet_success(symbols: u32) -> Result<Self> {
        if symbols == 0 {
            return Err(Error::InvalidArgument("packet length L must be positive".into()));
        }
        Ok(EfficiencyFunction::PacketSuccess { symbols })
    }

    pub fn eval(&self, x: f64) -> f64 {
        efficiency(self, x)
    }
}

/// Efficiency `phi(x)` for `x >= 0`. The exponential-ratio form is extended by
/// continuity to `phi(0) = 0`.
pub fn efficiency(phi: &EfficiencyFunction, x: f64) -> f64 {
    match *phi {
        EfficiencyFunction::ExpRatio { c } => {
            if x <= 0.0 {
                0.0
            } else {
                (-c / x).exp()
            }
        }
        EfficiencyFunction::PacketSuccess { symbols } => {
            if x <= 0.0 {
                0.0
            } else {
                (-(-x).exp_m1()).powi(symbols as i32)
            }
        }
    }
}

/// Energy weight, noise variance and efficiency function of the utilities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UtilityParams {
    pub alpha: f64,
    pub sigma2: f64,
    pub phi: EfficiencyFunction,
}

impl UtilityParams {
    pub fn new(alpha: f64, sigma2: f64, phi: EfficiencyFunction) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidArgument(format!("alpha = {alpha} must be >= 0")));
        }
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::InvalidArgument(format!("sigma2 = {sigma2} must be > 0")));
        }
        Ok(UtilityParams { alpha, sigma2, phi })
    }
}

/// Grids plus utility parameters: everything needed to score one block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Game {
    /// Gain grids for `g_1, g'_1, g_2, g'_2`.
    pub gains: [GainGrid; 4],
    pub powers: PowerGrid,
    pub params: UtilityParams,
}

impl Game {
    pub fn new(gains: [GainGrid; 4], powers: PowerGrid, params: UtilityParams) -> Self {
        Game { gains, powers, params }
    }

    /// All four links share one gain grid.
    pub fn symmetric(gains: GainGrid, powers: PowerGrid, params: UtilityParams) -> Self {
        Game {
            gains: [gains.clone(), gains.clone(), gains.clone(), gains],
            powers,
            params,
        }
    }

    pub fn state_space(&self) -> StateSpace {
        StateSpace::new([
            self.gains[0].len(),
            self.gains[1].len(),
            self.gains[2].len(),
            self.gains[3].len(),
        ])
    }

    /// Number of actions per node, `M^2`.
    pub fn num_actions(&self) -> usize {
        self.powers.len() * self.powers.len()
    }

    pub fn with_params(&self, params: UtilityParams) -> Game {
        Game { params, ..self.clone() }
    }

    /// Two-hop SNR of `node`: its own power and gain times the other
    /// node's relay power and relay gain, over the noise variance.
    pub fn snr(&self, node: Node, x: &ChannelState, a1: &Action, a2: &Action) -> f64 {
        let p = &self.powers;
        let (own, relay, g_own, g_relay) = match node {
            Node::One => (
                p.level(a1.ip),
                p.level(a2.ipp),
                self.gains[0].level(x.ig1),
                self.gains[3].level(x.ig2p),
            ),
            Node::Two => (
                p.level(a2.ip),
                p.level(a1.ipp),
                self.gains[2].level(x.ig2),
                self.gains[1].level(x.ig1p),
            ),
        };
        own * g_own * relay * g_relay / self.params.sigma2
    }

    /// `phi(SNR_i)`.
    pub fn efficiency_term(&self, node: Node, x: &ChannelState, a1: &Action, a2: &Action) -> f64 {
        efficiency(&self.params.phi, self.snr(node, x, a1, a2))
    }

    /// `-alpha (p_i + p'_i)`.
    pub fn energy_term(&self, own: &Action) -> f64 {
        -self.params.alpha * (self.powers.level(own.ip) + self.powers.level(own.ipp))
    }

    /// `u_i = phi(SNR_i) - alpha (p_i + p'_i)`.
    pub fn utility(&self, node: Node, x: &ChannelState, a1: &Action, a2: &Action) -> f64 {
        let own = match node {
            Node::One => a1,
            Node::Two => a2,
        };
        self.efficiency_term(node, x, a1, a2) + self.energy_term(own)
    }

    /// `lambda u_1 + (1 - lambda) u_2` at one profile.
    pub fn weighted_utility(&self, lambda: f64, x: &ChannelState, a1: &Action, a2: &Action) -> f64 {
        lambda * self.utility(Node::One, x, a1, a2) + (1.0 - lambda) * self.utility(Node::Two, x, a1, a2)
    }

    /// Lower bound `-2 alpha P_max` of any utility.
    pub fn utility_floor(&self) -> f64 {
        -2.0 * self.params.alpha * self.powers.p_max()
    }
}
