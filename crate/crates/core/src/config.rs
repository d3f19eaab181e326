//! Experiment configuration: a TOML tree whose defaults are the standard
//! simulation setup (20 gain levels on [0.01, 10], 25 power levels from
//! -20 dB to +20 dB, gain means (1, 1.9, 1, 1.9), `phi(x) = exp(-(2^r - 1)/x)`).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::game::{EfficiencyFunction, GainGrid, Game, PowerGrid, UtilityParams};
use crate::instance::Instance;
use crate::model::{discretized_marginal, GainLaw, Lottery, ObservationStructure, StateDistribution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CsiMode {
    Global,
    Local,
    Blind,
    /// Product kernel read from `solver.kernel_file`.
    Custom,
}

impl CsiMode {
    pub fn name(self) -> &'static str {
        match self {
            CsiMode::Global => "global",
            CsiMode::Local => "local",
            CsiMode::Blind => "blind",
            CsiMode::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(CsiMode::Global),
            "local" => Ok(CsiMode::Local),
            "blind" => Ok(CsiMode::Blind),
            "custom" => Ok(CsiMode::Custom),
            other => Err(Error::config("csi", format!("unknown CSI mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawKind {
    Exponential,
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GainConfig {
    pub n: usize,
    pub g_min: f64,
    pub g_max: f64,
    pub law: LawKind,
    /// Means of `g_1, g'_1, g_2, g'_2`.
    pub means: [f64; 4],
}

impl Default for GainConfig {
    fn default() -> Self {
        GainConfig {
            n: 20,
            g_min: 0.01,
            g_max: 10.0,
            law: LawKind::Exponential,
            means: [1.0, 1.9, 1.0, 1.9],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerConfig {
    pub m: usize,
    pub p_min_db: f64,
    pub p_max_db: f64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        PowerConfig {
            m: 25,
            p_min_db: -20.0,
            p_max_db: 20.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EfficiencyConfig {
    /// `exp(-(2^r - 1)/x)`.
    ExpRatio { r: f64 },
    /// `(1 - exp(-x))^symbols`.
    PacketSuccess { symbols: u32 },
}

impl EfficiencyConfig {
    pub fn build(&self) -> Result<EfficiencyFunction> {
        match *self {
            EfficiencyConfig::ExpRatio { r } => EfficiencyFunction::from_spectral_efficiency(r),
            EfficiencyConfig::PacketSuccess { symbols } => EfficiencyFunction::packet_success(symbols),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UtilityConfig {
    pub alpha: f64,
    pub sigma2: f64,
    pub efficiency: EfficiencyConfig,
}

impl Default for UtilityConfig {
    fn default() -> Self {
        UtilityConfig {
            alpha: 0.1,
            sigma2: 1.0,
            efficiency: EfficiencyConfig::ExpRatio { r: 1.0 },
        }
    }
}

pub fn default_lambdas() -> Vec<f64> {
    (0..=20).map(|k| k as f64 / 20.0).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub lambdas: Vec<f64>,
    pub restarts: usize,
    pub max_sweeps: usize,
    pub lottery_size: usize,
    /// Observation structures solved by `region`.
    pub csi_modes: Vec<CsiMode>,
    /// JSON file `{"k1": [[..]], "k2": [[..]]}` for the custom mode.
    pub kernel_file: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambdas: default_lambdas(),
            restarts: 16,
            max_sweeps: 100,
            lottery_size: 1,
            csi_modes: vec![CsiMode::Global, CsiMode::Local],
            kernel_file: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlphaSweepConfig {
    pub alphas: Vec<f64>,
    /// Spectral efficiencies to sweep.
    pub rates: Vec<f64>,
    pub lambda: f64,
    pub csi: CsiMode,
}

impl Default for AlphaSweepConfig {
    fn default() -> Self {
        AlphaSweepConfig {
            alphas: vec![10.0, 5.0, 2.0, 1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01],
            rates: vec![1.0, 3.0],
            lambda: 0.5,
            csi: CsiMode::Local,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub n_nodes: usize,
    pub n_interactions: usize,
    pub fractions: Vec<f64>,
    pub replications: usize,
    pub lambda: f64,
    pub csi: CsiMode,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            n_nodes: 50,
            n_interactions: 25,
            fractions: (0..=10).map(|k| k as f64 / 10.0).collect(),
            replications: 10,
            lambda: 0.5,
            csi: CsiMode::Local,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Normalization,
    Oracle,
    Vertex,
    Ordering,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub suites: Vec<Suite>,
    /// Gain levels of the oracle instances.
    pub n: usize,
    /// Power levels of the oracle instances.
    pub m: usize,
    pub random_instances: usize,
    pub stochastic_samples: usize,
    pub lambdas: Vec<f64>,
    /// Required fraction of oracle cases matched by multi-start best response.
    pub min_match_fraction: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            suites: vec![Suite::Normalization, Suite::Oracle, Suite::Vertex, Suite::Ordering],
            n: 2,
            m: 2,
            random_instances: 100,
            stochastic_samples: 1000,
            lambdas: vec![0.0, 0.3, 0.5, 1.0],
            min_match_fraction: 0.9,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub gains: GainConfig,
    pub powers: PowerConfig,
    pub utility: UtilityConfig,
    pub solver: SolverConfig,
    pub alpha_sweep: AlphaSweepConfig,
    pub network: NetworkConfig,
    pub verify: VerifyConfig,
}

#[derive(Deserialize)]
struct KernelFile {
    k1: Vec<Vec<f64>>,
    k2: Vec<Vec<f64>>,
}

fn check_lambda_list(path: &str, lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::config(path, "must not be empty"));
    }
    if let Some(bad) = lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::config(path, format!("value {bad} is outside [0, 1]")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let path = e
                .span()
                .map(|s| format!("byte {}..{}", s.start, s.end))
                .unwrap_or_else(|| "<root>".into());
            Error::config(path, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml_str(&text)?;
        // kernel paths are relative to the config file
        if let (Some(k), Some(dir)) = (&cfg.solver.kernel_file, path.parent()) {
            if k.is_relative() {
                cfg.solver.kernel_file = Some(dir.join(k));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        hex::encode(digest)[..16].to_string()
    }

    /// Reduced version of the standard setup used for quick checks:
    /// 5 gain levels and 7 power levels, everything else unchanged.
    pub fn reduced() -> Self {
        let mut cfg = ExperimentConfig::default();
        cfg.gains.n = 5;
        cfg.powers.m = 7;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.gains;
        if g.n == 0 {
            return Err(Error::config("gains.n", "must be at least 1"));
        }
        if !(g.g_min > 0.0 && g.g_min.is_finite()) {
            return Err(Error::config("gains.g_min", "must be positive"));
        }
        if !(g.g_max >= g.g_min && g.g_max.is_finite()) {
            return Err(Error::config("gains.g_max", "must be finite and >= g_min"));
        }
        if (g.n == 1) != (g.g_min == g.g_max) {
            return Err(Error::config(
                "gains.n",
                "a single level requires g_min = g_max and vice versa",
            ));
        }
        if let Some(i) = g.means.iter().position(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::config(format!("gains.means[{i}]"), "must be positive"));
        }
        let p = &self.powers;
        if p.m == 0 {
            return Err(Error::config("powers.m", "must be at least 1"));
        }
        if !(p.p_min_db.is_finite() && p.p_max_db.is_finite() && p.p_min_db <= p.p_max_db) {
            return Err(Error::config("powers.p_max_db", "must be finite and >= p_min_db"));
        }
        if (p.m == 1) != (p.p_min_db == p.p_max_db) {
            return Err(Error::config(
                "powers.m",
                "a single level requires p_min_db = p_max_db and vice versa",
            ));
        }
        let u = &self.utility;
        if !(u.alpha >= 0.0 && u.alpha.is_finite()) {
            return Err(Error::config("utility.alpha", "must be >= 0"));
        }
        if !(u.sigma2 > 0.0 && u.sigma2.is_finite()) {
            return Err(Error::config("utility.sigma2", "must be > 0"));
        }
        u.efficiency
            .build()
            .map_err(|e| Error::config("utility.efficiency", e.to_string()))?;
        let s = &self.solver;
        check_lambda_list("solver.lambdas", &s.lambdas)?;
        if s.max_sweeps == 0 {
            return Err(Error::config("solver.max_sweeps", "must be at least 1"));
        }
        if s.lottery_size == 0 {
            return Err(Error::config("solver.lottery_size", "must be at least 1"));
        }
        if s.csi_modes.is_empty() {
            return Err(Error::config("solver.csi_modes", "must not be empty"));
        }
        let uses_custom = s.csi_modes.contains(&CsiMode::Custom)
            || self.alpha_sweep.csi == CsiMode::Custom
            || self.network.csi == CsiMode::Custom;
        if uses_custom && s.kernel_file.is_none() {
            return Err(Error::config("solver.kernel_file", "required by the custom CSI mode"));
        }
        let a = &self.alpha_sweep;
        if a.alphas.is_empty() {
            return Err(Error::config("alpha_sweep.alphas", "must not be empty"));
        }
        if let Some(bad) = a.alphas.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            return Err(Error::config("alpha_sweep.alphas", format!("value {bad} must be > 0")));
        }
        if a.rates.is_empty() || a.rates.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::config(
                "alpha_sweep.rates",
                "must be a non-empty list of positive rates",
            ));
        }
        check_lambda_list("alpha_sweep.lambda", &[a.lambda])?;
        let n = &self.network;
        if n.n_nodes < 4 {
            return Err(Error::config("network.n_nodes", "must be at least 4"));
        }
        if n.n_interactions == 0 {
            return Err(Error::config("network.n_interactions", "must be at least 1"));
        }
        check_lambda_list("network.fractions", &n.fractions)?;
        if n.replications == 0 {
            return Err(Error::config("network.replications", "must be at least 1"));
        }
        check_lambda_list("network.lambda", &[n.lambda])?;
        let v = &self.verify;
        if v.suites.is_empty() {
            return Err(Error::config("verify.suites", "must select at least one suite"));
        }
        if v.n == 0 || v.m == 0 {
            return Err(Error::config("verify.n", "oracle grid sizes must be at least 1"));
        }
        check_lambda_list("verify.lambdas", &v.lambdas)?;
        if !(0.0..=1.0).contains(&v.min_match_fraction) {
            return Err(Error::config("verify.min_match_fraction", "must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn gain_grid(&self) -> Result<GainGrid> {
        GainGrid::uniform(self.gains.g_min, self.gains.g_max, self.gains.n)
    }

    pub fn power_grid(&self) -> Result<PowerGrid> {
        PowerGrid::uniform_db(self.powers.p_min_db, self.powers.p_max_db, self.powers.m)
    }

    pub fn params(&self) -> Result<UtilityParams> {
        UtilityParams::new(
            self.utility.alpha,
            self.utility.sigma2,
            self.utility.efficiency.build()?,
        )
    }

    pub fn game(&self) -> Result<Game> {
        Ok(Game::symmetric(self.gain_grid()?, self.power_grid()?, self.params()?))
    }

    pub fn state_distribution(&self) -> Result<StateDistribution> {
        let grid = self.gain_grid()?;
        let m: Vec<Vec<f64>> = self
            .gains
            .means
            .iter()
            .map(|&mean| {
                let law = match self.gains.law {
                    LawKind::Exponential => GainLaw::Exponential { mean },
                    LawKind::Uniform => GainLaw::Uniform,
                };
                discretized_marginal(&grid, &law)
            })
            .collect::<Result<_>>()?;
        StateDistribution::product(&m[0], &m[1], &m[2], &m[3])
    }

    pub fn observation(&self, game: &Game, csi: CsiMode) -> Result<ObservationStructure> {
        let space = game.state_space();
        match csi {
            CsiMode::Global => Ok(ObservationStructure::global_csi(space)),
            CsiMode::Local => Ok(ObservationStructure::local_csi(space)),
            CsiMode::Blind => Ok(ObservationStructure::blind(space)),
            CsiMode::Custom => {
                let path = self
                    .solver
                    .kernel_file
                    .as_ref()
                    .ok_or_else(|| Error::config("solver.kernel_file", "required by the custom CSI mode"))?;
                let text = std::fs::read_to_string(path)?;
                let k: KernelFile = serde_json::from_str(&text)?;
                ObservationStructure::product_kernel(k.k1, k.k2)
            }
        }
    }

    pub fn instance(&self, csi: CsiMode) -> Result<Instance> {
        let game = self.game()?;
        self.instance_for(game, csi)
    }

    /// Instance over `game` (possibly with overridden parameters).
    pub fn instance_for(&self, game: Game, csi: CsiMode) -> Result<Instance> {
        let rho = self.state_distribution()?;
        let obs = self.observation(&game, csi)?;
        Instance::new(game, rho, obs, Lottery::uniform(self.solver.lottery_size)?)
    }
}
