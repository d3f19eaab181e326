//! Small-instance verification suites: joint-law normalization, best
//! response against the exhaustive optimum, deterministic versus stochastic
//! policies, and the ordering of information structures.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::config::{CsiMode, ExperimentConfig, Suite};
use crate::error::{Error, Result};
use crate::game::{EfficiencyFunction, GainGrid, Game, Node, PowerGrid, UtilityParams};
use crate::instance::Instance;
use crate::model::{discretized_marginal, GainLaw, Lottery, ObservationStructure, StateDistribution};
use crate::optimizer::{
    best_of, exhaustive_cost, exhaustive_search, induced_joint, induced_joint_stochastic, solve_all_starts,
    weighted_value_stochastic, Evaluator, SweepOptions, EXHAUSTIVE_LIMIT,
};
use crate::policy::{DecisionPolicy, StochasticPolicy};
use crate::seed::derive_seed;

/// Tolerance for mass, monotonicity and ordering checks.
pub const TIGHT_TOL: f64 = 1e-12;
/// Tolerance for calling a best-response run a match of the optimum.
pub const MATCH_TOL: f64 = 1e-9;

const DESK_G_MIN: f64 = 0.1;
const DESK_G_MAX: f64 = 2.0;
const DESK_P_MIN_DB: f64 = -10.0;
const DESK_P_MAX_DB: f64 = 0.0;
const DESK_ALPHA: f64 = 0.1;
const DESK_MEANS: [f64; 4] = [1.0, 1.9, 1.0, 1.9];

// seed path tags, one per randomized suite
const TAG_NORMALIZATION: u64 = 1;
const TAG_ORACLE: u64 = 2;
const TAG_VERTEX: u64 = 3;

pub const SUITE_MODES: [CsiMode; 3] = [CsiMode::Global, CsiMode::Local, CsiMode::Blind];
pub const SUITE_LOTTERY_SIZES: [usize; 2] = [1, 2];

/// Desk-scale instance: `n` gains on [0.1, 2] with exponential laws of means
/// (1, 1.9, 1, 1.9), `m` powers from -10 dB to 0 dB, alpha = 0.1, r = 1 and
/// a uniform lottery of `lottery_size` outcomes.
pub fn desk_instance(n: usize, m: usize, lottery_size: usize, csi: CsiMode) -> Result<Instance> {
    let grid = if n == 1 {
        GainGrid::uniform(DESK_G_MIN, DESK_G_MIN, 1)?
    } else {
        GainGrid::uniform(DESK_G_MIN, DESK_G_MAX, n)?
    };
    let powers = if m == 1 {
        PowerGrid::uniform_db(DESK_P_MIN_DB, DESK_P_MIN_DB, 1)?
    } else {
        PowerGrid::uniform_db(DESK_P_MIN_DB, DESK_P_MAX_DB, m)?
    };
    let params = UtilityParams::new(DESK_ALPHA, 1.0, EfficiencyFunction::from_spectral_efficiency(1.0)?)?;
    let game = Game::symmetric(grid.clone(), powers, params);
    let marg: Vec<Vec<f64>> = DESK_MEANS
        .iter()
        .map(|&mean| discretized_marginal(&grid, &GainLaw::Exponential { mean }))
        .collect::<Result<_>>()?;
    let rho = StateDistribution::product(&marg[0], &marg[1], &marg[2], &marg[3])?;
    let obs = structure(&game, csi)?;
    Instance::new(game, rho, obs, Lottery::uniform(lottery_size)?)
}

fn structure(game: &Game, csi: CsiMode) -> Result<ObservationStructure> {
    let space = game.state_space();
    match csi {
        CsiMode::Global => Ok(ObservationStructure::global_csi(space)),
        CsiMode::Local => Ok(ObservationStructure::local_csi(space)),
        CsiMode::Blind => Ok(ObservationStructure::blind(space)),
        CsiMode::Custom => Err(Error::InvalidArgument(
            "suite instances use the global, local or blind structures".into(),
        )),
    }
}

fn random_pmf<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / total).collect()
}

fn random_grid<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<GainGrid> {
    let g_min = rng.random_range(0.05..1.0);
    if n == 1 {
        return GainGrid::uniform(g_min, g_min, 1);
    }
    GainGrid::uniform(g_min, g_min * rng.random_range(1.5..20.0), n)
}

/// Randomized desk instance number `index`: independent grid sizes in
/// 1..=max_n per gain, 1..=max_m powers, 1 or 2 lottery outcomes, random
/// marginals and parameters. The structure cycles through global, local, blind.
pub fn random_instance(seed: u64, index: usize, max_n: usize, max_m: usize) -> Result<(Instance, CsiMode)> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[TAG_NORMALIZATION, index as u64]));
    let grids: Vec<GainGrid> = (0..4)
        .map(|_| {
            let n = rng.random_range(1..=max_n);
            random_grid(n, &mut rng)
        })
        .collect::<Result<_>>()?;
    let m = rng.random_range(1..=max_m);
    let powers = if m == 1 {
        let p = rng.random_range(-10.0..10.0);
        PowerGrid::uniform_db(p, p, 1)?
    } else {
        let lo = rng.random_range(-20.0..0.0);
        PowerGrid::uniform_db(lo, lo + rng.random_range(5.0..30.0), m)?
    };
    let phi = if rng.random_bool(0.5) {
        EfficiencyFunction::from_spectral_efficiency(rng.random_range(0.5..3.0))?
    } else {
        EfficiencyFunction::packet_success(rng.random_range(1..=8))?
    };
    let params = UtilityParams::new(rng.random_range(0.0..0.2), rng.random_range(0.5..2.0), phi)?;
    let marg: Vec<Vec<f64>> = grids.iter().map(|g| random_pmf(g.len(), &mut rng)).collect();
    let rho = StateDistribution::product(&marg[0], &marg[1], &marg[2], &marg[3])?;
    let grids: [GainGrid; 4] = grids.try_into().expect("four grids");
    let game = Game::new(grids, powers, params);
    let csi = SUITE_MODES[index % SUITE_MODES.len()];
    let obs = structure(&game, csi)?;
    let lottery = Lottery::from_pmf(&random_pmf(rng.random_range(1..=2), &mut rng))?;
    Ok((Instance::new(game, rho, obs, lottery)?, csi))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TraceStats {
    pub runs: usize,
    pub monotone: usize,
    /// Largest single-step decrease of any trace (0 when all are nondecreasing).
    pub max_drop: f64,
    pub converged: usize,
    pub max_sweeps_used: usize,
}

impl TraceStats {
    fn record(&mut self, trace: &[f64], converged: bool, sweeps: usize) {
        self.runs += 1;
        let drop = trace.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
        if drop <= TIGHT_TOL {
            self.monotone += 1;
        }
        self.max_drop = self.max_drop.max(drop);
        if converged {
            self.converged += 1;
        }
        self.max_sweeps_used = self.max_sweeps_used.max(sweeps);
    }

    fn merge(&mut self, other: &TraceStats) {
        self.runs += other.runs;
        self.monotone += other.monotone;
        self.max_drop = self.max_drop.max(other.max_drop);
        self.converged += other.converged;
        self.max_sweeps_used = self.max_sweeps_used.max(other.max_sweeps_used);
    }

    pub fn passed(&self) -> bool {
        self.monotone == self.runs && self.converged == self.runs
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizationSummary {
    pub instances: usize,
    pub instances_per_mode: BTreeMap<String, usize>,
    pub max_mass_error: f64,
    pub traces: TraceStats,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCase {
    pub lottery_size: usize,
    pub csi_mode: CsiMode,
    pub lambda: f64,
    pub exhaustive_w: f64,
    pub best_response_w: f64,
    pub restart_index_of_best: usize,
    pub matched: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleSummary {
    pub cases: Vec<OracleCase>,
    pub matched: usize,
    pub match_fraction: f64,
    /// Largest amount by which best response exceeded the exhaustive optimum.
    pub max_excess: f64,
    pub traces: TraceStats,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VertexCase {
    pub lottery_size: usize,
    pub csi_mode: CsiMode,
    pub lambda: f64,
    pub exhaustive_w: f64,
    pub best_stochastic_w: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VertexSummary {
    pub cases: Vec<VertexCase>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderingRow {
    pub lottery_size: usize,
    pub lambda: f64,
    pub global: f64,
    pub local: f64,
    pub blind: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderingSummary {
    pub rows: Vec<OrderingRow>,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub normalization: Option<NormalizationSummary>,
    pub oracle: Option<OracleSummary>,
    pub vertex: Option<VertexSummary>,
    pub ordering: Option<OrderingSummary>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.normalization.as_ref().is_none_or(|s| s.passed)
            && self.oracle.as_ref().is_none_or(|s| s.passed)
            && self.vertex.as_ref().is_none_or(|s| s.passed)
            && self.ordering.as_ref().is_none_or(|s| s.passed)
    }

    /// One `(name, passed)` line per suite that ran.
    pub fn outcomes(&self) -> Vec<(&'static str, bool)> {
        let mut out = Vec::new();
        if let Some(s) = &self.normalization {
            out.push(("normalization", s.passed));
        }
        if let Some(s) = &self.oracle {
            out.push(("oracle", s.passed));
        }
        if let Some(s) = &self.vertex {
            out.push(("vertex", s.passed));
        }
        if let Some(s) = &self.ordering {
            out.push(("ordering", s.passed));
        }
        out
    }
}

fn sweep_options(cfg: &ExperimentConfig) -> SweepOptions {
    SweepOptions {
        restarts: cfg.solver.restarts,
        seed: cfg.seed,
        max_sweeps: cfg.solver.max_sweeps,
    }
}

/// Normalization of the induced law on randomized instances, plus the
/// monotonicity of every best-response trace run on them.
pub fn normalization_suite(cfg: &ExperimentConfig) -> Result<NormalizationSummary> {
    let v = &cfg.verify;
    let mut max_err: f64 = 0.0;
    let mut traces = TraceStats::default();
    let mut per_mode: BTreeMap<String, usize> = BTreeMap::new();
    for i in 0..v.random_instances {
        let (inst, csi) = random_instance(cfg.seed, i, 3, 3)?;
        *per_mode.entry(csi.name().to_string()).or_default() += 1;
        let eval = Evaluator::new(&inst);
        let lambda = v.lambdas[i % v.lambdas.len()];
        let opts = SweepOptions {
            restarts: 2,
            seed: derive_seed(cfg.seed, &[TAG_NORMALIZATION, i as u64]),
            max_sweeps: cfg.solver.max_sweeps,
        };
        let runs = solve_all_starts(&eval, lambda, &opts)?;
        for r in &runs {
            traces.record(&r.trace, r.converged, r.sweeps);
            let q = induced_joint(&inst, &r.policies.0, &r.policies.1)?;
            max_err = max_err.max((q.total_mass() - 1.0).abs());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[TAG_NORMALIZATION, i as u64, 1]));
        let (n1, n2, nv, m) = (
            inst.num_signals(Node::One),
            inst.num_signals(Node::Two),
            inst.lottery.len(),
            inst.num_powers(),
        );
        let f1 = DecisionPolicy::random(Node::One, n1, nv, m, &mut rng);
        let f2 = DecisionPolicy::random(Node::Two, n2, nv, m, &mut rng);
        max_err = max_err.max((induced_joint(&inst, &f1, &f2)?.total_mass() - 1.0).abs());
        let p1 = StochasticPolicy::random_simplex(Node::One, n1, nv, m, &mut rng);
        let p2 = StochasticPolicy::random_simplex(Node::Two, n2, nv, m, &mut rng);
        max_err = max_err.max((induced_joint_stochastic(&inst, &p1, &p2)?.total_mass() - 1.0).abs());
    }
    Ok(NormalizationSummary {
        instances: v.random_instances,
        instances_per_mode: per_mode,
        max_mass_error: max_err,
        passed: max_err <= TIGHT_TOL && traces.passed(),
        traces,
    })
}

struct SuiteCase {
    lottery_size: usize,
    csi: CsiMode,
    inst: Instance,
}

fn suite_cases(cfg: &ExperimentConfig) -> Result<Vec<SuiteCase>> {
    let mut cases = Vec::new();
    for &lottery_size in &SUITE_LOTTERY_SIZES {
        for &csi in &SUITE_MODES {
            let inst = desk_instance(cfg.verify.n, cfg.verify.m, lottery_size, csi)?;
            cases.push(SuiteCase {
                lottery_size,
                csi,
                inst,
            });
        }
    }
    // refuse up front so no suite runs on an instance the oracle cannot handle
    for c in &cases {
        let cost = exhaustive_cost(&c.inst);
        if cost > EXHAUSTIVE_LIMIT {
            return Err(Error::TooLarge {
                required: cost,
                limit: EXHAUSTIVE_LIMIT,
            });
        }
    }
    Ok(cases)
}

type OptimumTable = BTreeMap<(usize, CsiMode, u64), f64>;

fn optima(cases: &[SuiteCase], lambdas: &[f64]) -> Result<OptimumTable> {
    let mut table = BTreeMap::new();
    for c in cases {
        for &l in lambdas {
            let w = exhaustive_search(&c.inst, l)?.w;
            table.insert((c.lottery_size, c.csi, l.to_bits()), w);
        }
    }
    Ok(table)
}

fn oracle_suite(cfg: &ExperimentConfig, cases: &[SuiteCase], optima: &OptimumTable) -> Result<OracleSummary> {
    let v = &cfg.verify;
    let mut out = Vec::new();
    let mut traces = TraceStats::default();
    let mut max_excess = f64::NEG_INFINITY;
    for (ci, c) in cases.iter().enumerate() {
        let eval = Evaluator::new(&c.inst);
        for (li, &lambda) in v.lambdas.iter().enumerate() {
            let mut opts = sweep_options(cfg);
            opts.seed = derive_seed(cfg.seed, &[TAG_ORACLE, ci as u64, li as u64]);
            let runs = solve_all_starts(&eval, lambda, &opts)?;
            let mut local = TraceStats::default();
            for r in &runs {
                local.record(&r.trace, r.converged, r.sweeps);
            }
            traces.merge(&local);
            let best = best_of(runs).expect("at least two starts");
            let ex = optima[&(c.lottery_size, c.csi, lambda.to_bits())];
            let excess = best.result.w - ex;
            max_excess = max_excess.max(excess);
            out.push(OracleCase {
                lottery_size: c.lottery_size,
                csi_mode: c.csi,
                lambda,
                exhaustive_w: ex,
                best_response_w: best.result.w,
                restart_index_of_best: best.restart_index,
                matched: excess.abs() <= MATCH_TOL,
            });
        }
    }
    let matched = out.iter().filter(|c| c.matched).count();
    let match_fraction = matched as f64 / out.len().max(1) as f64;
    Ok(OracleSummary {
        matched,
        match_fraction,
        max_excess,
        passed: max_excess <= TIGHT_TOL && match_fraction >= v.min_match_fraction && traces.passed(),
        traces,
        cases: out,
    })
}

/// Middle entry of the lambda list, used for the single-weight suites.
fn vertex_lambda(lambdas: &[f64]) -> f64 {
    lambdas[lambdas.len() / 2]
}

fn vertex_suite(cfg: &ExperimentConfig, cases: &[SuiteCase], optima: &OptimumTable) -> Result<VertexSummary> {
    let lambda = vertex_lambda(&cfg.verify.lambdas);
    let samples = cfg.verify.stochastic_samples;
    let mut out = Vec::new();
    for (ci, c) in cases.iter().enumerate() {
        let inst = &c.inst;
        let (n1, n2, nv, m) = (
            inst.num_signals(Node::One),
            inst.num_signals(Node::Two),
            inst.lottery.len(),
            inst.num_powers(),
        );
        let mut best = f64::NEG_INFINITY;
        for k in 0..samples {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[TAG_VERTEX, ci as u64, k as u64]));
            let p1 = StochasticPolicy::random_simplex(Node::One, n1, nv, m, &mut rng);
            let p2 = StochasticPolicy::random_simplex(Node::Two, n2, nv, m, &mut rng);
            best = best.max(weighted_value_stochastic(inst, lambda, &p1, &p2)?);
        }
        let ex = match optima.get(&(c.lottery_size, c.csi, lambda.to_bits())) {
            Some(&w) => w,
            None => exhaustive_search(inst, lambda)?.w,
        };
        out.push(VertexCase {
            lottery_size: c.lottery_size,
            csi_mode: c.csi,
            lambda,
            exhaustive_w: ex,
            best_stochastic_w: best,
            samples,
        });
    }
    let passed = out.iter().all(|c| c.best_stochastic_w <= c.exhaustive_w + TIGHT_TOL);
    Ok(VertexSummary { cases: out, passed })
}

fn ordering_suite(cfg: &ExperimentConfig, optima: &OptimumTable) -> OrderingSummary {
    let mut rows = Vec::new();
    for &lottery_size in &SUITE_LOTTERY_SIZES {
        for &lambda in &cfg.verify.lambdas {
            let w = |csi| optima[&(lottery_size, csi, lambda.to_bits())];
            rows.push(OrderingRow {
                lottery_size,
                lambda,
                global: w(CsiMode::Global),
                local: w(CsiMode::Local),
                blind: w(CsiMode::Blind),
            });
        }
    }
    let passed = rows
        .iter()
        .all(|r| r.global >= r.local - TIGHT_TOL && r.local >= r.blind - TIGHT_TOL);
    OrderingSummary { rows, passed }
}

/// Runs the suites selected in `cfg.verify`.
///
/// Fails with [`Error::TooLarge`] before doing any work when a suite instance
/// exceeds the exhaustive-search guard.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let suites = &cfg.verify.suites;
    let needs_oracle = suites.iter().any(|s| *s != Suite::Normalization);
    let cases = if needs_oracle { suite_cases(cfg)? } else { Vec::new() };
    let mut report = VerifyReport::default();
    if suites.contains(&Suite::Normalization) {
        report.normalization = Some(normalization_suite(cfg)?);
    }
    if needs_oracle {
        let lambdas = if suites.contains(&Suite::Oracle) || suites.contains(&Suite::Ordering) {
            cfg.verify.lambdas.clone()
        } else {
            vec![vertex_lambda(&cfg.verify.lambdas)]
        };
        let optima = optima(&cases, &lambdas)?;
        if suites.contains(&Suite::Oracle) {
            report.oracle = Some(oracle_suite(cfg, &cases, &optima)?);
        }
        if suites.contains(&Suite::Vertex) {
            report.vertex = Some(vertex_suite(cfg, &cases, &optima)?);
        }
        if suites.contains(&Suite::Ordering) {
            report.ordering = Some(ordering_suite(cfg, &optima));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_instance_shapes() {
        let inst = desk_instance(2, 2, 2, CsiMode::Local).unwrap();
        assert_eq!(inst.game.state_space().len(), 16);
        assert_eq!(inst.num_signals(Node::One), 4);
        assert_eq!(inst.lottery.len(), 2);
        assert_eq!(inst.game.powers.levels_db(), &[-10.0, 0.0]);
    }

    #[test]
    fn random_instances_are_seeded_and_cycle_modes() {
        let (a, ca) = random_instance(7, 4, 3, 3).unwrap();
        let (b, cb) = random_instance(7, 4, 3, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(ca, cb);
        let modes: Vec<CsiMode> = (0..3).map(|i| random_instance(7, i, 3, 3).unwrap().1).collect();
        assert_eq!(modes, SUITE_MODES.to_vec());
    }

    #[test]
    fn oversized_suite_is_refused() {
        let mut cfg = ExperimentConfig::default();
        cfg.verify.n = 3;
        cfg.verify.m = 3;
        cfg.verify.suites = vec![Suite::Oracle];
        assert!(matches!(run_verify(&cfg), Err(Error::TooLarge { .. })));
    }
}
