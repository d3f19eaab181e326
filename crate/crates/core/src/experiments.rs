//! Experiment drivers and their plot-ready outputs.
//!
//! Every driver returns a plain report; the `write_*` functions turn a report
//! into CSV curves plus a `summary.json`. Summaries and CSVs contain no
//! timing data so that identical inputs give identical bytes; wall times go
//! to a separate `timings.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::baselines::{hub_nash, one_shot_nash, NashBaseline};
use crate::config::{CsiMode, ExperimentConfig};
use crate::error::Result;
use crate::game::Action;
use crate::game::{Node, UtilityParams};
use crate::instance::Instance;
use crate::network::{build_network, fraction_sweep, linear_fit, FractionSummary, Interaction, PopulationPolicies};
use crate::optimizer::{pareto_sweep, solve_multi_start, Evaluator, RegionResult, SweepOptions, SweepPoint};

const NASH_ITERS: usize = 1000;

fn sweep_options(cfg: &ExperimentConfig) -> SweepOptions {
    SweepOptions {
        restarts: cfg.solver.restarts,
        seed: cfg.seed,
        max_sweeps: cfg.solver.max_sweeps,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionRow {
    pub csi_mode: CsiMode,
    pub lambda: f64,
    pub u1: f64,
    pub u2: f64,
    pub w: f64,
    pub sweeps: usize,
    pub restart_index_of_best: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct HullRow {
    pub csi_mode: CsiMode,
    pub vertex_index: usize,
    pub u1: f64,
    pub u2: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionReport {
    pub rows: Vec<RegionRow>,
    pub hull: Vec<HullRow>,
    pub regions: Vec<(CsiMode, RegionResult)>,
    pub hub_nash: NashBaseline,
    pub one_shot_nash: NashBaseline,
}

impl RegionReport {
    /// Rows of one CSI mode, in lambda order.
    pub fn rows_for(&self, mode: CsiMode) -> impl Iterator<Item = &RegionRow> {
        self.rows.iter().filter(move |r| r.csi_mode == mode)
    }
}

/// Utility region for every configured CSI mode, plus the baselines.
pub fn run_region(cfg: &ExperimentConfig) -> Result<RegionReport> {
    cfg.validate()?;
    let game = cfg.game()?;
    let rho = cfg.state_distribution()?;
    let opts = sweep_options(cfg);
    let mut rows = Vec::new();
    let mut hull = Vec::new();
    let mut regions = Vec::new();
    for &mode in &cfg.solver.csi_modes {
        let inst = cfg.instance_for(game.clone(), mode)?;
        let eval = Evaluator::new(&inst);
        let region = pareto_sweep(&eval, &cfg.solver.lambdas, &opts)?;
        for p in &region.points {
            rows.push(RegionRow {
                csi_mode: mode,
                lambda: p.result.lambda,
                u1: p.result.u1,
                u2: p.result.u2,
                w: p.result.w,
                sweeps: p.result.sweeps,
                restart_index_of_best: p.restart_index,
                converged: p.result.converged,
            });
        }
        for (k, v) in region.hull.iter().enumerate() {
            hull.push(HullRow {
                csi_mode: mode,
                vertex_index: k,
                u1: v.u1,
                u2: v.u2,
            });
        }
        regions.push((mode, region));
    }
    Ok(RegionReport {
        rows,
        hull,
        regions,
        hub_nash: hub_nash(&game, &rho),
        one_shot_nash: one_shot_nash(&game, &rho, NASH_ITERS)?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub csi_mode: CsiMode,
    pub point: SweepPoint,
    /// Sparse support entries used by the evaluator.
    pub support_len: usize,
    pub num_states: usize,
    pub signals: (usize, usize),
}

/// Single weighted solve.
pub fn run_solve(cfg: &ExperimentConfig, lambda: f64, csi: CsiMode) -> Result<(Instance, SolveReport)> {
    cfg.validate()?;
    let inst = cfg.instance(csi)?;
    let report = {
        let eval = Evaluator::new(&inst);
        let point = solve_multi_start(&eval, lambda, &sweep_options(cfg))?;
        SolveReport {
            csi_mode: csi,
            point,
            support_len: eval.support_len(),
            num_states: inst.game.state_space().len(),
            signals: (inst.num_signals(Node::One), inst.num_signals(Node::Two)),
        }
    };
    Ok((inst, report))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaRow {
    pub r: f64,
    pub alpha: f64,
    pub inv_alpha: f64,
    /// Per-node average `(u1 + u2) / 2` of the optimized policy pair.
    pub u_advanced: f64,
    /// Same average at the minimum-power equilibrium.
    pub u_ne: f64,
    pub u1: f64,
    pub u2: f64,
    pub converged: bool,
}

/// Optimized versus equilibrium utility over the energy weight.
pub fn run_alpha_sweep(cfg: &ExperimentConfig) -> Result<Vec<AlphaRow>> {
    cfg.validate()?;
    let base = cfg.game()?;
    let rho = cfg.state_distribution()?;
    let opts = sweep_options(cfg);
    let a = &cfg.alpha_sweep;
    let mut rows = Vec::new();
    for &r in &a.rates {
        let phi = crate::config::EfficiencyConfig::ExpRatio { r }.build()?;
        for &alpha in &a.alphas {
            let game = base.with_params(UtilityParams::new(alpha, cfg.utility.sigma2, phi)?);
            let ne = hub_nash(&game, &rho);
            let inst = cfg.instance_for(game, a.csi)?;
            let eval = Evaluator::new(&inst);
            let best = solve_multi_start(&eval, a.lambda, &opts)?;
            rows.push(AlphaRow {
                r,
                alpha,
                inv_alpha: 1.0 / alpha,
                u_advanced: 0.5 * (best.result.u1 + best.result.u2),
                u_ne: 0.5 * (ne.u1 + ne.u2),
                u1: best.result.u1,
                u2: best.result.u2,
                converged: best.result.converged,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct NetworkReport {
    pub rows: Vec<FractionSummary>,
    pub interactions: Vec<Interaction>,
    /// Expected sum-utility of one interaction, `[source 1 advanced][source 2 advanced]`.
    pub pair_values: [[f64; 2]; 2],
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub advanced_converged: bool,
}

/// Population sweep over the fraction of advanced nodes.
pub fn run_network(cfg: &ExperimentConfig) -> Result<NetworkReport> {
    cfg.validate()?;
    let n = &cfg.network;
    let inst = cfg.instance(n.csi)?;
    let eval = Evaluator::new(&inst);
    let best = solve_multi_start(&eval, n.lambda, &sweep_options(cfg))?;
    let hub = hub_nash(&inst.game, &inst.rho);
    let policies = PopulationPolicies::new(&eval, best.result.policies.clone(), hub.actions.0)?;
    let pair_values = policies.pair_table(&eval)?;
    let interactions = build_network(n.n_nodes, n.n_interactions, cfg.seed)?;
    let rows = fraction_sweep(
        &interactions,
        n.n_nodes,
        &n.fractions,
        n.replications,
        &pair_values,
        cfg.seed,
    )?;
    let xs: Vec<f64> = rows.iter().map(|r| r.fraction).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean).collect();
    let (slope, intercept, r_squared) = linear_fit(&xs, &ys);
    Ok(NetworkReport {
        rows,
        interactions,
        pair_values,
        slope,
        intercept,
        r_squared,
        advanced_converged: best.result.converged,
    })
}

/// Output sink that stamps every CSV row with the config hash and seed.
pub struct OutputDir {
    dir: PathBuf,
    hash: String,
    seed: u64,
}

impl OutputDir {
    pub fn new(dir: &Path, cfg: &ExperimentConfig) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            hash: cfg.hash(),
            seed: cfg.seed,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes `header` + `config_hash,seed` and one line per record.
    pub fn write_csv(&self, name: &str, header: &[&str], records: &[Vec<String>]) -> Result<PathBuf> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path)?;
        let mut head: Vec<&str> = header.to_vec();
        head.extend(["config_hash", "seed"]);
        w.write_record(&head)?;
        let seed = self.seed.to_string();
        for rec in records {
            let mut row = rec.clone();
            row.push(self.hash.clone());
            row.push(seed.clone());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(path)
    }

    pub fn write_json(&self, name: &str, value: &Value) -> Result<PathBuf> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }

    /// `summary.json` with the config echo and hash around `body`.
    pub fn write_summary(&self, command: &str, cfg: &ExperimentConfig, body: Value) -> Result<PathBuf> {
        let summary = json!({
            "command": command,
            "config": cfg,
            "config_hash": self.hash,
            "seed": self.seed,
            "results": body,
        });
        self.write_json("summary.json", &summary)
    }
}

fn f(x: f64) -> String {
    x.to_string()
}

fn action_json(inst: &Instance, a: &Action) -> Value {
    let p = &inst.game.powers;
    json!({"ip": a.ip, "ipp": a.ipp, "p_db": p.levels_db()[a.ip], "pp_db": p.levels_db()[a.ipp]})
}

fn nash_json(n: &NashBaseline) -> Value {
    json!({
        "actions": [[n.actions.0.ip, n.actions.0.ipp], [n.actions.1.ip, n.actions.1.ipp]],
        "u1": n.u1,
        "u2": n.u2,
        "converged": n.converged,
        "iterations": n.iterations,
    })
}

pub fn write_region(out: &OutputDir, cfg: &ExperimentConfig, report: &RegionReport) -> Result<()> {
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.csi_mode.name().into(),
                f(r.lambda),
                f(r.u1),
                f(r.u2),
                f(r.w),
                r.sweeps.to_string(),
                r.restart_index_of_best.to_string(),
            ]
        })
        .collect();
    out.write_csv(
        "region.csv",
        &["csi_mode", "lambda", "u1", "u2", "w", "sweeps", "restart_index_of_best"],
        &rows,
    )?;
    let hull: Vec<Vec<String>> = report
        .hull
        .iter()
        .map(|h| vec![h.csi_mode.name().into(), h.vertex_index.to_string(), f(h.u1), f(h.u2)])
        .collect();
    out.write_csv("region_hull.csv", &["csi_mode", "vertex_index", "u1", "u2"], &hull)?;
    let convergence: Vec<Value> = report
        .rows
        .iter()
        .map(|r| json!({"csi_mode": r.csi_mode, "lambda": r.lambda, "converged": r.converged, "sweeps": r.sweeps}))
        .collect();
    out.write_summary(
        "region",
        cfg,
        json!({
            "hub_nash": nash_json(&report.hub_nash),
            "one_shot_nash": nash_json(&report.one_shot_nash),
            "convergence": convergence,
            "all_converged": report.rows.iter().all(|r| r.converged),
        }),
    )?;
    Ok(())
}

pub fn write_solve(out: &OutputDir, cfg: &ExperimentConfig, inst: &Instance, report: &SolveReport) -> Result<()> {
    let r = &report.point.result;
    out.write_csv(
        "solve.csv",
        &["csi_mode", "lambda", "u1", "u2", "w", "sweeps", "restart_index_of_best"],
        &[vec![
            report.csi_mode.name().into(),
            f(r.lambda),
            f(r.u1),
            f(r.u2),
            f(r.w),
            r.sweeps.to_string(),
            report.point.restart_index.to_string(),
        ]],
    )?;
    for (node, policy) in [(Node::One, &r.policies.0), (Node::Two, &r.policies.1)] {
        let space = inst.obs.signal_space(node);
        let p = &inst.game.powers;
        let mut rows = Vec::with_capacity(policy.table().len());
        for v in 0..policy.num_lottery() {
            for s in 0..policy.num_signals() {
                let a = policy.get(s, v);
                rows.push(vec![
                    s.to_string(),
                    v.to_string(),
                    space.describe(s),
                    a.ip.to_string(),
                    a.ipp.to_string(),
                    f(p.levels_db()[a.ip]),
                    f(p.levels_db()[a.ipp]),
                ]);
            }
        }
        out.write_csv(
            &format!("policy_node{}.csv", node.label()),
            &["signal", "lottery", "observation", "ip", "ipp", "p_db", "pp_db"],
            &rows,
        )?;
    }
    let hub = hub_nash(&inst.game, &inst.rho);
    out.write_summary(
        "solve",
        cfg,
        json!({
            "csi_mode": report.csi_mode,
            "lambda": r.lambda,
            "u1": r.u1,
            "u2": r.u2,
            "w": r.w,
            "converged": r.converged,
            "sweeps": r.sweeps,
            "restart_index_of_best": report.point.restart_index,
            "trace": r.trace,
            "support_len": report.support_len,
            "num_states": report.num_states,
            "signals": [report.signals.0, report.signals.1],
            "hub_nash": nash_json(&hub),
            "hub_nash_action": action_json(inst, &hub.actions.0),
        }),
    )?;
    Ok(())
}

pub fn write_alpha_sweep(out: &OutputDir, cfg: &ExperimentConfig, rows: &[AlphaRow]) -> Result<()> {
    let recs: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![f(r.r), f(r.alpha), f(r.inv_alpha), f(r.u_advanced), f(r.u_ne)])
        .collect();
    out.write_csv(
        "alpha_sweep.csv",
        &["r", "alpha", "inv_alpha", "u_advanced", "u_ne"],
        &recs,
    )?;
    out.write_summary(
        "alpha-sweep",
        cfg,
        json!({
            "rows": rows,
            "all_converged": rows.iter().all(|r| r.converged),
        }),
    )?;
    Ok(())
}

pub fn write_network(out: &OutputDir, cfg: &ExperimentConfig, report: &NetworkReport) -> Result<()> {
    let recs: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| vec![f(r.fraction), f(r.mean), f(r.min), f(r.max), r.replications.to_string()])
        .collect();
    out.write_csv(
        "network.csv",
        &["fraction", "mean_sum_utility", "min", "max", "replications"],
        &recs,
    )?;
    out.write_summary(
        "network",
        cfg,
        json!({
            "slope": report.slope,
            "intercept": report.intercept,
            "r_squared": report.r_squared,
            "pair_values": report.pair_values,
            "interactions": report.interactions,
            "advanced_converged": report.advanced_converged,
        }),
    )?;
    Ok(())
}
