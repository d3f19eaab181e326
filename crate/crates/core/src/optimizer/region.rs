//! Multi-start weighted sweeps and the convex (time-sharing) closure of the
//! resulting utility points.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::evaluator::{check_lambda, Evaluator};
use super::response::{sequential_best_response, SolveResult};
use crate::error::{Error, Result};
use crate::game::Node;
use crate::policy::DecisionPolicy;
use crate::seed::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Random initial pairs, on top of the all-min and all-max starts.
    pub restarts: usize,
    pub seed: u64,
    pub max_sweeps: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            restarts: 16,
            seed: 1,
            max_sweeps: 100,
        }
    }
}

/// Best run for one weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub result: SolveResult,
    /// 0 is the all-min start, 1 the all-max start, `2 + r` the r-th random start.
    pub restart_index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullVertex {
    /// Index into `RegionResult::points`.
    pub point: usize,
    pub u1: f64,
    pub u2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionResult {
    pub points: Vec<SweepPoint>,
    /// Upper-right hull, from the largest `u1` to the largest `u2`.
    pub hull: Vec<HullVertex>,
}

/// Initial policy pairs: all-min, all-max, then `restarts` seeded random pairs.
///
/// Random pair `r` depends only on `(seed, r)`.
pub fn initial_pairs(eval: &Evaluator<'_>, restarts: usize, seed: u64) -> Vec<(DecisionPolicy, DecisionPolicy)> {
    let inst = eval.instance();
    let mut out = vec![
        (inst.min_policy(Node::One), inst.min_policy(Node::Two)),
        (inst.max_policy(Node::One), inst.max_policy(Node::Two)),
    ];
    let (n1, n2, nv, m) = (
        inst.num_signals(Node::One),
        inst.num_signals(Node::Two),
        inst.lottery.len(),
        inst.num_powers(),
    );
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[r as u64]));
        let f1 = DecisionPolicy::random(Node::One, n1, nv, m, &mut rng);
        let f2 = DecisionPolicy::random(Node::Two, n2, nv, m, &mut rng);
        out.push((f1, f2));
    }
    out
}

/// Runs sequential best response from every initial pair.
pub fn solve_all_starts(eval: &Evaluator<'_>, lambda: f64, opts: &SweepOptions) -> Result<Vec<SolveResult>> {
    check_lambda(lambda)?;
    initial_pairs(eval, opts.restarts, opts.seed)
        .into_par_iter()
        .map(|init| sequential_best_response(eval, lambda, init, opts.max_sweeps))
        .collect()
}

/// Keeps the run with the largest objective; earlier starts win ties.
pub fn best_of(runs: Vec<SolveResult>) -> Option<SweepPoint> {
    let mut best: Option<SweepPoint> = None;
    for (i, run) in runs.into_iter().enumerate() {
        if best.as_ref().is_none_or(|b| run.w > b.result.w) {
            best = Some(SweepPoint {
                result: run,
                restart_index: i,
            });
        }
    }
    best
}

/// Best multi-start solution for one weight.
pub fn solve_multi_start(eval: &Evaluator<'_>, lambda: f64, opts: &SweepOptions) -> Result<SweepPoint> {
    let runs = solve_all_starts(eval, lambda, opts)?;
    Ok(best_of(runs).expect("at least two starts"))
}

/// Best solution for every weight in `lambdas` plus the hull of the points.
pub fn pareto_sweep(eval: &Evaluator<'_>, lambdas: &[f64], opts: &SweepOptions) -> Result<RegionResult> {
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("lambda grid is empty".into()));
    }
    for &l in lambdas {
        check_lambda(l)?;
    }
    let points: Vec<SweepPoint> = lambdas
        .par_iter()
        .map(|&l| solve_multi_start(eval, l, opts))
        .collect::<Result<_>>()?;
    let coords: Vec<(f64, f64)> = points.iter().map(|p| (p.result.u1, p.result.u2)).collect();
    let hull = upper_right_hull(&coords)
        .into_iter()
        .map(|i| HullVertex {
            point: i,
            u1: coords[i].0,
            u2: coords[i].1,
        })
        .collect();
    Ok(RegionResult { points, hull })
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Vertices of the Pareto part of the convex hull of `points`, ordered from
/// the point with the largest first coordinate to the one with the largest
/// second coordinate. Returns indices into `points`.
pub fn upper_right_hull(points: &[(f64, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (points[a], points[b]);
        pa.0.total_cmp(&pb.0).then(pa.1.total_cmp(&pb.1)).then(a.cmp(&b))
    });
    order.dedup_by(|a, b| points[*a] == points[*b]);

    let mut upper: Vec<usize> = Vec::new();
    for &i in &order {
        while upper.len() >= 2 {
            let n = upper.len();
            if cross(points[upper[n - 2]], points[upper[n - 1]], points[i]) >= 0.0 {
                upper.pop();
            } else {
                break;
            }
        }
        upper.push(i);
    }
    // drop the rising left part: start at the highest point (rightmost on ties)
    let mut start = 0;
    for (k, &i) in upper.iter().enumerate() {
        if points[i].1 >= points[upper[start]].1 {
            start = k;
        }
    }
    let mut hull = upper.split_off(start);
    hull.reverse();
    hull
}
