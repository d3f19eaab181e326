use serde::{Deserialize, Serialize};

use super::evaluator::{check_lambda, Evaluator};
use crate::error::{Error, Result};
use crate::game::Node;
use crate::policy::DecisionPolicy;

/// Outcome of one weighted-utility maximization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub lambda: f64,
    /// Achieved `lambda u1 + (1 - lambda) u2`.
    pub w: f64,
    pub u1: f64,
    pub u2: f64,
    pub policies: (DecisionPolicy, DecisionPolicy),
    pub sweeps: usize,
    pub converged: bool,
    /// Objective at the initial pair and after every single-node update.
    pub trace: Vec<f64>,
}

impl SolveResult {
    pub(crate) fn from_pair(
        eval: &Evaluator<'_>,
        lambda: f64,
        f1: DecisionPolicy,
        f2: DecisionPolicy,
        sweeps: usize,
        converged: bool,
        trace: Vec<f64>,
    ) -> Self {
        let (u1, u2) = eval.expected_utilities_unchecked(&f1, &f2);
        SolveResult {
            lambda,
            w: weighted(lambda, u1, u2),
            u1,
            u2,
            policies: (f1, f2),
            sweeps,
            converged,
            trace,
        }
    }

    /// Whether the trace never decreases by more than `tol`.
    pub fn trace_is_monotone(&self, tol: f64) -> bool {
        self.trace.windows(2).all(|w| w[1] >= w[0] - tol)
    }
}

pub(crate) fn weighted(lambda: f64, u1: f64, u2: f64) -> f64 {
    lambda * u1 + (1.0 - lambda) * u2
}

/// Alternating exact best responses, node 1 first, until a full sweep leaves
/// both tables unchanged or `max_sweeps` sweeps have run.
pub fn sequential_best_response(
    eval: &Evaluator<'_>,
    lambda: f64,
    init: (DecisionPolicy, DecisionPolicy),
    max_sweeps: usize,
) -> Result<SolveResult> {
    check_lambda(lambda)?;
    if max_sweeps == 0 {
        return Err(Error::InvalidArgument("max_sweeps must be at least 1".into()));
    }
    let (mut f1, mut f2) = init;
    eval.check_pair(&f1, &f2)?;

    let value = |f1: &DecisionPolicy, f2: &DecisionPolicy| {
        let (u1, u2) = eval.expected_utilities_unchecked(f1, f2);
        weighted(lambda, u1, u2)
    };
    let mut trace = vec![value(&f1, &f2)];
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        let g1 = eval.best_response_unchecked(Node::One, lambda, &f2);
        trace.push(value(&g1, &f2));
        let g2 = eval.best_response_unchecked(Node::Two, lambda, &g1);
        trace.push(value(&g1, &g2));
        let unchanged = g1 == f1 && g2 == f2;
        f1 = g1;
        f2 = g2;
        if unchanged {
            converged = true;
            break;
        }
    }
    Ok(SolveResult::from_pair(eval, lambda, f1, f2, sweeps, converged, trace))
}
