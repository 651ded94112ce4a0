//! Exact baselines: exhaustive enumeration, branch-and-bound over the full
//! constraint set, and the LP relaxation.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gap_bound::{residual_u1, DEFAULT_NODE_CAP};
use crate::greedy::solve_cmdms;
use crate::model::{fits, AssignmentMode, AssociationMatrix, Matrix, ProblemInstance, Solution, SolveStatus};
use crate::search::{lp_bound, ranked_nfps, snap_bound, Active, Node};

pub const BRUTE_FORCE_NAME: &str = "brute_force";
pub const BNB_NAME: &str = "bnb";
pub const LP_NAME: &str = "lp";

/// Largest enumeration [`brute_force`] accepts.
pub const BRUTE_FORCE_LIMIT: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("{count} assignments exceed the enumeration limit {limit}")]
    TooLarge { count: f64, limit: u64 },
    #[error("invalid branch-and-bound configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// LP relaxation of the residual problem.
    #[default]
    Lp,
    /// U1 of the residual problem.
    GapU1,
    /// Σ of the best remaining rates.
    RateSum,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BnbConfig {
    pub node_cap: u64,
    pub bound_kind: BoundKind,
    /// Relative improvement a bound must promise for a node to be explored.
    pub tolerance: f64,
}

impl Default for BnbConfig {
    fn default() -> Self {
        Self {
            node_cap: DEFAULT_NODE_CAP,
            bound_kind: BoundKind::Lp,
            tolerance: 1e-9,
        }
    }
}

impl BnbConfig {
    pub fn validate(&self) -> Result<(), ExactError> {
        if self.node_cap == 0 {
            return Err(ExactError::InvalidConfig("node_cap must be positive".into()));
        }
        if !(self.tolerance >= 0.0 && self.tolerance < 1.0) {
            return Err(ExactError::InvalidConfig(format!("tolerance {}", self.tolerance)));
        }
        Ok(())
    }
}

/// Enumerates every assignment in lexicographic order (SC 0 most
/// significant; unassigned before NFP 0 before NFP 1 ...) and keeps the first
/// feasible maximum.
pub fn brute_force(instance: &ProblemInstance) -> Result<Solution, ExactError> {
    let (n, m) = (instance.n_sc(), instance.n_d());
    let count = ((m + 1) as f64).powi(n as i32);
    if count > BRUTE_FORCE_LIMIT as f64 {
        return Err(ExactError::TooLarge {
            count,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let start = Instant::now();
    let limits = instance.limits();
    let mut digits = vec![0usize; n];
    let mut best = vec![None; n];
    let mut best_value = f64::NEG_INFINITY;
    let mut visited: u64 = 0;
    loop {
        visited += 1;
        let mut rate = 0.0;
        let mut bandwidth = vec![0.0; m];
        let mut links = vec![0usize; m];
        let mut ok = true;
        for (i, &d) in digits.iter().enumerate() {
            if d > 0 {
                let j = d - 1;
                if !instance.qos_ok(i, j) {
                    ok = false;
                    break;
                }
                rate += instance.rate(i, j);
                bandwidth[j] += instance.bandwidth(i, j);
                links[j] += 1;
            }
        }
        ok = ok
            && fits(rate, limits.backhaul_rate)
            && (0..m).all(|j| fits(bandwidth[j], limits.nfp_bandwidth[j]) && links[j] <= limits.nfp_links[j]);
        if ok && rate > best_value {
            best_value = rate;
            best = digits.iter().map(|&d| d.checked_sub(1)).collect();
        }
        // odometer, last SC fastest
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(Solution::from_choices(
                    instance,
                    &best,
                    BRUTE_FORCE_NAME,
                    start.elapsed().as_secs_f64(),
                    visited,
                    SolveStatus::Optimal,
                ));
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] <= m {
                break;
            }
            digits[k] = 0;
        }
    }
}

struct Evaluated {
    node: Node,
    bound: f64,
    /// Completion of the residual problem proven optimal for this node.
    solved: Option<Vec<Option<usize>>>,
    branch_sc: Option<usize>,
}

/// Optimal binary solution of the full problem by depth-first
/// branch-and-bound, warm-started from CMDMS.
///
/// With the LP bound, a node whose residual LP is integral is solved outright;
/// otherwise it branches on the fractional SC with the largest rate. With the
/// other bounds it branches on the free SC with the largest admissible rate.
/// Children (one per admissible NFP plus the unassigned child) are bounded
/// when created and visited best bound first.
pub fn solve_bnb_exact(instance: &ProblemInstance, config: &BnbConfig) -> Result<Solution, ExactError> {
    config.validate()?;
    let start = Instant::now();
    let active = Active::ALL;
    let granularity = instance.rate_granularity();

    let warm = solve_cmdms(instance);
    let mut best_choices = warm.assignment.choices();
    let mut best_value = warm.sum_rate;
    let improves = |bound: f64, incumbent: f64| bound > incumbent + config.tolerance * incumbent.abs().max(1.0);

    let evaluate = |node: Node| -> Evaluated {
        let cheap = node.fixed_rate + node.rate_sum_bound(instance, active);
        match config.bound_kind {
            BoundKind::Lp => match lp_bound(instance, active, &node, true) {
                Some(lp) => {
                    let bound = snap_bound(cheap.min(node.fixed_rate + lp.value), granularity);
                    let solved = lp.integral_choices().and_then(|ones| {
                        let mut choices = node.complete(|_| None);
                        for (i, j) in ones {
                            choices[i] = Some(j);
                        }
                        completion_fits(instance, &node, &choices).then_some(choices)
                    });
                    let branch_sc = lp.branching_sc(instance).or_else(|| first_open_sc(instance, &node));
                    Evaluated {
                        node,
                        bound,
                        solved,
                        branch_sc,
                    }
                }
                None => fallback(instance, node, snap_bound(cheap, granularity)),
            },
            BoundKind::GapU1 => {
                let u1 = node.fixed_rate + residual_u1(instance, active, &node).min(node.rate_left);
                fallback(instance, node, snap_bound(cheap.min(u1), granularity))
            }
            BoundKind::RateSum => fallback(instance, node, snap_bound(cheap, granularity)),
        }
    };

    let mut stack = vec![evaluate(Node::root(instance))];
    let mut nodes: u64 = 0;
    let mut status = SolveStatus::Optimal;
    while let Some(ev) = stack.pop() {
        if !improves(ev.bound, best_value) {
            continue;
        }
        if nodes >= config.node_cap {
            status = SolveStatus::NodeBudgetExceeded;
            break;
        }
        nodes += 1;
        if let Some(choices) = ev.solved {
            let value = rate_of(instance, &choices);
            if value > best_value {
                best_value = value;
                best_choices = choices;
            }
            continue;
        }
        let Some(sc) = ev.branch_sc else {
            // nothing left to decide
            if ev.node.fixed_rate > best_value {
                best_value = ev.node.fixed_rate;
                best_choices = ev.node.complete(|_| None);
            }
            continue;
        };
        let mut children: Vec<Evaluated> = ranked_nfps(instance, active, &ev.node, sc)
            .into_iter()
            .map(Some)
            .chain(std::iter::once(None))
            .map(|choice| evaluate(ev.node.child(instance, sc, choice)))
            .collect();
        // stable: equal bounds keep the preference order
        children.sort_by(|a, b| b.bound.total_cmp(&a.bound));
        stack.extend(children.into_iter().rev());
    }

    Ok(Solution::from_choices(
        instance,
        &best_choices,
        BNB_NAME,
        start.elapsed().as_secs_f64(),
        nodes,
        status,
    ))
}

fn fallback(instance: &ProblemInstance, node: Node, bound: f64) -> Evaluated {
    let branch_sc = first_open_sc(instance, &node);
    Evaluated {
        node,
        bound,
        solved: None,
        branch_sc,
    }
}

/// Free SC with the largest admissible rate; `None` if no free SC can be
/// associated any more.
fn first_open_sc(instance: &ProblemInstance, node: &Node) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for i in node.free() {
        let top = (0..instance.n_d())
            .filter(|&j| node.admits(instance, Active::ALL, i, j))
            .map(|j| instance.rate(i, j))
            .fold(f64::NEG_INFINITY, f64::max);
        if top.is_finite() && best.is_none_or(|(_, r)| top > r) {
            best = Some((i, top));
        }
    }
    best.map(|(i, _)| i)
}

fn rate_of(instance: &ProblemInstance, choices: &[Option<usize>]) -> f64 {
    choices
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.map(|j| instance.rate(i, j)))
        .sum()
}

/// Whether the free part of `choices` fits the node's remaining limits.
fn completion_fits(instance: &ProblemInstance, node: &Node, choices: &[Option<usize>]) -> bool {
    let n_d = instance.n_d();
    let mut bandwidth = vec![0.0; n_d];
    let mut links = vec![0usize; n_d];
    let mut rate = 0.0;
    for i in node.free() {
        if let Some(j) = choices[i] {
            bandwidth[j] += instance.bandwidth(i, j);
            links[j] += 1;
            rate += instance.rate(i, j);
        }
    }
    fits(rate, node.rate_left)
        && (0..n_d).all(|j| fits(bandwidth[j], node.bandwidth_left[j]) && links[j] <= node.links_left[j])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpSolveStatus {
    Optimal,
    Infeasible,
    Numerical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub assignment: AssociationMatrix,
    pub objective: f64,
    pub status: LpSolveStatus,
    /// Seconds.
    pub wall_time: f64,
}

/// LP relaxation of the full problem with SINR-failing pairs fixed to zero.
pub fn solve_lp_relaxation(instance: &ProblemInstance) -> LpSolution {
    let start = Instant::now();
    let (n, m) = (instance.n_sc(), instance.n_d());
    let root = Node::root(instance);
    match lp_bound(instance, Active::ALL, &root, false) {
        Some(lp) => {
            let mut entries = Matrix::zeros(n, m);
            for (&(i, j), &x) in lp.pairs.iter().zip(&lp.x) {
                entries.set(i, j, x);
            }
            let assignment =
                AssociationMatrix::new(entries, AssignmentMode::Fractional).expect("entries clamped to [0, 1]");
            let objective = crate::model::objective(instance, &assignment).expect("shape matches");
            LpSolution {
                assignment,
                objective,
                status: LpSolveStatus::Optimal,
                wall_time: start.elapsed().as_secs_f64(),
            }
        }
        None => LpSolution {
            assignment: AssociationMatrix::zeros(n, m, AssignmentMode::Fractional),
            objective: 0.0,
            status: LpSolveStatus::Numerical,
            wall_time: start.elapsed().as_secs_f64(),
        },
    }
}
